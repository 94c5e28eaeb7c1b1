#include "bbench/wire.hpp"

#include "bbench/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>

namespace bbench {

namespace {

using nlohmann::json;

std::string format_double17(double v) {
    if (!std::isfinite(v)) throw Error("cannot encode non-finite number");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void append_vector(std::string& out, const Vec& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double17(v[i]);
    }
    out += ']';
}

void append_string(std::string& out, const std::string& s) {
    out += json(s).dump(); // quoted + escaped
}

const json& require_field(const json& obj, const char* name) {
    const auto it = obj.find(name);
    if (it == obj.end()) throw ParseError(std::string("missing field: ") + name, name);
    return *it;
}

std::int64_t require_int(const json& obj, const char* name) {
    const json& f = require_field(obj, name);
    if (!f.is_number_integer()) {
        throw ParseError(std::string("field is not an integer: ") + name, name);
    }
    return f.get<std::int64_t>();
}

double require_double(const json& obj, const char* name) {
    const json& f = require_field(obj, name);
    if (!f.is_number()) throw ParseError(std::string("field is not a number: ") + name, name);
    return f.get<double>();
}

std::string require_string(const json& obj, const char* name) {
    const json& f = require_field(obj, name);
    if (!f.is_string()) throw ParseError(std::string("field is not a string: ") + name, name);
    return f.get<std::string>();
}

bool require_bool(const json& obj, const char* name) {
    const json& f = require_field(obj, name);
    if (!f.is_boolean()) throw ParseError(std::string("field is not a boolean: ") + name, name);
    return f.get<bool>();
}

Vec require_vector(const json& obj, const char* name) {
    const json& f = require_field(obj, name);
    if (!f.is_array()) throw ParseError(std::string("field is not an array: ") + name, name);
    Vec v;
    v.reserve(f.size());
    for (const auto& e : f) {
        if (!e.is_number()) {
            throw ParseError(std::string("non-numeric entry in field: ") + name, name);
        }
        v.push_back(e.get<double>());
    }
    return v;
}

json parse_object(std::string_view bytes) {
    json obj;
    try {
        obj = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError("payload is not a JSON object");
    return obj;
}

} // namespace

std::string encode_request(const WireRequest& req) {
    std::string out = "{\"initial_guess\":";
    append_vector(out, req.initial_guess);
    out += ",\"sent_at_unix_ns\":" + std::to_string(req.sent_at_unix_ns);
    out += ",\"call_index\":" + std::to_string(req.call_index);
    out += ",\"iterations\":" + std::to_string(req.iterations);
    out += ",\"system_id\":";
    append_string(out, req.system_id);
    out += '}';
    return out;
}

WireRequest decode_request(std::string_view bytes) {
    const json obj = parse_object(bytes);
    WireRequest req;
    req.initial_guess = require_vector(obj, "initial_guess");
    req.sent_at_unix_ns = require_int(obj, "sent_at_unix_ns");
    req.call_index = require_int(obj, "call_index");
    req.iterations = require_int(obj, "iterations");
    req.system_id = require_string(obj, "system_id");
    if (req.call_index < 0) throw ParseError("call_index must be >= 0", "call_index");
    if (req.iterations < 0) throw ParseError("iterations must be >= 0", "iterations");
    return req;
}

std::string encode_response(const WireResponse& resp) {
    std::string out = "{\"result\":";
    append_vector(out, resp.result);
    out += ",\"received_at_unix_ns\":" + std::to_string(resp.received_at_unix_ns);
    out += ",\"op_start_unix_ns\":" + std::to_string(resp.op_start_unix_ns);
    out += ",\"op_end_unix_ns\":" + std::to_string(resp.op_end_unix_ns);
    out += ",\"worker_id\":";
    append_string(out, resp.worker_id);
    if (!resp.relay_path.empty()) {
        out += ",\"relay_path\":[";
        for (std::size_t i = 0; i < resp.relay_path.size(); ++i) {
            if (i) out += ',';
            append_string(out, resp.relay_path[i]);
        }
        out += ']';
    }
    out += '}';
    return out;
}

WireResponse decode_response(std::string_view bytes) {
    const json obj = parse_object(bytes);
    WireResponse resp;
    resp.result = require_vector(obj, "result");
    resp.received_at_unix_ns = require_int(obj, "received_at_unix_ns");
    resp.op_start_unix_ns = require_int(obj, "op_start_unix_ns");
    resp.op_end_unix_ns = require_int(obj, "op_end_unix_ns");
    resp.worker_id = require_string(obj, "worker_id");
    if (const auto it = obj.find("relay_path"); it != obj.end()) {
        if (!it->is_array()) throw ParseError("field is not an array: relay_path", "relay_path");
        for (const auto& e : *it) {
            if (!e.is_string()) {
                throw ParseError("non-string entry in field: relay_path", "relay_path");
            }
            resp.relay_path.push_back(e.get<std::string>());
        }
    }
    return resp;
}

std::string encode_call_record(const CallRecord& record) {
    std::string out = "{\"call_index\":" + std::to_string(record.call_index);
    out += ",\"environment_label\":";
    append_string(out, record.environment_label);
    out += ",\"operation_duration_s\":" + format_double17(record.operation_duration_s);
    out += ",\"communication_duration_s\":" + format_double17(record.communication_duration_s);
    out += ",\"round_trip_s\":" + format_double17(record.round_trip_s);
    out += ",\"input_vector\":";
    append_vector(out, record.input_vector);
    out += ",\"output_vector\":";
    append_vector(out, record.output_vector);
    out += ",\"accepted_by_filter\":";
    out += record.accepted_by_filter ? "true" : "false";
    out += ",\"sent_at_unix_ns\":" + std::to_string(record.sent_at_unix_ns);
    out += ",\"worker_id\":";
    append_string(out, record.worker_id);
    out += '}';
    return out;
}

CallRecord decode_call_record(std::string_view bytes) {
    const json obj = parse_object(bytes);
    CallRecord r;
    r.call_index = require_int(obj, "call_index");
    r.environment_label = require_string(obj, "environment_label");
    r.operation_duration_s = require_double(obj, "operation_duration_s");
    r.communication_duration_s = require_double(obj, "communication_duration_s");
    r.round_trip_s = require_double(obj, "round_trip_s");
    r.input_vector = require_vector(obj, "input_vector");
    r.output_vector = require_vector(obj, "output_vector");
    r.accepted_by_filter = require_bool(obj, "accepted_by_filter");
    // Diagnostic fields; tolerate their absence in foreign logs.
    if (obj.contains("sent_at_unix_ns")) r.sent_at_unix_ns = require_int(obj, "sent_at_unix_ns");
    if (obj.contains("worker_id")) r.worker_id = require_string(obj, "worker_id");
    return r;
}

std::filesystem::path log_file_path(const std::filesystem::path& output_dir,
                                    std::string_view environment_label, std::string_view run_id) {
    std::string name;
    name.append(environment_label);
    name += '_';
    name.append(run_id);
    name += ".jsonl";
    return output_dir / name;
}

LogWriter::LogWriter(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    out_.open(path_, std::ios::out | std::ios::app);
    if (!out_) throw Error("cannot open log file for append: " + path_.string());
}

void LogWriter::append(const CallRecord& record) {
    out_ << encode_call_record(record) << '\n';
    out_.flush();
    if (!out_) throw Error("log write failure: " + path_.string());
}

LogReadResult read_log_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open log file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);

    LogReadResult result;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            result.records.push_back(decode_call_record(lines[i]));
        } catch (const ParseError& e) {
            if (i + 1 == lines.size()) {
                result.dropped_trailing = 1;
                break;
            }
            throw ParseError("line " + std::to_string(i + 1) + ": " + e.what(), e.field, i + 1);
        }
    }
    return result;
}

} // namespace bbench
