#include "bbench/report.hpp"

#include "bbench/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>
#include <sys/utsname.h>

namespace bbench {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_opt6(const std::optional<double>& v) { return v ? fmt6(*v) : "-"; }

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_opt17(const std::optional<double>& v) { return v ? fmt17(*v) : ""; }

// RFC 4180: quote when the field contains a comma, quote or newline.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

json summary_to_json(const StatsSummary& s) {
    json j;
    j["mean_s"] = s.mean ? json(*s.mean) : json(nullptr);
    j["population_stddev_s"] = s.population_stddev ? json(*s.population_stddev) : json(nullptr);
    j["count"] = s.count;
    j["filtered_out"] = s.filtered_out;
    return j;
}

StatsSummary summary_from_json(const json& j) {
    StatsSummary s;
    if (j.contains("mean_s") && !j["mean_s"].is_null()) s.mean = j["mean_s"].get<double>();
    if (j.contains("population_stddev_s") && !j["population_stddev_s"].is_null())
        s.population_stddev = j["population_stddev_s"].get<double>();
    s.count = j.value("count", std::size_t{0});
    s.filtered_out = j.value("filtered_out", std::size_t{0});
    return s;
}

json result_to_json(const ExperimentResult& r) {
    ordered_json j;
    j["environment"] = r.environment_label;
    j["operation"] = summary_to_json(r.operation_stats);
    j["communication"] = summary_to_json(r.communication_stats);
    j["accuracy"] = r.accuracy;
    j["n_total"] = r.total_calls;
    j["n_accepted"] = r.operation_stats.count;
    j["operation_median_s"] = r.operation_median_s ? json(*r.operation_median_s) : json(nullptr);
    j["communication_median_s"] =
        r.communication_median_s ? json(*r.communication_median_s) : json(nullptr);
    j["log_path"] = r.log_path.string();
    j["run_id"] = r.run_id;
    j["partial"] = r.partial;
    j["error"] = r.error;
    return j;
}

} // namespace

ReportFormat parse_report_format(std::string_view name) {
    if (name == "markdown" || name == "md") return ReportFormat::Markdown;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw ConfigError("unknown report format: " + std::string(name));
}

ReportMetadata collect_metadata(std::string config_echo) {
    ReportMetadata meta;
    meta.config_echo = std::move(config_echo);

    struct utsname u {};
    if (::uname(&u) == 0) {
        meta.host = std::string(u.nodename) + " " + u.sysname + " " + u.release + " " + u.machine;
    } else {
        meta.host = "unknown";
    }

    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    meta.timestamp = buf;
    return meta;
}

std::string render_table(std::span<const ExperimentResult> results, ReportFormat format,
                         const ReportMetadata& metadata) {
    if (results.empty()) throw ContractViolation("render_table needs at least one result");

    switch (format) {
    case ReportFormat::Markdown: {
        std::ostringstream out;
        out << "# Boundary overhead summary\n\n";
        if (!metadata.host.empty()) out << "- host: " << metadata.host << "\n";
        if (!metadata.timestamp.empty()) out << "- generated: " << metadata.timestamp << "\n";
        if (!metadata.config_echo.empty()) out << "- config: " << metadata.config_echo << "\n";
        out << "\n";
        out << "| environment | op mean (s) | op stddev (s) | comm mean (s) | comm stddev (s) | "
               "accuracy | n |\n";
        out << "|---|---|---|---|---|---|---|\n";
        for (const auto& r : results) {
            out << "| " << r.environment_label << " | " << fmt_opt6(r.operation_stats.mean)
                << " | " << fmt_opt6(r.operation_stats.population_stddev) << " | "
                << fmt_opt6(r.communication_stats.mean) << " | "
                << fmt_opt6(r.communication_stats.population_stddev) << " | "
                << fmt6(r.accuracy * 100.0) << "% | " << r.total_calls << " |\n";
            if (r.partial) {
                out << "| ^ partial: " << r.error << " | | | | | | |\n";
            }
        }
        return out.str();
    }
    case ReportFormat::Csv: {
        std::string out =
            "environment,op_mean_s,op_stddev_s,comm_mean_s,comm_stddev_s,accuracy,n_accepted,"
            "n_total\r\n";
        for (const auto& r : results) {
            out += csv_field(r.environment_label) + ',';
            out += fmt_opt17(r.operation_stats.mean) + ',';
            out += fmt_opt17(r.operation_stats.population_stddev) + ',';
            out += fmt_opt17(r.communication_stats.mean) + ',';
            out += fmt_opt17(r.communication_stats.population_stddev) + ',';
            out += fmt17(r.accuracy) + ',';
            out += std::to_string(r.operation_stats.count) + ',';
            out += std::to_string(r.total_calls) + "\r\n";
        }
        return out;
    }
    case ReportFormat::Json:
        return results_to_json(results, metadata);
    }
    throw ConfigError("unreachable report format");
}

std::string render_comparison(std::span<const ExperimentResult> results) {
    if (results.size() < 2) throw ContractViolation("comparison needs at least two results");

    struct Entry {
        const ExperimentResult* r;
    };
    std::vector<Entry> usable;
    for (const auto& r : results) {
        if (r.operation_median_s && r.communication_median_s) usable.push_back({&r});
    }
    std::ostringstream out;
    out << "# Environment comparison\n\n";
    if (usable.size() < 2) {
        out << "not enough non-empty results to compare\n";
        return out.str();
    }

    const auto ratio_block = [&](const char* title, auto median_of) {
        out << "## " << title << " median ratios (row / column)\n\n|  |";
        for (const auto& e : usable) out << " " << e.r->environment_label << " |";
        out << "\n|---|";
        for (std::size_t i = 0; i < usable.size(); ++i) out << "---|";
        out << "\n";
        for (const auto& row : usable) {
            out << "| " << row.r->environment_label << " |";
            for (const auto& col : usable) {
                const double num = median_of(*row.r);
                const double den = median_of(*col.r);
                out << " " << (den > 0.0 ? fmt6(num / den) : "inf") << " |";
            }
            out << "\n";
        }
        out << "\n";
    };
    ratio_block("Operation", [](const ExperimentResult& r) { return *r.operation_median_s; });
    ratio_block("Communication",
                [](const ExperimentResult& r) { return *r.communication_median_s; });

    const auto flag = [&](const char* what, auto key) {
        const Entry* best = &usable.front();
        for (const auto& e : usable) {
            if (key(*e.r) < key(*best->r)) best = &e;
        }
        out << "- " << what << ": " << best->r->environment_label << "\n";
    };
    flag("fastest operation (lowest median)",
         [](const ExperimentResult& r) { return *r.operation_median_s; });
    flag("fastest communication (lowest median)",
         [](const ExperimentResult& r) { return *r.communication_median_s; });
    flag("most deterministic operation (lowest stddev)", [](const ExperimentResult& r) {
        return r.operation_stats.population_stddev.value_or(HUGE_VAL);
    });
    flag("most deterministic communication (lowest stddev)", [](const ExperimentResult& r) {
        return r.communication_stats.population_stddev.value_or(HUGE_VAL);
    });
    return out.str();
}

std::string results_to_json(std::span<const ExperimentResult> results,
                            const ReportMetadata& metadata) {
    ordered_json j;
    j["metadata"] = {{"host", metadata.host},
                     {"generated", metadata.timestamp},
                     {"config", metadata.config_echo}};
    ordered_json arr = ordered_json::array();
    for (const auto& r : results) arr.push_back(result_to_json(r));
    j["results"] = arr;
    return j.dump(2) + "\n";
}

std::vector<ExperimentResult> results_from_json(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed results file: ") + e.what());
    }
    if (!doc.contains("results") || !doc["results"].is_array()) {
        throw ParseError("results file has no results array", "results");
    }
    std::vector<ExperimentResult> out;
    for (const auto& entry : doc["results"]) {
        ExperimentResult r;
        r.environment_label = entry.value("environment", std::string{});
        if (entry.contains("operation")) r.operation_stats = summary_from_json(entry["operation"]);
        if (entry.contains("communication"))
            r.communication_stats = summary_from_json(entry["communication"]);
        r.accuracy = entry.value("accuracy", 0.0);
        if (entry.contains("operation_median_s") && !entry["operation_median_s"].is_null())
            r.operation_median_s = entry["operation_median_s"].get<double>();
        if (entry.contains("communication_median_s") && !entry["communication_median_s"].is_null())
            r.communication_median_s = entry["communication_median_s"].get<double>();
        r.log_path = entry.value("log_path", std::string{});
        r.run_id = entry.value("run_id", std::string{});
        r.partial = entry.value("partial", false);
        r.error = entry.value("error", std::string{});
        r.total_calls = entry.value("n_total", std::size_t{0});
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace bbench
