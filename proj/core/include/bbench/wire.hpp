#pragma once

#include "bbench/linsolve.hpp" // Vec

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace bbench {

struct WireRequest {
    Vec initial_guess;
    std::int64_t sent_at_unix_ns = 0;
    std::int64_t call_index = 0;
    std::int64_t iterations = 0;
    std::string system_id;

    friend bool operator==(const WireRequest&, const WireRequest&) = default;
};

struct WireResponse {
    Vec result;
    std::int64_t received_at_unix_ns = 0;
    std::int64_t op_start_unix_ns = 0;
    std::int64_t op_end_unix_ns = 0;
    std::string worker_id;
    std::vector<std::string> relay_path; // outermost hop first; filled by relays

    friend bool operator==(const WireResponse&, const WireResponse&) = default;
};

/// One workload invocation as persisted to the JSONL log.
/// communication_duration_s is round_trip_s - operation_duration_s by
/// construction: the client monotonic clock measures the round trip, the
/// worker clock measures only the solve interval it can observe coherently.
struct CallRecord {
    std::int64_t call_index = 0;
    std::string environment_label;
    double operation_duration_s = 0.0;
    double communication_duration_s = 0.0;
    double round_trip_s = 0.0;
    Vec input_vector;
    Vec output_vector;
    bool accepted_by_filter = false;
    std::int64_t sent_at_unix_ns = 0; // diagnostics only
    std::string worker_id;            // diagnostics only

    friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

/// Canonical encodings: fixed field order, vectors as decimal floats with up
/// to 17 significant digits (lossless for binary64), timestamps as integers.
/// Identical inputs produce byte-identical output.
std::string encode_request(const WireRequest& req);
std::string encode_response(const WireResponse& resp);
std::string encode_call_record(const CallRecord& record);

/// Decoders are exact inverses of the encoders. Unknown extra fields are
/// ignored; a missing or mistyped field raises ParseError naming it.
WireRequest decode_request(std::string_view bytes);
WireResponse decode_response(std::string_view bytes);
CallRecord decode_call_record(std::string_view bytes);

std::filesystem::path log_file_path(const std::filesystem::path& output_dir,
                                    std::string_view environment_label, std::string_view run_id);

/// Single-writer JSONL sink; every record is flushed before append returns so
/// a crashed run keeps all completed calls.
class LogWriter {
public:
    explicit LogWriter(std::filesystem::path path);

    void append(const CallRecord& record);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

struct LogReadResult {
    std::vector<CallRecord> records;
    std::size_t dropped_trailing = 0; // half-written final line (crash artifact)
};

/// Parses a JSONL log in order. A malformed final line is dropped with a
/// warning count; a malformed interior line raises ParseError with its
/// 1-based line number.
LogReadResult read_log_records(const std::filesystem::path& path);

} // namespace bbench
