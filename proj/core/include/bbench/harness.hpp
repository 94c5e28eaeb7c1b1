#pragma once

#include "bbench/config.hpp"
#include "bbench/stats.hpp"
#include "bbench/wire.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace bbench {

struct ExperimentResult {
    std::string environment_label;
    std::vector<CallRecord> records;
    std::size_t total_calls = 0; // records.size() for live results
    StatsSummary operation_stats;
    StatsSummary communication_stats;
    double accuracy = 0.0; // accepted / total
    std::optional<double> operation_median_s;     // over accepted records
    std::optional<double> communication_median_s; // over accepted records
    std::filesystem::path log_path;
    std::string run_id;
    bool partial = false; // aborted by a driver error or cancellation
    std::string error;
};

/// Initial guess for the next call: the previous call's output, or the
/// configured (default zero) guess for call 0.
Vec chain_rule(const CallRecord* previous, const ExperimentConfig& config);

struct AggregateOutcome {
    StatsSummary operation_stats;
    StatsSummary communication_stats;
    double accuracy = 0.0;
    FilterPartition partition;
};

/// Applies the confidence filter to each record's output error against the
/// ground truth, then summarizes the accepted records' durations. Pure: equal
/// inputs give bit-identical outcomes. All-rejected input yields empty
/// summaries, not an error.
AggregateOutcome aggregate(std::span<const CallRecord> records, const FilterConfig& filter,
                           const Vec& ground_truth);

/// Runs one full experiment: provision, chained call loop with per-call log
/// flush, filter, aggregate, teardown (guaranteed on success, error and
/// cancellation). Driver errors abort the loop and come back as a partial
/// result with whatever completed preserved on disk.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Strictly sequential execution; a failing experiment marks its slot and the
/// rest still run.
std::vector<ExperimentResult> run_matrix(std::span<const ExperimentConfig> configs);

/// The four headline scenarios, derived from a base config:
/// in-process, spawn-process, service-local, nested-relay depth 5.
std::vector<ExperimentConfig> default_matrix(const ExperimentConfig& base);

} // namespace bbench
