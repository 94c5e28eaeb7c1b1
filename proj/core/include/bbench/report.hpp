#pragma once

#include "bbench/harness.hpp"

#include <span>
#include <string>

namespace bbench {

enum class ReportFormat { Markdown, Csv, Json };

ReportFormat parse_report_format(std::string_view name);

struct ReportMetadata {
    std::string host;       // uname-style description
    std::string config_echo; // effective configuration, key=value pairs
    std::string timestamp;  // ISO-8601 UTC
};

ReportMetadata collect_metadata(std::string config_echo);

/// Table-shaped summaries: per-environment operation/communication mean and
/// stddev plus accuracy. Markdown uses 6 significant digits; CSV and JSON
/// carry full precision. Pure function of its inputs.
std::string render_table(std::span<const ExperimentResult> results, ReportFormat format,
                         const ReportMetadata& metadata);

/// Pairwise ratios of per-environment medians plus fastest / most
/// deterministic flags. Needs at least two non-empty results.
std::string render_comparison(std::span<const ExperimentResult> results);

/// Results-file round-trip used by the `report` subcommand. Summaries only
/// (records stay in the JSONL logs; the file points back at them).
std::string results_to_json(std::span<const ExperimentResult> results,
                            const ReportMetadata& metadata);
std::vector<ExperimentResult> results_from_json(std::string_view bytes);

} // namespace bbench
