#pragma once

#include "bbench/linsolve.hpp" // Vec

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bbench {

/// Mean / population standard deviation of one duration series. mean and
/// stddev are absent when no sample survived the filter.
struct StatsSummary {
    std::optional<double> mean;
    std::optional<double> population_stddev;
    std::size_t count = 0;
    std::size_t filtered_out = 0;
};

struct FilterConfig {
    double confidence_level = 0.9995;
    unsigned degrees_of_freedom = 5; // the procedure fixes dof = 5, not n - 1
    bool per_tail = false;           // false = two-tailed interval
    bool use_sample_stddev = false;  // 1/(n-1) switch; population form is the default
};

double mean(std::span<const double> samples);

/// sqrt((1/n) sum (x_i - mean)^2) -- population form, 1/n.
double population_stddev(std::span<const double> samples);

/// 1/(n-1) variant; requires n >= 2.
double sample_stddev(std::span<const double> samples);

double median(std::span<const double> samples);

/// One-sample t: (sample_mean - ground_truth_mean) / (stddev / sqrt(n)).
/// stddev == 0 degenerates to 0 when the means agree, signed infinity
/// otherwise (the filter then always rejects).
double t_statistic(double sample_mean, double ground_truth_mean, double stddev, std::size_t n);

/// Critical value t* with P(|T_dof| <= t*) = confidence_level (two-tailed) or
/// P(T_dof <= t*) = confidence_level (per-tail). Accurate to well under 1e-3.
double t_critical(const FilterConfig& config);

/// CDF of Student's t with `dof` degrees of freedom, via the regularized
/// incomplete beta function.
double student_t_cdf(double t, double dof);

struct FilterPartition {
    std::vector<std::size_t> accepted;
    std::vector<std::size_t> rejected;
};

/// Per-call confidence filter: each error vector e = x_output - x* is accepted
/// iff it is exactly zero or |t| <= t_critical, with t computed from the
/// component-wise mean and stddev of e against ground-truth mean 0.
FilterPartition confidence_filter(std::span<const Vec> call_errors, const FilterConfig& config);

StatsSummary summarize(std::span<const double> durations);

} // namespace bbench
