#include "bbench/stats.hpp"

#include "bbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bbench {

double mean(std::span<const double> samples) {
    if (samples.empty()) throw ContractViolation("mean of empty sample set");
    double sum = 0.0;
    for (double v : samples) sum += v;
    return sum / static_cast<double>(samples.size());
}

double population_stddev(std::span<const double> samples) {
    if (samples.empty()) throw ContractViolation("stddev of empty sample set");
    const double mu = mean(samples);
    double acc = 0.0;
    for (double v : samples) {
        const double d = v - mu;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(samples.size()));
}

double sample_stddev(std::span<const double> samples) {
    if (samples.size() < 2) throw ContractViolation("sample stddev needs at least two samples");
    const double mu = mean(samples);
    double acc = 0.0;
    for (double v : samples) {
        const double d = v - mu;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(samples.size() - 1));
}

double median(std::span<const double> samples) {
    if (samples.empty()) throw ContractViolation("median of empty sample set");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double t_statistic(double sample_mean, double ground_truth_mean, double stddev, std::size_t n) {
    if (n < 1) throw ContractViolation("t statistic needs n >= 1");
    if (stddev < 0.0) throw ContractViolation("negative stddev");
    const double diff = sample_mean - ground_truth_mean;
    if (stddev == 0.0) {
        if (diff == 0.0) return 0.0;
        return std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    return diff / (stddev / std::sqrt(static_cast<double>(n)));
}

namespace {

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incbeta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-30;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * incbeta_cf(a, b, x) / a;
    }
    return 1.0 - front * incbeta_cf(b, a, 1.0 - x) / b;
}

} // namespace

double student_t_cdf(double t, double dof) {
    if (dof <= 0.0) throw ConfigError("degrees of freedom must be positive");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incbeta(0.5 * dof, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double t_critical(const FilterConfig& config) {
    if (!(config.confidence_level > 0.0 && config.confidence_level < 1.0)) {
        throw ConfigError("confidence level must lie in (0, 1)");
    }
    if (config.degrees_of_freedom < 1) {
        throw ConfigError("degrees of freedom must be a positive integer");
    }
    const double p = config.per_tail ? config.confidence_level
                                     : 1.0 - (1.0 - config.confidence_level) / 2.0;
    if (p <= 0.5) return 0.0; // two-tailed quantile of a symmetric distribution
    const double dof = static_cast<double>(config.degrees_of_freedom);

    double lo = 0.0;
    double hi = 1.0;
    while (student_t_cdf(hi, dof) < p) {
        hi *= 2.0;
        if (hi > 1e12) throw ConfigError("confidence level too close to 1 for this dof");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, dof) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

FilterPartition confidence_filter(std::span<const Vec> call_errors, const FilterConfig& config) {
    const double critical = t_critical(config);
    FilterPartition part;
    for (std::size_t idx = 0; idx < call_errors.size(); ++idx) {
        const Vec& e = call_errors[idx];
        if (e.size() < 2) {
            throw ContractViolation("error vector " + std::to_string(idx) +
                                    " has fewer than 2 components");
        }
        const bool exact = std::all_of(e.begin(), e.end(), [](double v) { return v == 0.0; });
        if (exact) {
            part.accepted.push_back(idx);
            continue;
        }
        const double xbar = mean(e);
        const double sd = config.use_sample_stddev ? sample_stddev(e) : population_stddev(e);
        const double t = t_statistic(xbar, 0.0, sd, e.size());
        if (std::abs(t) <= critical) {
            part.accepted.push_back(idx);
        } else {
            part.rejected.push_back(idx);
        }
    }
    return part;
}

StatsSummary summarize(std::span<const double> durations) {
    if (durations.empty()) throw ContractViolation("summarize of empty duration series");
    StatsSummary s;
    s.mean = mean(durations);
    s.population_stddev = population_stddev(durations);
    s.count = durations.size();
    s.filtered_out = 0;
    return s;
}

} // namespace bbench
