#include "bbench/harness.hpp"

#include "bbench/clock.hpp"
#include "bbench/envs.hpp"
#include "bbench/errors.hpp"

#include <atomic>
#include <unistd.h>

namespace bbench {

namespace {

const LinearSystem& registered_system(const std::string& system_id) {
    const auto& systems = builtin_systems();
    const auto it = systems.find(system_id);
    if (it == systems.end()) throw ConfigError("unknown system_id: " + system_id);
    return it->second;
}

std::string generate_run_id() {
    static std::atomic<unsigned> sequence{0};
    const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    return "r" + std::to_string(now) + "p" + std::to_string(::getpid()) + "n" +
           std::to_string(sequence.fetch_add(1));
}

Vec subtract(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ContractViolation("vector length mismatch");
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

bool cancelled(const ExperimentConfig& config) {
    return config.cancel && config.cancel->load();
}

} // namespace

Vec chain_rule(const CallRecord* previous, const ExperimentConfig& config) {
    if (previous) return previous->output_vector;
    if (config.initial_guess) return *config.initial_guess;
    return Vec(registered_system(config.system_id).size(), 0.0);
}

AggregateOutcome aggregate(std::span<const CallRecord> records, const FilterConfig& filter,
                           const Vec& ground_truth) {
    if (records.empty()) throw ContractViolation("aggregate of empty record list");

    std::vector<Vec> errors;
    errors.reserve(records.size());
    for (const auto& rec : records) errors.push_back(subtract(rec.output_vector, ground_truth));

    AggregateOutcome out;
    out.partition = confidence_filter(errors, filter);

    std::vector<double> op_durations, comm_durations;
    op_durations.reserve(out.partition.accepted.size());
    comm_durations.reserve(out.partition.accepted.size());
    for (const std::size_t idx : out.partition.accepted) {
        op_durations.push_back(records[idx].operation_duration_s);
        comm_durations.push_back(records[idx].communication_duration_s);
    }

    const std::size_t rejected = out.partition.rejected.size();
    if (op_durations.empty()) {
        out.operation_stats = StatsSummary{{}, {}, 0, rejected};
        out.communication_stats = StatsSummary{{}, {}, 0, rejected};
    } else {
        out.operation_stats = summarize(op_durations);
        out.operation_stats.filtered_out = rejected;
        out.communication_stats = summarize(comm_durations);
        out.communication_stats.filtered_out = rejected;
    }
    out.accuracy =
        static_cast<double>(out.partition.accepted.size()) / static_cast<double>(records.size());
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config_in) {
    ExperimentConfig config = config_in;
    if (config.num_calls < 1) throw ConfigError("num_calls must be >= 1");
    if (config.run_id.empty()) config.run_id = generate_run_id();

    ExperimentResult result;
    result.environment_label = config.environment.label();
    result.run_id = config.run_id;

    const LinearSystem* system = nullptr;
    try {
        system = &registered_system(config.system_id);
        if (!system->known_solution) {
            throw ConfigError("system '" + config.system_id +
                              "' has no ground truth; the confidence filter needs one");
        }
    } catch (const Error& e) {
        result.partial = true;
        result.error = e.what();
        return result;
    }
    const Vec& ground_truth = *system->known_solution;

    try {
        EnvironmentHandle handle = provision(config.environment, config);

        LogWriter log(log_file_path(config.output_dir, result.environment_label, config.run_id));
        result.log_path = log.path();

        // Warmup calls absorb first-touch costs without perturbing the
        // recorded chain: they always start from the configured guess.
        for (std::size_t w = 0; w < config.warmup_calls && !cancelled(config); ++w) {
            WireRequest warm;
            warm.initial_guess = chain_rule(nullptr, config);
            warm.sent_at_unix_ns = wall_clock_unix_ns();
            warm.call_index = 0;
            warm.iterations = static_cast<std::int64_t>(config.iterations_per_call);
            warm.system_id = config.system_id;
            invoke(handle, warm);
        }

        for (std::size_t k = 0; k < config.num_calls; ++k) {
            if (cancelled(config)) {
                result.partial = true;
                result.error = "interrupted";
                break;
            }
            WireRequest req;
            req.initial_guess =
                chain_rule(result.records.empty() ? nullptr : &result.records.back(), config);
            req.sent_at_unix_ns = wall_clock_unix_ns();
            req.call_index = static_cast<std::int64_t>(k);
            req.iterations = static_cast<std::int64_t>(config.iterations_per_call);
            req.system_id = config.system_id;

            CallRecord rec = invoke(handle, req);

            const Vec error_vec = subtract(rec.output_vector, ground_truth);
            const auto verdict = confidence_filter(std::span(&error_vec, 1), config.filter);
            rec.accepted_by_filter = !verdict.accepted.empty();

            log.append(rec); // flushed before the next call begins
            result.records.push_back(std::move(rec));
            if (config.on_record) config.on_record(result.records.back());
        }

        teardown(handle);
    } catch (const Error& e) {
        result.partial = true;
        result.error = e.what();
        // handle destructor already tore children down; partial log stays on disk
    }

    result.total_calls = result.records.size();
    if (!result.records.empty()) {
        const AggregateOutcome agg = aggregate(result.records, config.filter, ground_truth);
        result.operation_stats = agg.operation_stats;
        result.communication_stats = agg.communication_stats;
        result.accuracy = agg.accuracy;
        if (!agg.partition.accepted.empty()) {
            std::vector<double> ops, comms;
            for (const std::size_t idx : agg.partition.accepted) {
                ops.push_back(result.records[idx].operation_duration_s);
                comms.push_back(result.records[idx].communication_duration_s);
            }
            result.operation_median_s = median(ops);
            result.communication_median_s = median(comms);
        }
    }
    return result;
}

std::vector<ExperimentResult> run_matrix(std::span<const ExperimentConfig> configs) {
    if (configs.empty()) throw ConfigError("run_matrix needs at least one experiment");
    std::vector<ExperimentResult> results;
    results.reserve(configs.size());
    // Strictly sequential: concurrent experiments would contend for CPU and
    // corrupt each other's timing.
    for (const auto& config : configs) {
        results.push_back(run_experiment(config));
    }
    return results;
}

std::vector<ExperimentConfig> default_matrix(const ExperimentConfig& base) {
    std::vector<ExperimentConfig> configs;
    for (const auto kind :
         {EnvKind::InProcess, EnvKind::SpawnProcess, EnvKind::PersistentServiceLocal}) {
        ExperimentConfig c = base;
        c.environment = Environment{kind};
        c.run_id.clear();
        configs.push_back(std::move(c));
    }
    ExperimentConfig relay = base;
    relay.environment = Environment{EnvKind::NestedRelay, 5, false};
    relay.run_id.clear();
    configs.push_back(std::move(relay));
    return configs;
}

} // namespace bbench
