#pragma once

#include "bbench/linsolve.hpp"
#include "bbench/stats.hpp"
#include "bbench/wire.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bbench {

enum class EnvKind {
    InProcess,
    SpawnProcess,
    SpawnContainer,
    PersistentServiceLocal,
    PersistentServiceContainer,
    NestedRelay,
};

/// One boundary configuration a workload call can run inside.
struct Environment {
    EnvKind kind = EnvKind::InProcess;
    int relay_depth = 1;        // NestedRelay only; depth 5 is the headline scenario
    bool containerized = false; // NestedRelay only

    std::string label() const;

    friend bool operator==(const Environment&, const Environment&) = default;
};

/// Parses CLI names: in-process, spawn-process, spawn-container, service-local,
/// service-container, nested-relay, nested-relay-container.
Environment parse_environment(std::string_view name, int depth = 1);

struct ExperimentConfig {
    Environment environment;
    std::size_t num_calls = 100;
    std::size_t iterations_per_call = 2500;
    std::string system_id = "bench5";
    std::optional<Vec> initial_guess; // absent = zero vector
    FilterConfig filter;
    std::filesystem::path output_dir = "bbench-logs";
    std::string run_id;            // empty = generated
    std::size_t warmup_calls = 0;  // timed out of band, never recorded

    // environment plumbing
    std::string runtime_cmd = "docker";
    std::string image;
    int port_base = 0; // 0 = OS-assigned ephemeral ports
    std::chrono::milliseconds call_timeout{120'000};
    std::chrono::milliseconds health_timeout{30'000};
    std::vector<std::string> worker_cmd; // empty = <exe dir>/bbench-worker
    std::vector<std::string> serve_cmd;  // empty = <exe dir>/bbench serve

    const std::atomic<bool>* cancel = nullptr;
    std::function<void(const CallRecord&)> on_record; // progress hook
};

} // namespace bbench
