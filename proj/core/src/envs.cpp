#include "bbench/envs.hpp"

#include "bbench/clock.hpp"
#include "bbench/errors.hpp"
#include "bbench/service.hpp"
#include "http_url.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <thread>

namespace bbench {

namespace {

using nlohmann::json;

std::string runtime_or_default(const ExperimentConfig& config) {
    return config.runtime_cmd.empty() ? "docker" : config.runtime_cmd;
}

void require_runtime(const std::string& runtime) {
    if (!command_on_path(runtime)) {
        throw CapabilityError("container runtime '" + runtime +
                              "' not found on PATH; install it or pass --runtime-cmd");
    }
}

void require_image(const ExperimentConfig& config) {
    if (config.image.empty()) {
        throw ConfigError("container environments need an image name (--image)");
    }
}

std::vector<std::string> worker_argv(const ExperimentConfig& config) {
    if (!config.worker_cmd.empty()) return config.worker_cmd;
    return {(current_executable_dir() / "bbench-worker").string()};
}

std::vector<std::string> serve_argv(const ExperimentConfig& config) {
    if (!config.serve_cmd.empty()) return config.serve_cmd;
    return {(current_executable_dir() / "bbench").string(), "serve"};
}

std::string run_tag(const ExperimentConfig& config) {
    return config.run_id.empty() ? "adhoc" : config.run_id;
}

int allocate_port(const ExperimentConfig& config, int& sequence) {
    if (config.port_base > 0) return config.port_base + sequence++;
    return pick_free_port();
}

bool health_ready(int port) {
    httplib::Client cli("127.0.0.1", port);
    cli.set_connection_timeout(1, 0);
    cli.set_read_timeout(2, 0);
    const auto res = cli.Get("/healthz");
    if (!res || res->status != 200) return false;
    try {
        return json::parse(res->body).value("ready", false);
    } catch (const json::parse_error&) {
        return false;
    }
}

// Gate measurement on readiness so startup never bleeds into the first call's
// communication duration.
void await_ready(ChildProcess* child, int port, const ExperimentConfig& config,
                 const std::string& what) {
    const auto deadline = std::chrono::steady_clock::now() + config.health_timeout;
    while (std::chrono::steady_clock::now() < deadline) {
        if (child && !child->running()) {
            throw ProvisionError(what + " exited during startup; output:\n" +
                                 child->captured_output());
        }
        if (health_ready(port)) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
    std::string detail = child ? child->captured_output() : std::string{};
    throw ProvisionError("health-check timeout for " + what +
                         (detail.empty() ? "" : "; output:\n" + detail));
}

void start_local_service(EnvironmentHandle& handle, const ExperimentConfig& config, int port,
                         ServiceMode mode, const std::string& worker_id,
                         const std::string& next_hop_url) {
    auto argv = serve_argv(config);
    argv.insert(argv.end(), {"--port", std::to_string(port), "--worker-id", worker_id});
    argv.insert(argv.end(), {"--mode", mode == ServiceMode::Relay ? "relay" : "solve"});
    if (mode == ServiceMode::Relay) {
        argv.insert(argv.end(), {"--next-hop", next_hop_url});
    }
    auto child = std::make_unique<ChildProcess>(ChildProcess::start(argv));
    ChildProcess* raw = child.get();
    handle.children.push_back(std::move(child));
    handle.ports.push_back(port);
    await_ready(raw, port, config, worker_id);
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
}

void start_container_service(EnvironmentHandle& handle, const ExperimentConfig& config, int port,
                             ServiceMode mode, const std::string& worker_id,
                             const std::string& next_hop_url, bool host_network) {
    std::vector<std::string> argv = {handle.runtime_cmd, "run", "-d"};
    if (host_network) {
        // Relay hops must reach each other over loopback; published ports would
        // leave them isolated in per-container namespaces.
        argv.insert(argv.end(), {"--network", "host"});
    } else {
        argv.insert(argv.end(), {"-p", std::to_string(port) + ":" + std::to_string(port)});
    }
    argv.push_back(config.image);
    argv.insert(argv.end(), {"serve", "--port", std::to_string(port), "--host", "0.0.0.0",
                             "--worker-id", worker_id, "--mode",
                             mode == ServiceMode::Relay ? "relay" : "solve"});
    if (mode == ServiceMode::Relay) {
        argv.insert(argv.end(), {"--next-hop", next_hop_url});
    }
    const SpawnResult r = run_child(argv, {}, std::chrono::milliseconds(30'000));
    if (r.timed_out || r.exit_code != 0) {
        throw ProvisionError("container start failed (exit " + std::to_string(r.exit_code) +
                             "): " + r.err);
    }
    handle.container_ids.push_back(trim(r.out));
    handle.ports.push_back(port);
    await_ready(nullptr, port, config, worker_id);
}

CallRecord finish_record(const EnvironmentHandle& handle, const WireRequest& request,
                         const WireResponse& response, double round_trip_s) {
    CallRecord rec;
    rec.call_index = request.call_index;
    rec.environment_label = handle.environment.label();
    rec.operation_duration_s = ns_to_seconds(response.op_end_unix_ns - response.op_start_unix_ns);
    rec.round_trip_s = round_trip_s;
    rec.communication_duration_s = rec.round_trip_s - rec.operation_duration_s;
    rec.input_vector = request.initial_guess;
    rec.output_vector = response.result;
    rec.sent_at_unix_ns = request.sent_at_unix_ns;
    rec.worker_id = response.worker_id;
    return rec;
}

CallRecord invoke_in_process(EnvironmentHandle& handle, const WireRequest& request) {
    const StopWatch watch;
    const WireResponse response =
        solve_request(request, builtin_systems(), "in-process", wall_clock_unix_ns());
    const double round = watch.seconds();
    return finish_record(handle, request, response, round);
}

CallRecord invoke_spawn(EnvironmentHandle& handle, const WireRequest& request) {
    const std::string body = encode_request(request);
    const StopWatch watch;
    const SpawnResult r = run_child(handle.spawn_argv, body, handle.call_timeout);
    const double round = watch.seconds();
    if (r.timed_out) {
        throw TimeoutError("workload child timed out after " +
                           std::to_string(handle.call_timeout.count()) + " ms");
    }
    if (r.exit_code != 0) {
        throw EnvironmentError("workload child exited with code " + std::to_string(r.exit_code) +
                               "; stderr:\n" + r.err);
    }
    WireResponse response;
    try {
        response = decode_response(r.out);
    } catch (const ParseError& e) {
        throw ParseError(std::string("bad child response: ") + e.what(), e.field);
    }
    return finish_record(handle, request, response, round);
}

CallRecord invoke_http(EnvironmentHandle& handle, const WireRequest& request) {
    const auto url = detail::parse_url(handle.endpoint);
    const std::string body = encode_request(request);

    // A fresh client per call: each call pays the full boundary crossing,
    // connection setup included, exactly like a per-call HTTP caller would.
    httplib::Client cli(url.host, url.port);
    const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(handle.call_timeout);
    cli.set_connection_timeout(timeout_s.count(), 0);
    cli.set_read_timeout(timeout_s.count(), 0);

    const StopWatch watch;
    const auto res = cli.Post(url.path, body, "application/json");
    const double round = watch.seconds();

    if (!res) {
        throw EnvironmentError("no response from " + handle.endpoint + ": " +
                               httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw EnvironmentError("HTTP " + std::to_string(res->status) + " from " + handle.endpoint +
                               ": " + res->body);
    }
    WireResponse response;
    try {
        response = decode_response(res->body);
    } catch (const ParseError& e) {
        throw ParseError(std::string("bad service response: ") + e.what(), e.field);
    }
    return finish_record(handle, request, response, round);
}

} // namespace

std::string Environment::label() const {
    switch (kind) {
    case EnvKind::InProcess: return "in-process";
    case EnvKind::SpawnProcess: return "spawn-process";
    case EnvKind::SpawnContainer: return "spawn-container";
    case EnvKind::PersistentServiceLocal: return "service-local";
    case EnvKind::PersistentServiceContainer: return "service-container";
    case EnvKind::NestedRelay:
        return (containerized ? std::string("nested-relay-container-") : std::string("nested-relay-")) +
               std::to_string(relay_depth);
    }
    return "unknown";
}

Environment parse_environment(std::string_view name, int depth) {
    Environment env;
    env.relay_depth = depth;
    if (name == "in-process") {
        env.kind = EnvKind::InProcess;
    } else if (name == "spawn-process") {
        env.kind = EnvKind::SpawnProcess;
    } else if (name == "spawn-container") {
        env.kind = EnvKind::SpawnContainer;
    } else if (name == "service-local") {
        env.kind = EnvKind::PersistentServiceLocal;
    } else if (name == "service-container") {
        env.kind = EnvKind::PersistentServiceContainer;
    } else if (name == "nested-relay") {
        env.kind = EnvKind::NestedRelay;
    } else if (name == "nested-relay-container") {
        env.kind = EnvKind::NestedRelay;
        env.containerized = true;
    } else {
        throw ConfigError("unknown environment: " + std::string(name));
    }
    if (env.kind == EnvKind::NestedRelay && env.relay_depth < 1) {
        throw ConfigError("relay depth must be >= 1");
    }
    return env;
}

EnvironmentHandle::~EnvironmentHandle() { teardown(*this); }

EnvironmentHandle provision(const Environment& environment, const ExperimentConfig& config) {
    EnvironmentHandle handle;
    handle.environment = environment;
    handle.call_timeout = config.call_timeout;
    handle.runtime_cmd = runtime_or_default(config);
    const std::string tag = run_tag(config);
    int port_sequence = 0;

    switch (environment.kind) {
    case EnvKind::InProcess:
        handle.endpoint = "in-process";
        break;

    case EnvKind::SpawnProcess: {
        auto argv = worker_argv(config);
        if (!command_on_path(argv.front())) {
            throw CapabilityError("workload worker binary not found: " + argv.front());
        }
        handle.spawn_argv = std::move(argv);
        break;
    }

    case EnvKind::SpawnContainer: {
        require_runtime(handle.runtime_cmd);
        require_image(config);
        handle.spawn_argv = {handle.runtime_cmd, "run", "--rm", "-i", config.image};
        break;
    }

    case EnvKind::PersistentServiceLocal: {
        const int port = allocate_port(config, port_sequence);
        start_local_service(handle, config, port, ServiceMode::Solve, tag + "-svc", {});
        handle.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/solve";
        break;
    }

    case EnvKind::PersistentServiceContainer: {
        require_runtime(handle.runtime_cmd);
        require_image(config);
        const int port = allocate_port(config, port_sequence);
        start_container_service(handle, config, port, ServiceMode::Solve, tag + "-svc", {},
                                /*host_network=*/false);
        handle.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/solve";
        break;
    }

    case EnvKind::NestedRelay: {
        if (environment.containerized) {
            require_runtime(handle.runtime_cmd);
            require_image(config);
        }
        // Innermost-first: solver, then relays from the innermost hop outward.
        const int solver_port = allocate_port(config, port_sequence);
        if (environment.containerized) {
            start_container_service(handle, config, solver_port, ServiceMode::Solve, tag + "-solve",
                                    {}, /*host_network=*/true);
        } else {
            start_local_service(handle, config, solver_port, ServiceMode::Solve, tag + "-solve", {});
        }
        std::string next_url = "http://127.0.0.1:" + std::to_string(solver_port) + "/solve";
        for (int hop = environment.relay_depth; hop >= 1; --hop) {
            const int port = allocate_port(config, port_sequence);
            const std::string worker_id = tag + "-relay" + std::to_string(hop);
            if (environment.containerized) {
                start_container_service(handle, config, port, ServiceMode::Relay, worker_id,
                                        next_url, /*host_network=*/true);
            } else {
                start_local_service(handle, config, port, ServiceMode::Relay, worker_id, next_url);
            }
            next_url = "http://127.0.0.1:" + std::to_string(port) + "/relay";
        }
        handle.endpoint = next_url;
        break;
    }
    }

    handle.ready = true;
    return handle;
}

CallRecord invoke(EnvironmentHandle& handle, const WireRequest& request) {
    if (!handle.ready) throw ContractViolation("invoke on a torn-down or unprovisioned handle");
    switch (handle.environment.kind) {
    case EnvKind::InProcess:
        return invoke_in_process(handle, request);
    case EnvKind::SpawnProcess:
    case EnvKind::SpawnContainer:
        return invoke_spawn(handle, request);
    case EnvKind::PersistentServiceLocal:
    case EnvKind::PersistentServiceContainer:
    case EnvKind::NestedRelay:
        return invoke_http(handle, request);
    }
    throw ContractViolation("unreachable environment kind");
}

void teardown(EnvironmentHandle& handle) {
    for (const auto& id : handle.container_ids) {
        const SpawnResult r = run_child({handle.runtime_cmd, "rm", "-f", id}, {},
                                        std::chrono::milliseconds(15'000));
        if (r.timed_out || r.exit_code != 0) {
            std::fprintf(stderr, "warning: failed to remove container %s: %s\n", id.c_str(),
                         r.err.c_str());
        }
    }
    handle.container_ids.clear();
    // Outermost hop went up last; take it down first.
    for (auto it = handle.children.rbegin(); it != handle.children.rend(); ++it) {
        if (*it) (*it)->terminate();
    }
    handle.children.clear();
    handle.ready = false;
}

} // namespace bbench
