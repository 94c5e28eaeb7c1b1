#pragma once

#include "bbench/linsolve.hpp"
#include "bbench/wire.hpp"

#include <map>
#include <memory>
#include <string>

namespace bbench {

enum class ServiceMode { Solve, Relay };

struct ServiceConfig {
    int listen_port = 0; // 0 = pick any free port
    ServiceMode mode = ServiceMode::Solve;
    std::string next_hop_url; // required iff mode == Relay
    std::map<std::string, LinearSystem> registered_systems;
    std::string worker_id = "worker";
    std::string bind_host = "127.0.0.1";
};

/// Pure solve handler shared by the HTTP service and the stdin/stdout worker.
/// `received_at_unix_ns` is the ingress timestamp; op_start/op_end bracket
/// only the iteration loop.
WireResponse solve_request(const WireRequest& req,
                           const std::map<std::string, LinearSystem>& systems,
                           const std::string& worker_id, std::int64_t received_at_unix_ns);

/// Long-lived workload process endpoint. Exposes POST /solve, POST /relay and
/// GET /healthz. POST handlers are strictly serial: one request in flight,
/// concurrent arrivals get a busy rejection instead of queueing.
class WorkloadService {
public:
    explicit WorkloadService(ServiceConfig config);
    ~WorkloadService();
    WorkloadService(const WorkloadService&) = delete;
    WorkloadService& operator=(const WorkloadService&) = delete;

    /// Binds and serves on a background thread. Returns false on bind failure.
    bool start();
    void stop();

    /// Actual listen port (meaningful after a successful start()).
    int port() const;
    const ServiceConfig& config() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace bbench
