#include "bbench/service.hpp"

#include "bbench/clock.hpp"
#include "bbench/errors.hpp"
#include "http_url.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <mutex>
#include <thread>

namespace bbench {

namespace {

using nlohmann::json;
using detail::ParsedUrl;
using detail::parse_url;

void set_json(httplib::Response& res, int status, const std::string& body) {
    res.status = status;
    res.set_content(body, "application/json");
}

void set_error(httplib::Response& res, int status, const std::string& message,
               const json& extra = json::object()) {
    json body = extra;
    body["error"] = message;
    set_json(res, status, body.dump());
}

} // namespace

WireResponse solve_request(const WireRequest& req,
                           const std::map<std::string, LinearSystem>& systems,
                           const std::string& worker_id, std::int64_t received_at_unix_ns) {
    const auto it = systems.find(req.system_id);
    if (it == systems.end()) throw ConfigError("unknown system_id: " + req.system_id);
    const LinearSystem& system = it->second;
    if (req.initial_guess.size() != system.size()) {
        throw ContractViolation("initial_guess length " + std::to_string(req.initial_guess.size()) +
                                " does not match system size " + std::to_string(system.size()));
    }

    WireResponse resp;
    resp.received_at_unix_ns = received_at_unix_ns;
    resp.worker_id = worker_id;
    resp.op_start_unix_ns = wall_clock_unix_ns();
    SolveOutcome outcome =
        gauss_seidel_solve(system, req.initial_guess, static_cast<std::size_t>(req.iterations));
    resp.op_end_unix_ns = wall_clock_unix_ns();
    resp.result = std::move(outcome.solution);
    return resp;
}

struct WorkloadService::Impl {
    explicit Impl(ServiceConfig cfg) : config(std::move(cfg)) {
        if (config.registered_systems.empty()) config.registered_systems = builtin_systems();
        if (config.mode == ServiceMode::Relay) {
            next_hop = parse_url(config.next_hop_url);
            forward_client = std::make_unique<httplib::Client>(next_hop.host, next_hop.port);
            forward_client->set_keep_alive(true);
            forward_client->set_connection_timeout(5, 0);
            forward_client->set_read_timeout(300, 0);
        }
        install_routes();
    }

    void install_routes() {
        server.Post("/solve", [this](const httplib::Request& q, httplib::Response& s) {
            handle_post(q, s);
        });
        server.Post("/relay", [this](const httplib::Request& q, httplib::Response& s) {
            handle_post(q, s);
        });
        server.Get("/healthz", [this](const httplib::Request&, httplib::Response& s) {
            handle_health(s);
        });
    }

    void handle_post(const httplib::Request& req, httplib::Response& res) {
        std::unique_lock lane(lane_mutex, std::try_to_lock);
        if (!lane.owns_lock()) {
            set_error(res, 503, "busy: one request in flight");
            return;
        }
        struct InFlightGuard {
            std::atomic<bool>& flag;
            ~InFlightGuard() { flag.store(false); }
        } guard{in_flight};
        in_flight.store(true);
        if (config.mode == ServiceMode::Relay) {
            forward(req, res);
        } else {
            if (req.path == "/relay") {
                set_error(res, 400, "service is not in relay mode");
            } else {
                solve(req, res);
            }
        }
    }

    void solve(const httplib::Request& req, httplib::Response& res) {
        const std::int64_t received_at = wall_clock_unix_ns();
        WireRequest wire_req;
        try {
            wire_req = decode_request(req.body);
        } catch (const ParseError& e) {
            set_error(res, 400, e.what());
            return;
        }
        try {
            const WireResponse resp =
                solve_request(wire_req, config.registered_systems, config.worker_id, received_at);
            set_json(res, 200, encode_response(resp));
        } catch (const ConfigError& e) {
            set_error(res, 404, e.what());
        } catch (const DivergenceError& e) {
            set_error(res, 422, e.what(), json{{"iteration", e.iteration}});
        } catch (const ContractViolation& e) {
            set_error(res, 400, e.what());
        } catch (const Error& e) {
            set_error(res, 500, e.what());
        }
    }

    // Request body goes downstream byte-for-byte; the response only gains this
    // hop's worker_id at the front of relay_path (request-path order), keeping
    // the innermost op_start/op_end untouched.
    void forward(const httplib::Request& req, httplib::Response& res) {
        const auto downstream = forward_client->Post(next_hop.path, req.body, "application/json");
        if (!downstream) {
            set_error(res, 502, "next hop unreachable",
                      json{{"hop", config.worker_id}, {"next_hop", config.next_hop_url}});
            return;
        }
        if (downstream->status == 200) {
            try {
                WireResponse resp = decode_response(downstream->body);
                resp.relay_path.insert(resp.relay_path.begin(), config.worker_id);
                set_json(res, 200, encode_response(resp));
            } catch (const ParseError&) {
                set_json(res, downstream->status, downstream->body);
            }
            return;
        }
        // Downstream error: propagate status and body with this hop recorded.
        try {
            json body = json::parse(downstream->body);
            if (body.is_object()) {
                json path = body.value("relay_path", json::array());
                path.insert(path.begin(), config.worker_id);
                body["relay_path"] = path;
                set_json(res, downstream->status, body.dump());
                return;
            }
        } catch (const json::parse_error&) {
        }
        set_json(res, downstream->status, downstream->body);
    }

    void handle_health(httplib::Response& res) {
        json body;
        body["ready"] = true;
        body["mode"] = config.mode == ServiceMode::Relay ? "relay" : "solve";
        body["worker_id"] = config.worker_id;
        body["busy"] = in_flight.load();
        json systems = json::array();
        if (config.mode == ServiceMode::Solve) {
            for (const auto& [id, _] : config.registered_systems) systems.push_back(id);
        } else {
            httplib::Client probe(next_hop.host, next_hop.port);
            probe.set_connection_timeout(2, 0);
            probe.set_read_timeout(2, 0);
            const auto r = probe.Get("/healthz");
            bool downstream_ready = false;
            if (r && r->status == 200) {
                try {
                    downstream_ready = json::parse(r->body).value("ready", false);
                } catch (const json::parse_error&) {
                }
            }
            body["ready"] = downstream_ready;
        }
        body["systems"] = systems;
        set_json(res, 200, body.dump());
    }

    ServiceConfig config;
    ParsedUrl next_hop;
    std::unique_ptr<httplib::Client> forward_client;
    httplib::Server server;
    std::thread server_thread;
    std::mutex lane_mutex;
    std::atomic<bool> in_flight{false};
    int bound_port = 0;
};

WorkloadService::WorkloadService(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

WorkloadService::~WorkloadService() { stop(); }

bool WorkloadService::start() {
    auto& im = *impl_;
    if (im.config.listen_port == 0) {
        const int port = im.server.bind_to_any_port(im.config.bind_host);
        if (port <= 0) return false;
        im.bound_port = port;
    } else {
        if (!im.server.bind_to_port(im.config.bind_host, im.config.listen_port)) return false;
        im.bound_port = im.config.listen_port;
    }
    im.server_thread = std::thread([&im] { im.server.listen_after_bind(); });
    while (!im.server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    return true;
}

void WorkloadService::stop() {
    if (!impl_) return;
    auto& im = *impl_;
    if (im.server_thread.joinable()) {
        im.server.stop();
        im.server_thread.join();
    }
}

int WorkloadService::port() const { return impl_->bound_port; }

const ServiceConfig& WorkloadService::config() const { return impl_->config; }

} // namespace bbench
