#pragma once

#include "bbench/config.hpp"
#include "bbench/process.hpp"
#include "bbench/wire.hpp"

#include <memory>
#include <string>
#include <vector>

namespace bbench {

/// A provisioned boundary configuration. Owns every child it started;
/// destruction tears them all down (teardown is also explicit and idempotent).
class EnvironmentHandle {
public:
    EnvironmentHandle() = default;
    EnvironmentHandle(EnvironmentHandle&&) = default;
    EnvironmentHandle& operator=(EnvironmentHandle&&) = default;
    ~EnvironmentHandle();

    Environment environment;
    std::string endpoint; // URL for HTTP kinds, empty for in-process/spawn kinds
    std::vector<std::unique_ptr<ChildProcess>> children;
    std::vector<std::string> container_ids;
    std::vector<int> ports; // every port this handle's services listen on
    bool ready = false;

    // spawn-kind call template, resolved at provision time
    std::vector<std::string> spawn_argv;

    std::string runtime_cmd;
    std::chrono::milliseconds call_timeout{120'000};
};

/// Starts and health-checks whatever the kind needs. Persistent kinds are
/// ready on return; spawn kinds defer child creation to invoke(). Throws
/// CapabilityError when a required runtime is missing (never a silent
/// fallback) and ProvisionError on startup trouble, with captured child
/// output attached.
EnvironmentHandle provision(const Environment& environment, const ExperimentConfig& config);

/// Executes one workload call inside the boundary and measures it: round trip
/// on the client monotonic clock, operation interval as reported by the
/// worker, communication = round trip - operation.
CallRecord invoke(EnvironmentHandle& handle, const WireRequest& request);

/// Terminates and reaps every child the handle started. Idempotent; failures
/// degrade to warnings on stderr and never mask experiment results.
void teardown(EnvironmentHandle& handle);

} // namespace bbench
