#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

namespace bbench {

/// Outcome of a run-to-completion child (spawn-kind workload call).
struct SpawnResult {
    int exit_code = -1;
    std::string out;
    std::string err;
    bool timed_out = false;
};

/// Runs argv with `stdin_data` piped to its standard input and both output
/// streams captured. On timeout the child is killed and reaped; the caller
/// never leaks a zombie.
SpawnResult run_child(const std::vector<std::string>& argv, std::string_view stdin_data,
                      std::chrono::milliseconds timeout);

/// A long-lived service child. stdout/stderr are redirected to a capture file
/// so a wedged pipe can never block the child. Termination is idempotent and
/// reaps exactly once.
class ChildProcess {
public:
    ChildProcess() = default;
    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;
    ChildProcess(ChildProcess&& other) noexcept;
    ChildProcess& operator=(ChildProcess&& other) noexcept;
    ~ChildProcess();

    static ChildProcess start(const std::vector<std::string>& argv);

    pid_t pid() const { return pid_; }
    bool running();

    /// SIGTERM, grace wait, then SIGKILL; always reaps. Safe to call twice.
    void terminate(std::chrono::milliseconds grace = std::chrono::milliseconds(2000));

    /// Captured stdout+stderr so far (for startup-failure diagnostics).
    std::string captured_output() const;

private:
    pid_t pid_ = -1;
    bool reaped_ = true;
    std::filesystem::path capture_path_;
};

bool command_on_path(std::string_view command);

/// Binds 127.0.0.1:0, records the OS-assigned port, closes the socket.
int pick_free_port();

/// Directory containing the running executable (via /proc/self/exe).
std::filesystem::path current_executable_dir();

} // namespace bbench
