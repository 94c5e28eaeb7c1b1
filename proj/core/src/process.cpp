#include "bbench/process.hpp"

#include "bbench/errors.hpp"

#include <arpa/inet.h>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <mutex>
#include <netinet/in.h>
#include <poll.h>
#include <sstream>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>

namespace bbench {

namespace {

// A dying reader must surface as a write error, not kill the harness.
void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });
}

std::vector<char*> make_argv(const std::vector<std::string>& argv) {
    std::vector<char*> raw;
    raw.reserve(argv.size() + 1);
    for (const auto& a : argv) raw.push_back(const_cast<char*>(a.c_str()));
    raw.push_back(nullptr);
    return raw;
}

void set_cloexec(int fd) { ::fcntl(fd, F_SETFD, FD_CLOEXEC); }

std::filesystem::path fresh_capture_path() {
    static std::atomic<unsigned> counter{0};
    std::ostringstream name;
    name << "bbench-child-" << ::getpid() << '-' << counter.fetch_add(1) << ".log";
    return std::filesystem::temp_directory_path() / name.str();
}

int wait_exit_code(pid_t pid) {
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR) return -1;
    }
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
    return -1;
}

} // namespace

SpawnResult run_child(const std::vector<std::string>& argv, std::string_view stdin_data,
                      std::chrono::milliseconds timeout) {
    if (argv.empty()) throw ContractViolation("empty argv");
    ignore_sigpipe_once();

    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (::pipe(in_pipe) < 0 || ::pipe(out_pipe) < 0 || ::pipe(err_pipe) < 0) {
        throw Error("pipe() failed: " + std::string(std::strerror(errno)));
    }

    const pid_t pid = ::fork();
    if (pid < 0) throw Error("fork() failed: " + std::string(std::strerror(errno)));
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
            ::close(fd);
        auto raw = make_argv(argv);
        ::execvp(raw[0], raw.data());
        ::fprintf(stderr, "exec failed for %s: %s\n", raw[0], std::strerror(errno));
        ::_exit(127);
    }

    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    set_cloexec(in_pipe[1]);
    set_cloexec(out_pipe[0]);
    set_cloexec(err_pipe[0]);
    ::fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
    ::fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
    ::fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    SpawnResult result;
    std::size_t written = 0;
    bool stdin_open = true;
    bool out_open = true;
    bool err_open = true;
    const auto deadline = std::chrono::steady_clock::now() + timeout;

    while (out_open || err_open || stdin_open) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            ::kill(pid, SIGKILL);
            result.timed_out = true;
            break;
        }
        const int wait_ms = static_cast<int>(std::min<std::int64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count(), 200));

        struct pollfd fds[3];
        nfds_t nfds = 0;
        int out_idx = -1, err_idx = -1, in_idx = -1;
        if (out_open) {
            out_idx = nfds;
            fds[nfds++] = {out_pipe[0], POLLIN, 0};
        }
        if (err_open) {
            err_idx = nfds;
            fds[nfds++] = {err_pipe[0], POLLIN, 0};
        }
        if (stdin_open) {
            in_idx = nfds;
            fds[nfds++] = {in_pipe[1], POLLOUT, 0};
        }
        const int rc = ::poll(fds, nfds, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }

        char buf[4096];
        if (out_idx >= 0 && (fds[out_idx].revents & (POLLIN | POLLHUP))) {
            const ssize_t n = ::read(out_pipe[0], buf, sizeof(buf));
            if (n > 0) {
                result.out.append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || (n < 0 && errno != EAGAIN)) {
                out_open = false;
            }
        }
        if (err_idx >= 0 && (fds[err_idx].revents & (POLLIN | POLLHUP))) {
            const ssize_t n = ::read(err_pipe[0], buf, sizeof(buf));
            if (n > 0) {
                result.err.append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || (n < 0 && errno != EAGAIN)) {
                err_open = false;
            }
        }
        if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (written >= stdin_data.size() || (fds[in_idx].revents & (POLLERR | POLLHUP))) {
                ::close(in_pipe[1]);
                stdin_open = false;
            } else {
                const ssize_t n = ::write(in_pipe[1], stdin_data.data() + written,
                                          stdin_data.size() - written);
                if (n > 0) {
                    written += static_cast<std::size_t>(n);
                    if (written >= stdin_data.size()) {
                        ::close(in_pipe[1]);
                        stdin_open = false;
                    }
                } else if (n < 0 && errno != EAGAIN) {
                    ::close(in_pipe[1]);
                    stdin_open = false;
                }
            }
        }
    }

    if (stdin_open) ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(err_pipe[0]);
    result.exit_code = wait_exit_code(pid);
    return result;
}

ChildProcess::ChildProcess(ChildProcess&& other) noexcept
    : pid_(other.pid_), reaped_(other.reaped_), capture_path_(std::move(other.capture_path_)) {
    other.pid_ = -1;
    other.reaped_ = true;
}

ChildProcess& ChildProcess::operator=(ChildProcess&& other) noexcept {
    if (this != &other) {
        terminate();
        pid_ = other.pid_;
        reaped_ = other.reaped_;
        capture_path_ = std::move(other.capture_path_);
        other.pid_ = -1;
        other.reaped_ = true;
    }
    return *this;
}

ChildProcess::~ChildProcess() { terminate(); }

ChildProcess ChildProcess::start(const std::vector<std::string>& argv) {
    if (argv.empty()) throw ContractViolation("empty argv");
    ignore_sigpipe_once();

    ChildProcess child;
    child.capture_path_ = fresh_capture_path();
    const int capture_fd = ::open(child.capture_path_.c_str(),
                                  O_WRONLY | O_CREAT | O_TRUNC | O_APPEND, 0600);
    if (capture_fd < 0) throw Error("cannot open capture file: " + child.capture_path_.string());

    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(capture_fd);
        throw Error("fork() failed: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        const int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        ::dup2(capture_fd, STDOUT_FILENO);
        ::dup2(capture_fd, STDERR_FILENO);
        ::close(capture_fd);
        auto raw = make_argv(argv);
        ::execvp(raw[0], raw.data());
        ::fprintf(stderr, "exec failed for %s: %s\n", raw[0], std::strerror(errno));
        ::_exit(127);
    }

    ::close(capture_fd);
    child.pid_ = pid;
    child.reaped_ = false;
    return child;
}

bool ChildProcess::running() {
    if (reaped_ || pid_ < 0) return false;
    int status = 0;
    const pid_t rc = ::waitpid(pid_, &status, WNOHANG);
    if (rc == pid_) {
        reaped_ = true;
        return false;
    }
    return rc == 0;
}

void ChildProcess::terminate(std::chrono::milliseconds grace) {
    if (reaped_ || pid_ < 0) return;
    ::kill(pid_, SIGTERM);
    const auto deadline = std::chrono::steady_clock::now() + grace;
    int status = 0;
    while (std::chrono::steady_clock::now() < deadline) {
        const pid_t rc = ::waitpid(pid_, &status, WNOHANG);
        if (rc == pid_) {
            reaped_ = true;
            return;
        }
        ::usleep(10'000);
    }
    ::kill(pid_, SIGKILL);
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
    reaped_ = true;
}

std::string ChildProcess::captured_output() const {
    std::ifstream in(capture_path_);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool command_on_path(std::string_view command) {
    if (command.empty()) return false;
    const std::string cmd(command);
    if (cmd.find('/') != std::string::npos) {
        return ::access(cmd.c_str(), X_OK) == 0;
    }
    const char* path = std::getenv("PATH");
    if (!path) return false;
    std::istringstream dirs(path);
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
        if (dir.empty()) continue;
        const std::string candidate = dir + "/" + cmd;
        if (::access(candidate.c_str(), X_OK) == 0) return true;
    }
    return false;
}

int pick_free_port() {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = ::htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        ::close(fd);
        throw Error("bind() failed while picking a free port");
    }
    socklen_t len = sizeof(addr);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) < 0) {
        ::close(fd);
        throw Error("getsockname() failed");
    }
    const int port = ::ntohs(addr.sin_port);
    ::close(fd);
    return port;
}

std::filesystem::path current_executable_dir() {
    std::error_code ec;
    const auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (ec) return std::filesystem::current_path();
    return exe.parent_path();
}

} // namespace bbench
