// Spawn-kind workload child: request JSON on stdin, response JSON on stdout,
// logs on stderr, exit 0 on success.

#include "bbench/clock.hpp"
#include "bbench/errors.hpp"
#include "bbench/service.hpp"
#include "bbench/wire.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <unistd.h>

int main() {
    std::ostringstream input;
    input << std::cin.rdbuf();
    const std::int64_t received_at = bbench::wall_clock_unix_ns();

    std::string worker_id;
    if (const char* from_env = std::getenv("BB_WORKER_ID")) {
        worker_id = from_env;
    } else {
        worker_id = "worker-" + std::to_string(::getpid());
    }

    try {
        const bbench::WireRequest req = bbench::decode_request(input.str());
        const bbench::WireResponse resp =
            bbench::solve_request(req, bbench::builtin_systems(), worker_id, received_at);
        std::cout << bbench::encode_response(resp);
        std::cout.flush();
        return 0;
    } catch (const bbench::Error& e) {
        std::cerr << "bbench-worker: " << e.what() << "\n";
        return 1;
    }
}
