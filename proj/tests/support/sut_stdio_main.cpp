// Line-protocol SUT used by harness and CLI tests. The mode argument picks
// a behavior: a well-behaved evaluator, or one of several failure modes.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "mlcert/sut.hpp"
#include "mlcert/synthetic_vbl.hpp"

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "synthetic";
    int remaining_before_crash = argc > 2 ? std::atoi(argv[2]) : 2;

    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) {
            continue;
        }
        const mlcert::EvalRequest request = mlcert::parse_request(line);
        mlcert::EvalResponse response;
        response.id = request.id;

        if (mode == "hang") {
            std::this_thread::sleep_for(std::chrono::seconds(600));
            return 0;
        }
        if (mode == "garbage") {
            std::cout << "not json at all\n" << std::flush;
            continue;
        }
        if (mode == "wrong-id") {
            response.id = request.id + 1;
            std::cout << mlcert::serialize_response(response) << '\n' << std::flush;
            continue;
        }
        if (mode == "crash-after") {
            if (remaining_before_crash-- <= 0) {
                return 3;
            }
            response.failure = false;
            std::cout << mlcert::serialize_response(response) << '\n' << std::flush;
            continue;
        }

        mlcert::OddPoint point;
        for (const auto& [name, value] : request.params) {
            point.set(name, value);
        }
        if (mode == "echo-d") {
            const double d = point.at(mlcert::kDistanceDimension);
            response.failure = d > 0.0;
            response.severity = d;
        } else { // synthetic
            const auto [failure, severity] = mlcert::synthetic_vbl(point);
            response.failure = failure;
            response.severity = severity;
        }
        std::cout << mlcert::serialize_response(response) << '\n' << std::flush;
    }
    return 0;
}
