#include "mlcert/sut.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

namespace mlcert {

namespace {

nlohmann::json parse_line(std::string_view line, const char* what) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ProtocolError(std::string("malformed ") + what + " line: " + std::string(line));
    }
    return j;
}

} // namespace

std::string serialize_request(const EvalRequest& request) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, value] : request.params) {
        params[name] = value;
    }
    return nlohmann::json{{"id", request.id}, {"params", std::move(params)}}.dump();
}

EvalRequest parse_request(std::string_view line) {
    const nlohmann::json j = parse_line(line, "request");
    if (!j.contains("id") || !j["id"].is_number_integer() || !j.contains("params") ||
        !j["params"].is_object()) {
        throw ProtocolError("request line needs integer 'id' and object 'params': " +
                            std::string(line));
    }
    EvalRequest request;
    request.id = j["id"].get<std::int64_t>();
    for (const auto& [name, value] : j["params"].items()) {
        if (!value.is_number()) {
            throw ProtocolError("request parameter '" + name + "' must be numeric");
        }
        request.params[name] = value.get<double>();
    }
    return request;
}

std::string serialize_response(const EvalResponse& response) {
    nlohmann::json j{{"failure", response.failure}, {"id", response.id}};
    if (response.severity) {
        j["severity"] = *response.severity;
    }
    if (response.diagnostics) {
        j["diagnostics"] = *response.diagnostics;
    }
    return j.dump();
}

EvalResponse parse_response(std::string_view line) {
    const nlohmann::json j = parse_line(line, "response");
    if (!j.contains("id") || !j["id"].is_number_integer() || !j.contains("failure") ||
        !j["failure"].is_boolean()) {
        throw ProtocolError("response line needs integer 'id' and boolean 'failure': " +
                            std::string(line));
    }
    EvalResponse response;
    response.id = j["id"].get<std::int64_t>();
    response.failure = j["failure"].get<bool>();
    if (j.contains("severity")) {
        if (!j["severity"].is_number()) {
            throw ProtocolError("response 'severity' must be numeric");
        }
        response.severity = j["severity"].get<double>();
    }
    if (j.contains("diagnostics")) {
        if (!j["diagnostics"].is_string()) {
            throw ProtocolError("response 'diagnostics' must be a string");
        }
        response.diagnostics = j["diagnostics"].get<std::string>();
    }
    return response;
}

namespace {

std::mutex g_registry_mutex;
std::map<std::string, InProcessEvaluator>& registry() {
    static std::map<std::string, InProcessEvaluator> instance;
    return instance;
}

} // namespace

void SutRegistry::register_evaluator(const std::string& name, InProcessEvaluator evaluator) {
    std::lock_guard lock(g_registry_mutex);
    registry()[name] = std::move(evaluator);
}

InProcessEvaluator SutRegistry::lookup(const std::string& name) {
    std::lock_guard lock(g_registry_mutex);
    auto it = registry().find(name);
    if (it == registry().end()) {
        throw ConfigError("no in-process evaluator registered under '" + name + "'");
    }
    return it->second;
}

bool SutRegistry::contains(const std::string& name) {
    std::lock_guard lock(g_registry_mutex);
    return registry().count(name) > 0;
}

SutDescriptor SutDescriptor::in_process(std::string evaluator_id) {
    SutDescriptor d;
    d.kind_ = Kind::kInProcess;
    d.evaluator_id_ = std::move(evaluator_id);
    return d;
}

SutDescriptor SutDescriptor::external(std::string command, std::string working_directory,
                                      double timeout_s) {
    if (!(timeout_s > 0.0)) {
        throw ConfigError("SUT timeout must be > 0 seconds");
    }
    SutDescriptor d;
    d.kind_ = Kind::kExternalProcess;
    d.command_ = std::move(command);
    d.working_directory_ = std::move(working_directory);
    d.timeout_s_ = timeout_s;
    return d;
}

// Child process speaking the line protocol over stdin/stdout. Owns the pipes
// and reaps the child on destruction.
struct Sut::Process {
    pid_t pid = -1;
    int to_child = -1;
    int from_child = -1;
    std::string read_buffer;

    Process(const std::string& command, const std::string& workdir) {
        int in_pipe[2];  // parent -> child
        int out_pipe[2]; // child -> parent
        if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
            throw ProcessError("failed to create pipes for SUT process");
        }
        pid = fork();
        if (pid < 0) {
            throw ProcessError("failed to fork SUT process");
        }
        if (pid == 0) {
            dup2(in_pipe[0], STDIN_FILENO);
            dup2(out_pipe[1], STDOUT_FILENO);
            close(in_pipe[0]);
            close(in_pipe[1]);
            close(out_pipe[0]);
            close(out_pipe[1]);
            if (!workdir.empty() && chdir(workdir.c_str()) != 0) {
                _exit(127);
            }
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(in_pipe[0]);
        close(out_pipe[1]);
        to_child = in_pipe[1];
        from_child = out_pipe[0];
    }

    ~Process() {
        if (to_child >= 0) {
            close(to_child);
        }
        if (from_child >= 0) {
            close(from_child);
        }
        if (pid > 0) {
            kill(pid, SIGKILL);
            int status = 0;
            waitpid(pid, &status, 0);
        }
    }

    void write_line(const std::string& line) {
        std::string payload = line;
        payload.push_back('\n');
        std::size_t written = 0;
        while (written < payload.size()) {
            const ssize_t n = write(to_child, payload.data() + written, payload.size() - written);
            if (n < 0) {
                if (errno == EINTR) {
                    continue;
                }
                throw ProcessError("failed to write request to SUT process: " +
                                   std::string(std::strerror(errno)));
            }
            written += static_cast<std::size_t>(n);
        }
    }

    // Blocks until a full line arrives or the deadline passes. EOF means the
    // child went away; the exit status decides process vs protocol error.
    std::string read_line(double timeout_s) {
        const auto deadline =
            std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
        for (;;) {
            const auto newline = read_buffer.find('\n');
            if (newline != std::string::npos) {
                std::string line = read_buffer.substr(0, newline);
                read_buffer.erase(0, newline + 1);
                return line;
            }
            const auto remaining = deadline - std::chrono::steady_clock::now();
            const auto remaining_ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(remaining).count();
            if (remaining_ms <= 0) {
                throw TimeoutError("SUT did not respond within the configured timeout");
            }
            pollfd pfd{from_child, POLLIN, 0};
            const int rc = poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining_ms, 1000)));
            if (rc < 0 && errno != EINTR) {
                throw ProcessError("poll on SUT pipe failed: " + std::string(std::strerror(errno)));
            }
            if (rc <= 0) {
                continue;
            }
            char chunk[4096];
            const ssize_t n = read(from_child, chunk, sizeof(chunk));
            if (n < 0) {
                if (errno == EINTR) {
                    continue;
                }
                throw ProcessError("failed to read from SUT process: " +
                                   std::string(std::strerror(errno)));
            }
            if (n == 0) {
                close(to_child);
                to_child = -1;
                close(from_child);
                from_child = -1;
                int status = 0;
                waitpid(pid, &status, 0);
                const pid_t reaped = pid;
                pid = -1;
                if (WIFEXITED(status) && WEXITSTATUS(status) != 0) {
                    throw ProcessError("SUT process (pid " + std::to_string(reaped) +
                                       ") exited with status " +
                                       std::to_string(WEXITSTATUS(status)));
                }
                if (WIFSIGNALED(status)) {
                    throw ProcessError("SUT process (pid " + std::to_string(reaped) +
                                       ") killed by signal " + std::to_string(WTERMSIG(status)));
                }
                throw ProtocolError("SUT process closed its output before responding");
            }
            read_buffer.append(chunk, static_cast<std::size_t>(n));
        }
    }
};

Sut::Sut(SutDescriptor descriptor) : descriptor_(std::move(descriptor)) {
    if (descriptor_.kind() == SutDescriptor::Kind::kInProcess) {
        evaluator_ = SutRegistry::lookup(descriptor_.evaluator_id());
    } else {
        process_ = std::make_unique<Process>(descriptor_.command(),
                                             descriptor_.working_directory());
    }
}

Sut::~Sut() = default;
Sut::Sut(Sut&&) noexcept = default;
Sut& Sut::operator=(Sut&&) noexcept = default;

Trial Sut::evaluate(const OddPoint& point) {
    Trial trial;
    trial.point = point;
    if (descriptor_.kind() == SutDescriptor::Kind::kInProcess) {
        const EvalOutcome outcome = evaluator_(point);
        trial.failure = outcome.failure;
        trial.severity = outcome.severity;
        return trial;
    }
    EvalRequest request;
    request.id = next_request_id_++;
    request.params = point.values();
    process_->write_line(serialize_request(request));
    const EvalResponse response = parse_response(process_->read_line(descriptor_.timeout_s()));
    if (response.id != request.id) {
        throw ProtocolError("SUT response id " + std::to_string(response.id) +
                            " does not match request id " + std::to_string(request.id));
    }
    trial.failure = response.failure;
    trial.severity = response.severity;
    return trial;
}

std::vector<Trial> Sut::evaluate_batch(std::span<const OddPoint> points, std::size_t workers) {
    std::vector<Trial> results(points.size());
    if (points.empty()) {
        return results;
    }

    const bool parallel = descriptor_.kind() == SutDescriptor::Kind::kInProcess && workers > 1;
    if (!parallel) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            try {
                results[i] = evaluate(points[i]);
            } catch (const HarnessError& e) {
                results.resize(i);
                throw BatchError(e.what(), std::move(results));
            }
        }
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::vector<char> done(points.size(), 0);
    std::mutex error_mutex;
    std::string first_error;
    std::size_t first_error_index = points.size();
    std::atomic<bool> abort{false};

    auto worker_loop = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size() || abort.load()) {
                return;
            }
            try {
                const EvalOutcome outcome = evaluator_(points[i]);
                results[i].point = points[i];
                results[i].failure = outcome.failure;
                results[i].severity = outcome.severity;
                done[i] = 1;
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (i < first_error_index) {
                    first_error_index = i;
                    first_error = e.what();
                }
                abort.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    const std::size_t n_workers = std::min(workers, points.size());
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back(worker_loop);
    }
    for (auto& t : pool) {
        t.join();
    }

    if (first_error_index < points.size()) {
        std::size_t prefix = 0;
        while (prefix < points.size() && done[prefix]) {
            ++prefix;
        }
        results.resize(prefix);
        throw BatchError(first_error, std::move(results));
    }
    return results;
}

Trial evaluate(const SutDescriptor& descriptor, const OddPoint& point) {
    Sut session(descriptor);
    return session.evaluate(point);
}

std::vector<Trial> evaluate_batch(const SutDescriptor& descriptor,
                                  std::span<const OddPoint> points, std::size_t workers) {
    Sut session(descriptor);
    return session.evaluate_batch(points, workers);
}

} // namespace mlcert
