#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlcert/error.hpp"
#include "mlcert/odd.hpp"

namespace mlcert {

// One system-under-test evaluation at an ODD point.
struct Trial {
    OddPoint point;
    bool failure = false;
    std::optional<double> severity;
    std::size_t iteration = 1;
};

// Wire protocol types. One JSON object per line over the child process's
// standard input/output, UTF-8, flushed after each line.
struct EvalRequest {
    std::int64_t id = 0;
    std::map<std::string, double> params;
};

struct EvalResponse {
    std::int64_t id = 0;
    bool failure = false;
    std::optional<double> severity;
    std::optional<std::string> diagnostics;
};

std::string serialize_request(const EvalRequest& request);
EvalRequest parse_request(std::string_view line);
std::string serialize_response(const EvalResponse& response);
EvalResponse parse_response(std::string_view line);

// Outcome produced by an in-process evaluator.
struct EvalOutcome {
    bool failure = false;
    std::optional<double> severity;
    std::optional<std::string> diagnostics;
};

using InProcessEvaluator = std::function<EvalOutcome(const OddPoint&)>;

// Process-wide registry of named in-process evaluators. Registration is for
// test doubles and built-in oracles; lookups are read-only afterwards.
class SutRegistry {
public:
    static void register_evaluator(const std::string& name, InProcessEvaluator evaluator);
    static InProcessEvaluator lookup(const std::string& name); // throws ConfigError
    static bool contains(const std::string& name);
};

// Uniform description of a system under test: either a registered in-process
// evaluator or an external process speaking the line protocol.
class SutDescriptor {
public:
    enum class Kind { kInProcess, kExternalProcess };

    static SutDescriptor in_process(std::string evaluator_id);
    static SutDescriptor external(std::string command, std::string working_directory = "",
                                  double timeout_s = 30.0);

    Kind kind() const { return kind_; }
    const std::string& evaluator_id() const { return evaluator_id_; }
    const std::string& command() const { return command_; }
    const std::string& working_directory() const { return working_directory_; }
    double timeout_s() const { return timeout_s_; }

private:
    SutDescriptor() = default;
    Kind kind_ = Kind::kInProcess;
    std::string evaluator_id_;
    std::string command_;
    std::string working_directory_;
    double timeout_s_ = 30.0;
};

// Raised when a batch evaluation aborts; carries the contiguous prefix of
// results completed before the failure.
class BatchError : public HarnessError {
public:
    BatchError(const std::string& message, std::vector<Trial> completed_prefix)
        : HarnessError(message), completed(std::move(completed_prefix)) {}
    std::vector<Trial> completed;
};

// Evaluation session. External processes are started once and serve many
// requests; in-process evaluators are called directly. Not thread-safe; use
// one session per thread or evaluate_batch's worker pool.
class Sut {
public:
    explicit Sut(SutDescriptor descriptor);
    ~Sut();
    Sut(Sut&&) noexcept;
    Sut& operator=(Sut&&) noexcept;
    Sut(const Sut&) = delete;
    Sut& operator=(const Sut&) = delete;

    const SutDescriptor& descriptor() const { return descriptor_; }

    Trial evaluate(const OddPoint& point);

    // Results in input order. `workers` bounds in-process parallelism; an
    // external process is a single ordered pipeline regardless of workers.
    // The first error aborts outstanding work and is reported as BatchError
    // with the completed prefix.
    std::vector<Trial> evaluate_batch(std::span<const OddPoint> points, std::size_t workers = 1);

private:
    SutDescriptor descriptor_;
    InProcessEvaluator evaluator_;
    struct Process;
    std::unique_ptr<Process> process_;
    std::int64_t next_request_id_ = 1;
};

// One-shot conveniences that construct a session internally.
Trial evaluate(const SutDescriptor& descriptor, const OddPoint& point);
std::vector<Trial> evaluate_batch(const SutDescriptor& descriptor,
                                  std::span<const OddPoint> points, std::size_t workers = 1);

} // namespace mlcert
