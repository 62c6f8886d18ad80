#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drl/composer.hpp"
#include "drl/config.hpp"
#include "drl/messages.hpp"

namespace drl {

enum class TraceEventKind {
    kDcqRecv,
    kLdqRecv,
    kWsqSend,
    kRrqUpdateSend,
    kRrqSampleSend,
    kRrqReplyRecv,
    kRrqInsertSend,
    kLaqSend,
};

std::string to_string(TraceEventKind kind);

struct TraceEvent {
    TraceEventKind kind;
    long iteration;   // completed learner iterations at emission time
    double stamp;     // virtual seconds (0 in real mode)
};

// Test/instrumentation taps. All hooks fire on the worker that performs the
// action; use the cooperative scheduler when ordering matters.
struct RuntimeHooks {
    std::function<void(int actor_id, const Experience&)> on_actor_emit;
    std::function<void(const Experience&)> on_train_consume;
    std::function<void(const TraceEvent&)> on_event;
    // Replay-side ops in RM processing order; seq increments per request.
    std::function<void(std::size_t index, const Experience& exp, std::uint64_t seq)>
        on_storage_write;
    std::function<void(const std::vector<std::size_t>& indices, std::uint64_t seq)>
        on_sample_done;
    std::function<void(const std::vector<std::size_t>& indices, std::uint64_t seq)>
        on_update_done;
};

// Model-predicted per-iteration charges driving the virtual clock.
struct SimLatencies {
    double sampling_s = 0.0;
    double update_s = 0.0;
    double insert_s = 0.0;
    double learner_s = 0.0;
    double comm_sample_s = 0.0;  // rm -> learner, sampled batch
    double comm_update_s = 0.0;  // learner -> rm, new priorities
    double comm_insert_s = 0.0;  // host -> rm, collected experiences
};

// Pulls the charges for a chosen placement out of the assignment matrix and
// the link table, mirroring the composer's iteration-latency terms.
SimLatencies make_sim_latencies(const AssignmentMatrix& matrix, const LinkTable& links,
                                const WorkloadSpec& workload, const std::string& rm_device,
                                const std::string& learner_device,
                                const std::string& host_device, bool comm_reduction,
                                std::size_t dc_capacity);

struct TrainingReport {
    long iterations = 0;
    double virtual_or_wall_time_s = 0.0;
    double eps = 0.0;
    std::vector<double> reward_curve;  // per finished episode, arrival order
    std::map<std::string, long> message_counts;
    bool early_stop = false;
    std::string mode;
    double final_mean_reward_100 = 0.0;

    std::string to_json() const;
    static TrainingReport from_json(const std::string& text);
};

// Executes the training protocol: host coordinator, one replay worker, one
// learner worker and num_actors actor workers exchanging messages over bounded
// queues. Simulated mode runs the same loop on the single-threaded cooperative
// scheduler and advances a virtual clock by the SimLatencies charges; real
// mode uses the wall clock (optionally with OS threads).
class TrainingRuntime {
public:
    TrainingRuntime(ToolConfig config, std::optional<SimLatencies> sim = std::nullopt,
                    RuntimeHooks hooks = {});

    // Single-shot; runs to the convergence criterion and returns the report.
    TrainingReport run();

private:
    ToolConfig config_;
    std::optional<SimLatencies> sim_;
    RuntimeHooks hooks_;
    bool used_ = false;
};

// Convenience wrapper: builds the workload/matrix/sim charges for the
// composition and runs the runtime in the configured mode.
TrainingReport run_training(const ToolConfig& config, const Composition& composition,
                            const std::vector<DeviceSpec>& devices, const LinkTable& links,
                            RuntimeHooks hooks = {});

}  // namespace drl
