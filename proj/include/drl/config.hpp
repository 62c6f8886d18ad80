#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drl/actor.hpp"
#include "drl/composer.hpp"
#include "drl/mlp.hpp"
#include "drl/perf_model.hpp"
#include "drl/replay.hpp"

namespace drl {

enum class RunMode { kReal, kSimulated };

// Everything the tool reads from the structured config file plus the two CSVs.
struct ToolConfig {
    std::string device_file;
    std::string connection_file;
    ObjectiveMetric opt_metric = ObjectiveMetric::kThroughput;

    // actors
    int num_actors = 1;
    std::string env_name = "cartpole-lite";
    long episode_limit = 0;  // 0: environment default
    EpsilonSchedule epsilon;
    bool batch_per_episode = true;

    // replay
    std::size_t replay_size = 4096;
    ReplayMode replay_mode = ReplayMode::kPrioritized;
    unsigned fanout = 16;

    // learner
    std::vector<std::size_t> layer_dims;
    double learning_rate = 1e-3;
    double gamma = 0.99;
    std::size_t batch_size = 32;
    std::size_t sub_batches = 1;
    std::size_t sync_period = 200;

    // run
    RunMode mode = RunMode::kSimulated;
    long max_iterations = 1000;
    std::uint64_t seed = 1;
    std::optional<double> reward_threshold;
    std::size_t queue_capacity = 64;
    std::size_t dc_capacity = 0;  // 0: batch_size
    bool comm_reduction = true;
    long watchdog_polls = 2'000'000;  // 0 disables
    bool use_threads = false;         // real OS threads instead of the cooperative scheduler
};

ToolConfig load_tool_config(const std::string& path);

std::vector<DeviceSpec> load_devices_csv(const std::string& path);
std::vector<LinkSpec> load_links_csv(const std::string& path);

// Derives the analytical-model inputs from the training configuration.
WorkloadSpec make_workload(const ToolConfig& config);

}  // namespace drl
