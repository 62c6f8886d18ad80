#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace drl {

enum class DeviceKind { kCpu, kGpu, kFpga };

std::string to_string(DeviceKind kind);
DeviceKind device_kind_from_string(const std::string& s);

// Abstract device description. The cost constants (per_mac_cost,
// per_level_cost, kernel_overhead_s) parameterize the latency models below;
// they stand in for profiling and are calibration inputs, not measurements.
// Power figures are user-supplied per primitive combination.
struct DeviceSpec {
    std::string name;
    DeviceKind kind = DeviceKind::kCpu;
    long cores_or_lanes = 1;     // CPU threads / GPU lanes (informational on GPU)
    long dsp_count = 0;          // FPGA multiply-accumulate units
    double sram_bytes = 0.0;     // FPGA on-chip memory
    double clock_hz = 1e9;
    double per_mac_cost = 0.0;       // seconds per multiply-accumulate
    double per_level_cost = 0.0;     // seconds per tree-level / memory round trip
    double kernel_overhead_s = 0.0;  // fixed per-kernel-dispatch cost (GPU)
    double power_rm_w = 0.0;
    double power_learner_w = 0.0;
    double power_both_w = 0.0;
};

struct LinkSpec {
    std::string src;
    std::string dst;
    double latency_s = 0.0;
    double bandwidth_bps = 1.0;
};

// Symmetric link lookup; intra-device links (src == dst) model DDR.
class LinkTable {
public:
    LinkTable() = default;
    explicit LinkTable(std::vector<LinkSpec> links);

    bool has(const std::string& a, const std::string& b) const;
    const LinkSpec& get(const std::string& a, const std::string& b) const;  // throws ConfigError
    const std::vector<LinkSpec>& all() const { return links_; }

private:
    std::vector<LinkSpec> links_;
};

// Workload parameters shared by every latency formula.
struct WorkloadSpec {
    std::size_t batch_size = 32;       // BS
    unsigned fanout = 16;              // F
    std::size_t tree_depth = 4;        // D, consistent with replay capacity and F
    std::size_t replay_capacity = 10000;
    std::size_t experience_words = 11;  // E: 2*state_dim + action + reward + done
    int num_actors = 1;
    std::vector<double> stage_macs;    // per pipeline stage (FP, BP, GA passes)
    std::size_t n_layers = 3;
    double learner_buffer_bytes = 0.0;  // one FPGA pipeline's buffers
};

// FP stages per layer, BP stages for all but the input layer, GA per layer.
std::vector<double> make_stage_macs(const std::vector<std::size_t>& layer_dims);
// Weights + biases + double-buffered activations, 8 bytes per word.
double pipeline_buffer_bytes(const std::vector<std::size_t>& layer_dims);
// Sum-tree footprint: every level's nodes at 8 bytes each.
double rm_sram_bytes(const WorkloadSpec& workload);

enum class RmOp { kSampling, kUpdate, kInsert };

// Per-primitive latencies of one batched iteration; fields not hosted by the
// column are 0.
struct LatencySet {
    double sampling_s = 0.0;
    double update_s = 0.0;
    double insert_s = 0.0;
    double learner_s = 0.0;
};

enum class Column { kRmOnly = 0, kLearnerOnly = 1, kBoth = 2 };
std::string to_string(Column column);

struct MatrixCell {
    bool feasible = false;
    LatencySet latency;
    double power_w = 0.0;
    std::string note;  // why infeasible
};

// Table-I-shaped device/primitive latency-and-power table.
struct AssignmentMatrix {
    std::vector<DeviceSpec> devices;
    std::vector<std::array<MatrixCell, 3>> cells;  // [device][column]

    const MatrixCell& cell(std::size_t device, Column column) const {
        return cells[device][static_cast<std::size_t>(column)];
    }
    std::optional<std::size_t> device_index(const std::string& name) const;
};

// lat + data/bandwidth.
double t_comm(const LinkSpec& link, double data_bytes);

// Pipeline model: sampling walks F siblings per level, update/insert touch one
// node per level; 2 accesses (read+write) per visit, BS requests streamed
// through D stages.
double fpga_rm_cycles(RmOp op, unsigned fanout, std::size_t batch_size, std::size_t depth);
double fpga_rm_latency(const DeviceSpec& spec, const WorkloadSpec& workload, RmOp op,
                       const LinkSpec* initiator_link = nullptr, double request_bytes = 0.0);

struct FpgaLearnerConfig {
    bool feasible = false;
    long dp = 0;                    // data-parallel pipeline copies
    std::vector<long> uf;           // per-stage unroll factors
    double t_stage_cycles = 0.0;    // max_l ceil(mac_l / uf_l)
    std::string reason;             // when infeasible
};

// DP from the SRAM budget (minus the RM's share when co-resident) and the DSP
// budget; UF chosen to minimize the worst stage latency under sum(UF) <=
// dsp_count/DP, each UF >= 1.
FpgaLearnerConfig fpga_learner_config(const DeviceSpec& spec, const WorkloadSpec& workload,
                                      bool rm_on_same_device);

// T_stage * (ceil(BS/DP) + 3*(n_layers-1)) cycles.
double fpga_learner_latency(const FpgaLearnerConfig& config, const DeviceSpec& spec,
                            const WorkloadSpec& workload);

LatencySet cpu_primitive_latency(const DeviceSpec& spec, const WorkloadSpec& workload,
                                 Column column);
LatencySet gpu_primitive_latency(const DeviceSpec& spec, const WorkloadSpec& workload,
                                 Column column);
// Exposed for the stream-search property tests.
double gpu_learner_latency_for_streams(const DeviceSpec& spec, const WorkloadSpec& workload,
                                       std::size_t streams);

AssignmentMatrix build_assignment_matrix(const std::vector<DeviceSpec>& devices,
                                         const LinkTable& links, const WorkloadSpec& workload);

}  // namespace drl
