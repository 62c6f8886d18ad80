#include "drl/perf_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "drl/errors.hpp"
#include "drl/sum_tree.hpp"

namespace drl {

std::string to_string(DeviceKind kind) {
    switch (kind) {
        case DeviceKind::kCpu: return "cpu";
        case DeviceKind::kGpu: return "gpu";
        case DeviceKind::kFpga: return "fpga";
    }
    return "?";
}

DeviceKind device_kind_from_string(const std::string& s) {
    if (s == "cpu") return DeviceKind::kCpu;
    if (s == "gpu") return DeviceKind::kGpu;
    if (s == "fpga") return DeviceKind::kFpga;
    throw ConfigError("unknown device kind '" + s + "'");
}

std::string to_string(Column column) {
    switch (column) {
        case Column::kRmOnly: return "RM only";
        case Column::kLearnerOnly: return "Learner only";
        case Column::kBoth: return "RM & Learner";
    }
    return "?";
}

LinkTable::LinkTable(std::vector<LinkSpec> links) : links_(std::move(links)) {}

bool LinkTable::has(const std::string& a, const std::string& b) const {
    for (const auto& l : links_) {
        if ((l.src == a && l.dst == b) || (l.src == b && l.dst == a)) return true;
    }
    return false;
}

const LinkSpec& LinkTable::get(const std::string& a, const std::string& b) const {
    for (const auto& l : links_) {
        if ((l.src == a && l.dst == b) || (l.src == b && l.dst == a)) return l;
    }
    throw ConfigError("no link between '" + a + "' and '" + b + "'");
}

std::vector<double> make_stage_macs(const std::vector<std::size_t>& layer_dims) {
    if (layer_dims.size() < 2)
        throw std::invalid_argument("make_stage_macs: need at least 2 dims");
    std::vector<double> stages;
    std::size_t layers = layer_dims.size() - 1;
    for (std::size_t l = 0; l < layers; ++l)  // FP
        stages.push_back(static_cast<double>(layer_dims[l] * layer_dims[l + 1]));
    for (std::size_t l = layers; l-- > 1;)    // BP (delta propagation)
        stages.push_back(static_cast<double>(layer_dims[l] * layer_dims[l + 1]));
    for (std::size_t l = 0; l < layers; ++l)  // GA (outer products)
        stages.push_back(static_cast<double>(layer_dims[l] * layer_dims[l + 1]));
    return stages;
}

double pipeline_buffer_bytes(const std::vector<std::size_t>& layer_dims) {
    double words = 0.0;
    std::size_t layers = layer_dims.size() - 1;
    for (std::size_t l = 0; l < layers; ++l)
        words += static_cast<double>(layer_dims[l] * layer_dims[l + 1] + layer_dims[l + 1]);
    for (std::size_t d : layer_dims) words += 2.0 * static_cast<double>(d);
    return words * 8.0;
}

double rm_sram_bytes(const WorkloadSpec& workload) {
    double bytes = 0.0;
    double width = 1.0;
    for (std::size_t level = 0; level <= workload.tree_depth; ++level) {
        bytes += width * 8.0;
        width *= workload.fanout;
    }
    return bytes;
}

double t_comm(const LinkSpec& link, double data_bytes) {
    if (data_bytes < 0.0) throw std::invalid_argument("t_comm: negative data size");
    return link.latency_s + data_bytes / link.bandwidth_bps;
}

double fpga_rm_cycles(RmOp op, unsigned fanout, std::size_t batch_size, std::size_t depth) {
    double bs_plus_d = static_cast<double>(batch_size + depth);
    if (op == RmOp::kSampling) return 2.0 * fanout * bs_plus_d;
    return 2.0 * bs_plus_d;  // update and insert share the formula
}

double fpga_rm_latency(const DeviceSpec& spec, const WorkloadSpec& workload, RmOp op,
                       const LinkSpec* initiator_link, double request_bytes) {
    double cycles = fpga_rm_cycles(op, workload.fanout, workload.batch_size,
                                   workload.tree_depth);
    double seconds = cycles / spec.clock_hz;
    if (initiator_link) seconds += t_comm(*initiator_link, request_bytes);
    return seconds;
}

namespace {

double stage_latency_cycles(const std::vector<double>& macs, const std::vector<long>& uf) {
    double worst = 0.0;
    for (std::size_t l = 0; l < macs.size(); ++l)
        worst = std::max(worst, std::ceil(macs[l] / static_cast<double>(uf[l])));
    return worst;
}

// Minimize max_l ceil(mac_l/uf_l) subject to sum(uf) <= budget, uf_l >= 1.
// Feasibility of a target T needs sum_l max(1, ceil(mac_l/T)) <= budget, which
// is monotone in T, so binary search is exact. Leftover units go to the
// current bottleneck stage (lowest index on ties).
std::vector<long> allocate_unroll_factors(const std::vector<double>& macs, long budget) {
    long stages = static_cast<long>(macs.size());
    double hi_mac = *std::max_element(macs.begin(), macs.end());

    auto units_for_target = [&](double target) {
        long total = 0;
        for (double m : macs) total += std::max<long>(1, static_cast<long>(std::ceil(m / target)));
        return total;
    };

    long lo = 1, hi = static_cast<long>(std::max(1.0, hi_mac));
    while (lo < hi) {
        long mid = lo + (hi - lo) / 2;
        if (units_for_target(static_cast<double>(mid)) <= budget)
            hi = mid;
        else
            lo = mid + 1;
    }
    double target = static_cast<double>(lo);

    std::vector<long> uf(stages);
    long used = 0;
    for (long l = 0; l < stages; ++l) {
        uf[l] = std::max<long>(1, static_cast<long>(std::ceil(macs[l] / target)));
        used += uf[l];
    }
    for (long left = budget - used; left > 0; --left) {
        std::size_t bottleneck = 0;
        double worst = -1.0;
        for (std::size_t l = 0; l < macs.size(); ++l) {
            double lat = std::ceil(macs[l] / static_cast<double>(uf[l]));
            if (lat > worst) {
                worst = lat;
                bottleneck = l;
            }
        }
        ++uf[bottleneck];
    }
    return uf;
}

}  // namespace

FpgaLearnerConfig fpga_learner_config(const DeviceSpec& spec, const WorkloadSpec& workload,
                                      bool rm_on_same_device) {
    FpgaLearnerConfig config;
    if (workload.stage_macs.empty()) {
        config.reason = "no learner stages";
        return config;
    }
    double sram_budget = spec.sram_bytes - (rm_on_same_device ? rm_sram_bytes(workload) : 0.0);
    double buffer = workload.learner_buffer_bytes;
    if (buffer <= 0.0) {
        config.reason = "pipeline buffer size not set";
        return config;
    }
    long dp_sram = static_cast<long>(std::floor(sram_budget / buffer));
    long stages = static_cast<long>(workload.stage_macs.size());
    long dp_dsp = spec.dsp_count / std::max<long>(stages, 1);
    long dp = std::min(dp_sram, dp_dsp);
    if (dp_sram < 1) {
        config.reason = "SRAM budget violated even at DP=1";
        return config;
    }
    if (dp_dsp < 1) {
        config.reason = "DSP budget below one unit per stage";
        return config;
    }

    config.feasible = true;
    config.dp = dp;
    config.uf = allocate_unroll_factors(workload.stage_macs, spec.dsp_count / dp);
    config.t_stage_cycles = stage_latency_cycles(workload.stage_macs, config.uf);
    return config;
}

double fpga_learner_latency(const FpgaLearnerConfig& config, const DeviceSpec& spec,
                            const WorkloadSpec& workload) {
    if (!config.feasible) throw InfeasibleError("fpga_learner_latency: infeasible config");
    double per_pipeline_bs =
        std::ceil(static_cast<double>(workload.batch_size) / static_cast<double>(config.dp));
    double fill_drain = 3.0 * (static_cast<double>(workload.n_layers) - 1.0);
    double cycles = config.t_stage_cycles * (per_pipeline_bs + fill_drain);
    return cycles / spec.clock_hz;
}

namespace {

// CPU cost of one root-to-leaf walk; at least one level is always charged.
double cpu_walk_levels(const WorkloadSpec& workload) {
    return static_cast<double>(std::max<std::size_t>(workload.tree_depth, 1));
}

double cpu_learner_seconds(const DeviceSpec& spec, const WorkloadSpec& workload, long threads) {
    double total_macs = 0.0;
    for (double m : workload.stage_macs) total_macs += m;
    return total_macs * static_cast<double>(workload.batch_size) * spec.per_mac_cost /
           static_cast<double>(std::max<long>(threads, 1));
}

}  // namespace

LatencySet cpu_primitive_latency(const DeviceSpec& spec, const WorkloadSpec& workload,
                                 Column column) {
    long cores = std::max<long>(spec.cores_or_lanes, 1);
    long learner_threads = 0;
    if (column == Column::kLearnerOnly) learner_threads = cores;
    if (column == Column::kBoth) learner_threads = std::max<long>(cores / 2, 1);

    LatencySet lat;
    if (column != Column::kRmOnly)
        lat.learner_s = cpu_learner_seconds(spec, workload, learner_threads);

    if (column != Column::kLearnerOnly) {
        // W = (total threads - learner threads) clipped to [1, BS].
        long w = std::clamp<long>(cores - learner_threads, 1,
                                  static_cast<long>(workload.batch_size));
        double levels = cpu_walk_levels(workload);
        double f = static_cast<double>(workload.fanout);
        double sample_op = levels * (f * spec.per_mac_cost + spec.per_level_cost);
        double update_op = levels * (spec.per_mac_cost + spec.per_level_cost);
        double insert_op = update_op + levels * spec.per_level_cost;  // retrieval pass first
        double per_worker_batch =
            static_cast<double>(workload.batch_size) / static_cast<double>(w);
        lat.sampling_s = sample_op * per_worker_batch;
        lat.update_s = update_op * per_worker_batch;
        lat.insert_s = insert_op * per_worker_batch;
    }
    return lat;
}

double gpu_learner_latency_for_streams(const DeviceSpec& spec, const WorkloadSpec& workload,
                                       std::size_t streams) {
    if (streams < 1) throw std::invalid_argument("streams must be >= 1");
    double total_macs = 0.0;
    for (double m : workload.stage_macs) total_macs += m;
    double layers = static_cast<double>(workload.n_layers);
    double sub_batch = std::ceil(static_cast<double>(workload.batch_size) /
                                 static_cast<double>(streams));
    // Exposed dispatch cost shrinks with the sub-batch count while per-stream
    // management grows with it; compute is stream-count independent. The
    // functional form is a calibration-dependent stand-in for profiling.
    return layers * spec.kernel_overhead_s * (sub_batch + static_cast<double>(streams)) +
           total_macs * static_cast<double>(workload.batch_size) * spec.per_mac_cost;
}

LatencySet gpu_primitive_latency(const DeviceSpec& spec, const WorkloadSpec& workload,
                                 Column column) {
    LatencySet lat;
    double levels = static_cast<double>(std::max<std::size_t>(workload.tree_depth, 1));
    // BS lanes walk the tree in parallel; each level is one global-memory
    // round trip. Co-residence with the learner doubles the contention on
    // those accesses.
    double contention = column == Column::kBoth ? 2.0 : 1.0;
    if (column != Column::kLearnerOnly) {
        lat.sampling_s = levels * spec.per_level_cost * contention;
        lat.update_s = levels * spec.per_level_cost * contention;
        lat.insert_s = 2.0 * levels * spec.per_level_cost * contention;
    }
    if (column != Column::kRmOnly) {
        double best = gpu_learner_latency_for_streams(spec, workload, 1);
        for (std::size_t s = 2; s <= workload.batch_size; s *= 2)
            best = std::min(best, gpu_learner_latency_for_streams(spec, workload, s));
        lat.learner_s = best;
    }
    return lat;
}

std::optional<std::size_t> AssignmentMatrix::device_index(const std::string& name) const {
    for (std::size_t i = 0; i < devices.size(); ++i)
        if (devices[i].name == name) return i;
    return std::nullopt;
}

AssignmentMatrix build_assignment_matrix(const std::vector<DeviceSpec>& devices,
                                         const LinkTable& links, const WorkloadSpec& workload) {
    (void)links;  // connectivity is charged by the composer, not the matrix
    if (devices.empty()) throw std::invalid_argument("build_assignment_matrix: no devices");

    AssignmentMatrix matrix;
    matrix.devices = devices;
    matrix.cells.resize(devices.size());

    for (std::size_t d = 0; d < devices.size(); ++d) {
        const DeviceSpec& spec = devices[d];
        for (Column column : {Column::kRmOnly, Column::kLearnerOnly, Column::kBoth}) {
            MatrixCell cell;
            switch (spec.kind) {
                case DeviceKind::kCpu:
                    cell.feasible = true;
                    cell.latency = cpu_primitive_latency(spec, workload, column);
                    break;
                case DeviceKind::kGpu:
                    cell.feasible = true;
                    cell.latency = gpu_primitive_latency(spec, workload, column);
                    break;
                case DeviceKind::kFpga: {
                    bool rm_here = column != Column::kLearnerOnly;
                    bool learner_here = column != Column::kRmOnly;
                    bool rm_fits = rm_sram_bytes(workload) <= spec.sram_bytes;
                    if (rm_here && !rm_fits) {
                        cell.note = "sum tree exceeds SRAM";
                        break;
                    }
                    LatencySet lat;
                    if (rm_here) {
                        lat.sampling_s = fpga_rm_latency(spec, workload, RmOp::kSampling);
                        lat.update_s = fpga_rm_latency(spec, workload, RmOp::kUpdate);
                        lat.insert_s = fpga_rm_latency(spec, workload, RmOp::kInsert);
                    }
                    if (learner_here) {
                        auto config = fpga_learner_config(spec, workload, rm_here);
                        if (!config.feasible) {
                            cell.note = config.reason;
                            break;
                        }
                        lat.learner_s = fpga_learner_latency(config, spec, workload);
                    }
                    cell.feasible = true;
                    cell.latency = lat;
                    break;
                }
            }
            if (cell.feasible) {
                switch (column) {
                    case Column::kRmOnly: cell.power_w = spec.power_rm_w; break;
                    case Column::kLearnerOnly: cell.power_w = spec.power_learner_w; break;
                    case Column::kBoth: cell.power_w = spec.power_both_w; break;
                }
            }
            matrix.cells[d][static_cast<std::size_t>(column)] = std::move(cell);
        }
    }
    return matrix;
}

}  // namespace drl
