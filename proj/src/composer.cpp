#include "drl/composer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "drl/errors.hpp"

namespace drl {

namespace {
constexpr double kWordBytes = 8.0;
}

std::string to_string(ObjectiveMetric metric) {
    return metric == ObjectiveMetric::kThroughput ? "throughput" : "power_efficiency";
}

ObjectiveMetric objective_from_string(const std::string& s) {
    if (s == "throughput") return ObjectiveMetric::kThroughput;
    if (s == "power_efficiency" || s == "power") return ObjectiveMetric::kPowerEfficiency;
    throw ConfigError("unknown optimization metric '" + s + "'");
}

double route_comm(const LinkTable& links, const std::string& from, const std::string& to,
                  const std::string& host, double data_bytes, bool comm_reduction) {
    if (from == to) {
        if (comm_reduction || from == host) return t_comm(links.get(from, from), data_bytes);
        return t_comm(links.get(from, host), data_bytes) +
               t_comm(links.get(host, to), data_bytes);
    }
    return t_comm(links.get(from, to), data_bytes);
}

TitrResult t_itr(const AssignmentMatrix& matrix, const LinkTable& links,
                 const WorkloadSpec& workload, const std::string& rm_device,
                 const std::string& learner_device, const std::string& host_device,
                 bool comm_reduction) {
    auto rm_idx = matrix.device_index(rm_device);
    auto learner_idx = matrix.device_index(learner_device);
    if (!rm_idx || !learner_idx)
        throw InfeasibleError("t_itr: unknown device in pair (" + rm_device + ", " +
                              learner_device + ")");

    bool co_resident = rm_device == learner_device;
    const MatrixCell& rm_cell =
        matrix.cell(*rm_idx, co_resident ? Column::kBoth : Column::kRmOnly);
    const MatrixCell& learner_cell =
        matrix.cell(*learner_idx, co_resident ? Column::kBoth : Column::kLearnerOnly);
    if (!rm_cell.feasible)
        throw InfeasibleError("t_itr: RM infeasible on " + rm_device +
                              (rm_cell.note.empty() ? "" : " (" + rm_cell.note + ")"));
    if (!learner_cell.feasible)
        throw InfeasibleError("t_itr: Learner infeasible on " + learner_device +
                              (learner_cell.note.empty() ? "" : " (" + learner_cell.note + ")"));

    double bs = static_cast<double>(workload.batch_size);
    double e = static_cast<double>(workload.experience_words);

    TitrBreakdown b;
    b.sampling_s = rm_cell.latency.sampling_s;
    b.update_s = rm_cell.latency.update_s;
    b.insert_s = rm_cell.latency.insert_s;
    b.learner_s = learner_cell.latency.learner_s;
    b.comm_sample_s = route_comm(links, rm_device, learner_device, host_device,
                                 bs * e * kWordBytes, comm_reduction);
    b.comm_update_s = route_comm(links, learner_device, rm_device, host_device,
                                 bs * kWordBytes, comm_reduction);
    b.comm_insert_s = route_comm(links, host_device, rm_device, host_device,
                                 bs * e * kWordBytes, comm_reduction);

    double insert_path = b.insert_s + b.comm_insert_s;
    double train_path = b.update_s + b.comm_update_s + b.learner_s;
    b.insert_bound = insert_path > train_path;

    TitrResult result;
    result.breakdown = b;
    result.seconds = b.sampling_s + b.comm_sample_s + std::max(insert_path, train_path);
    return result;
}

double pair_traffic_words(const WorkloadSpec& workload, const std::string& rm_device,
                          const std::string& learner_device, const std::string& host_device) {
    double bs = static_cast<double>(workload.batch_size);
    double e = static_cast<double>(workload.experience_words);
    double words = 0.0;
    if (rm_device != learner_device) words += bs * e + bs;  // samples out, priorities back
    if (host_device != rm_device) words += bs * e;          // collected experiences in
    return words;
}

double placement_power(const AssignmentMatrix& matrix, const std::string& rm_device,
                       const std::string& learner_device, const std::string& host_device) {
    auto rm_idx = matrix.device_index(rm_device);
    auto learner_idx = matrix.device_index(learner_device);
    if (!rm_idx || !learner_idx) throw InfeasibleError("placement_power: unknown device");

    double power = 0.0;
    if (rm_device == learner_device) {
        power = matrix.cell(*rm_idx, Column::kBoth).power_w;
    } else {
        power = matrix.cell(*rm_idx, Column::kRmOnly).power_w +
                matrix.cell(*learner_idx, Column::kLearnerOnly).power_w;
    }
    if (host_device != rm_device && host_device != learner_device) {
        // The host still runs the actors; charge its RM-column figure as the
        // closest operating point.
        auto host_idx = matrix.device_index(host_device);
        if (host_idx) power += matrix.cell(*host_idx, Column::kRmOnly).power_w;
    }
    return power;
}

PlacementResult place_primitives(const AssignmentMatrix& matrix, const LinkTable& links,
                                 const WorkloadSpec& workload, ObjectiveMetric metric,
                                 const std::string& host_device, bool comm_reduction) {
    double bs = static_cast<double>(workload.batch_size);
    bool found = false;
    PlacementResult best;
    double best_traffic = 0.0;

    for (const DeviceSpec& rm_dev : matrix.devices) {
        for (const DeviceSpec& ln_dev : matrix.devices) {
            TitrResult titr;
            try {
                titr = t_itr(matrix, links, workload, rm_dev.name, ln_dev.name, host_device,
                             comm_reduction);
            } catch (const InfeasibleError&) {
                continue;
            }
            double power = placement_power(matrix, rm_dev.name, ln_dev.name, host_device);
            double objective = bs / titr.seconds;
            if (metric == ObjectiveMetric::kPowerEfficiency) objective /= power;
            double traffic = pair_traffic_words(workload, rm_dev.name, ln_dev.name, host_device);

            bool better = false;
            if (!found) {
                better = true;
            } else if (objective > best.objective) {
                better = true;
            } else if (objective == best.objective) {
                if (traffic < best_traffic) {
                    better = true;
                } else if (traffic == best_traffic) {
                    auto key = std::pair(rm_dev.name, ln_dev.name);
                    auto best_key = std::pair(best.rm_device, best.learner_device);
                    better = key < best_key;
                }
            }
            if (better) {
                found = true;
                best.rm_device = rm_dev.name;
                best.learner_device = ln_dev.name;
                best.t_itr = titr;
                best.objective = objective;
                best.total_power_w = power;
                best_traffic = traffic;
            }
        }
    }
    if (!found) throw InfeasibleError("place_primitives: no feasible (RM, Learner) pair");
    return best;
}

std::string place_storage(const std::string& learner_device, const std::string& actors_device,
                          const std::string& rm_device, const LinkTable& links,
                          const WorkloadSpec& workload) {
    double bs = static_cast<double>(workload.batch_size);
    double e = static_cast<double>(workload.experience_words);
    // Pull costs in words: indices+samples for the learner, inserted
    // experiences from the actors, sampled indices from the RM.
    struct Primitive {
        std::string device;
        double words;
    };
    const Primitive primitives[3] = {
        {learner_device, bs * (e + 1.0)},
        {actors_device, static_cast<double>(workload.num_actors) * e},
        {rm_device, bs},
    };

    std::string chosen;
    double min_traffic = std::numeric_limits<double>::infinity();
    for (const Primitive& candidate : primitives) {
        double traffic = 0.0;
        for (const Primitive& p : primitives) {
            const LinkSpec& link = links.get(candidate.device, p.device);
            traffic += p.words * kWordBytes / link.bandwidth_bps;
        }
        if (traffic < min_traffic) {
            min_traffic = traffic;
            chosen = candidate.device;
        }
    }
    return chosen;
}

Composition compose(const std::vector<DeviceSpec>& devices, const LinkTable& links,
                    const WorkloadSpec& workload, const ComposeOptions& options) {
    std::string host = options.host_device;
    if (host.empty()) {
        for (const DeviceSpec& d : devices)
            if (d.kind == DeviceKind::kCpu) {
                host = d.name;
                break;
            }
        if (host.empty()) throw ConfigError("compose: no cpu-kind device to host the actors");
    }

    AssignmentMatrix matrix = build_assignment_matrix(devices, links, workload);
    PlacementResult placed = place_primitives(matrix, links, workload, options.metric, host,
                                              options.comm_reduction);

    Composition composition;
    composition.rm_device = placed.rm_device;
    composition.learner_device = placed.learner_device;
    composition.storage_device =
        place_storage(placed.learner_device, host, placed.rm_device, links, workload);
    composition.t_itr_s = placed.t_itr.seconds;
    composition.eps = static_cast<double>(workload.batch_size) / placed.t_itr.seconds;
    composition.total_power_w = placed.total_power_w;
    composition.eps_per_watt = composition.eps / placed.total_power_w;
    composition.breakdown = placed.t_itr.breakdown;
    composition.metric = to_string(options.metric);
    composition.batch_size = workload.batch_size;
    return composition;
}

std::string Composition::to_json() const {
    nlohmann::ordered_json j;
    j["rm_device"] = rm_device;
    j["learner_device"] = learner_device;
    j["storage_device"] = storage_device;
    j["t_itr_s"] = t_itr_s;
    j["eps"] = eps;
    j["eps_per_watt"] = eps_per_watt;
    j["total_power_w"] = total_power_w;
    j["metric"] = metric;
    j["batch_size"] = batch_size;
    j["breakdown"] = {
        {"sampling_s", breakdown.sampling_s},
        {"comm_sample_s", breakdown.comm_sample_s},
        {"update_s", breakdown.update_s},
        {"comm_update_s", breakdown.comm_update_s},
        {"learner_s", breakdown.learner_s},
        {"insert_s", breakdown.insert_s},
        {"comm_insert_s", breakdown.comm_insert_s},
        {"insert_bound", breakdown.insert_bound},
    };
    return j.dump(2) + "\n";
}

Composition Composition::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("composition JSON parse error: ") + e.what());
    }
    Composition c;
    try {
        c.rm_device = j.at("rm_device").get<std::string>();
        c.learner_device = j.at("learner_device").get<std::string>();
        c.storage_device = j.at("storage_device").get<std::string>();
        c.t_itr_s = j.at("t_itr_s").get<double>();
        c.eps = j.at("eps").get<double>();
        c.eps_per_watt = j.at("eps_per_watt").get<double>();
        c.total_power_w = j.at("total_power_w").get<double>();
        c.metric = j.at("metric").get<std::string>();
        c.batch_size = j.at("batch_size").get<std::size_t>();
        const auto& b = j.at("breakdown");
        c.breakdown.sampling_s = b.at("sampling_s").get<double>();
        c.breakdown.comm_sample_s = b.at("comm_sample_s").get<double>();
        c.breakdown.update_s = b.at("update_s").get<double>();
        c.breakdown.comm_update_s = b.at("comm_update_s").get<double>();
        c.breakdown.learner_s = b.at("learner_s").get<double>();
        c.breakdown.insert_s = b.at("insert_s").get<double>();
        c.breakdown.comm_insert_s = b.at("comm_insert_s").get<double>();
        c.breakdown.insert_bound = b.at("insert_bound").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("composition JSON missing field: ") + e.what());
    }
    return c;
}

}  // namespace drl
