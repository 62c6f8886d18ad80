#pragma once

#include <string>
#include <utility>

#include "drl/perf_model.hpp"

namespace drl {

enum class ObjectiveMetric { kThroughput, kPowerEfficiency };

std::string to_string(ObjectiveMetric metric);
ObjectiveMetric objective_from_string(const std::string& s);

// Per-term decomposition of one iteration's modeled latency.
struct TitrBreakdown {
    double sampling_s = 0.0;
    double comm_sample_s = 0.0;   // sampled data, rm -> learner
    double update_s = 0.0;
    double comm_update_s = 0.0;   // new priorities, learner -> rm
    double learner_s = 0.0;
    double insert_s = 0.0;
    double comm_insert_s = 0.0;   // collected experiences, host -> rm
    bool insert_bound = false;    // which max() branch dominated
};

struct TitrResult {
    double seconds = 0.0;
    TitrBreakdown breakdown;
};

// Inter-primitive transfer cost. Same-device traffic uses the intra-device
// link when communication reduction is on (or the endpoints already sit on
// the host); otherwise it makes the two host hops.
double route_comm(const LinkTable& links, const std::string& from, const std::string& to,
                  const std::string& host, double data_bytes, bool comm_reduction);

// One-iteration latency for RM on `rm_device` and Learner on `learner_device`:
//   T = T_sampling + comm(rm->learner)
//       + max(T_insert + comm(host->rm), T_update + comm(learner->rm) + T_learner)
// Uses the co-residence column when the two devices coincide. Throws
// InfeasibleError for infeasible pairs.
TitrResult t_itr(const AssignmentMatrix& matrix, const LinkTable& links,
                 const WorkloadSpec& workload, const std::string& rm_device,
                 const std::string& learner_device, const std::string& host_device,
                 bool comm_reduction);

// Words crossing device boundaries in one iteration; the placement tie-break.
double pair_traffic_words(const WorkloadSpec& workload, const std::string& rm_device,
                          const std::string& learner_device, const std::string& host_device);

struct PlacementResult {
    std::string rm_device;
    std::string learner_device;
    TitrResult t_itr;
    double objective = 0.0;
    double total_power_w = 0.0;
};

// Exhaustive O(M^2) scan of device pairs. Objective: BS/T_itr, or
// BS/(T_itr * total power) for power efficiency. Equal objectives fall back to
// lowest traffic, then device-name order. Throws InfeasibleError when no pair
// is feasible.
PlacementResult place_primitives(const AssignmentMatrix& matrix, const LinkTable& links,
                                 const WorkloadSpec& workload, ObjectiveMetric metric,
                                 const std::string& host_device, bool comm_reduction);

// Algorithm-1 step 2: pick the Data Storage host among {Learner, Actors, RM}
// devices minimizing total traffic time over the per-primitive pull costs.
std::string place_storage(const std::string& learner_device, const std::string& actors_device,
                          const std::string& rm_device, const LinkTable& links,
                          const WorkloadSpec& workload);

struct Composition {
    std::string rm_device;
    std::string learner_device;
    std::string storage_device;
    double t_itr_s = 0.0;
    double eps = 0.0;
    double eps_per_watt = 0.0;
    double total_power_w = 0.0;
    TitrBreakdown breakdown;
    std::string metric;
    std::size_t batch_size = 0;

    std::string to_json() const;                    // stable field order
    static Composition from_json(const std::string& text);
};

struct ComposeOptions {
    ObjectiveMetric metric = ObjectiveMetric::kThroughput;
    std::string host_device;  // empty: first cpu-kind device
    bool comm_reduction = true;
};

Composition compose(const std::vector<DeviceSpec>& devices, const LinkTable& links,
                    const WorkloadSpec& workload, const ComposeOptions& options);

// Power drawn by the distinct devices a placement uses (host included when it
// hosts no primitive).
double placement_power(const AssignmentMatrix& matrix, const std::string& rm_device,
                       const std::string& learner_device, const std::string& host_device);

}  // namespace drl
