#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "drl/composer.hpp"
#include "drl/errors.hpp"

using drl::AssignmentMatrix;
using drl::Column;
using drl::Composition;
using drl::DeviceKind;
using drl::DeviceSpec;
using drl::LatencySet;
using drl::LinkSpec;
using drl::LinkTable;
using drl::MatrixCell;
using drl::ObjectiveMetric;
using drl::WorkloadSpec;

namespace {

// Hand-assembled matrix: latency numbers are inputs here, not derived.
AssignmentMatrix make_matrix(const std::vector<std::string>& names,
                             const std::vector<std::array<LatencySet, 3>>& lat,
                             const std::vector<std::array<double, 3>>& power,
                             const std::vector<std::array<bool, 3>>& feasible) {
    AssignmentMatrix m;
    for (std::size_t d = 0; d < names.size(); ++d) {
        DeviceSpec spec;
        spec.name = names[d];
        spec.kind = d == 0 ? DeviceKind::kCpu
                           : (d == 1 ? DeviceKind::kGpu : DeviceKind::kFpga);
        m.devices.push_back(spec);
        std::array<MatrixCell, 3> row;
        for (std::size_t c = 0; c < 3; ++c) {
            row[c].feasible = feasible[d][c];
            row[c].latency = lat[d][c];
            row[c].power_w = power[d][c];
        }
        m.cells.push_back(row);
    }
    return m;
}

LinkTable zero_links(const std::vector<std::string>& names) {
    std::vector<LinkSpec> links;
    for (const auto& a : names)
        for (const auto& b : names)
            links.push_back({a, b, 0.0, std::numeric_limits<double>::infinity()});
    return LinkTable(links);
}

WorkloadSpec basic_workload(std::size_t bs = 32) {
    WorkloadSpec w;
    w.batch_size = bs;
    w.experience_words = 5;
    w.num_actors = 8;
    return w;
}

// Second implementation of the iteration-latency formula for the oracle.
double titr_alt(double t_s, double c_s, double t_i, double c_i, double t_u, double c_u,
                double t_l) {
    return t_s + c_s + std::max(t_i + c_i, t_u + c_u + t_l);
}

}  // namespace

TEST_CASE("t_itr with zero comm follows the max form") {
    // T_s=2, T_ins=1, T_up=1, T_L=5 -> 2 + max(1, 6) = 8
    auto m = make_matrix(
        {"cpu", "dev"},
        {{LatencySet{2, 1, 1, 0}, LatencySet{0, 0, 0, 5}, LatencySet{2, 1, 1, 5}},
         {LatencySet{2, 1, 1, 0}, LatencySet{0, 0, 0, 5}, LatencySet{2, 1, 1, 5}}},
        {{10, 10, 15}, {10, 10, 15}},
        {{true, true, true}, {true, true, true}});
    auto links = zero_links({"cpu", "dev"});
    auto w = basic_workload();
    auto r = drl::t_itr(m, links, w, "cpu", "dev", "cpu", true);
    CHECK(r.seconds == 8.0);
    CHECK_FALSE(r.breakdown.insert_bound);

    // insertion dominating: T_ins=10 -> T_itr = T_s + T_ins
    auto m2 = make_matrix(
        {"cpu", "dev"},
        {{LatencySet{2, 1, 10, 0}, LatencySet{0, 0, 0, 5}, LatencySet{2, 1, 10, 5}},
         {LatencySet{2, 1, 10, 0}, LatencySet{0, 0, 0, 5}, LatencySet{2, 1, 10, 5}}},
        {{10, 10, 15}, {10, 10, 15}},
        {{true, true, true}, {true, true, true}});
    auto r2 = drl::t_itr(m2, links, w, "cpu", "dev", "cpu", true);
    CHECK(r2.seconds == 12.0);
    CHECK(r2.breakdown.insert_bound);
}

TEST_CASE("t_itr matches an independent second implementation on random instances") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lat(1e-6, 1e-2);
    for (int i = 0; i < 300; ++i) {
        LatencySet rm{lat(rng), lat(rng), lat(rng), 0};
        LatencySet ln{0, 0, 0, lat(rng)};
        LatencySet both{rm.sampling_s, rm.update_s, rm.insert_s, ln.learner_s};
        auto m = make_matrix({"cpu", "acc"},
                             {{rm, ln, both}, {rm, ln, both}},
                             {{10, 20, 25}, {10, 20, 25}},
                             {{true, true, true}, {true, true, true}});
        double link_lat = lat(rng) * 1e-3;
        std::vector<LinkSpec> links{{"cpu", "acc", link_lat, 16e9},
                                    {"cpu", "cpu", 0, 1e12},
                                    {"acc", "acc", 0, 1e12}};
        LinkTable table(std::move(links));
        auto w = basic_workload();

        auto r = drl::t_itr(m, table, w, "acc", "cpu", "cpu", true);
        double bs = 32, e = 5;
        double c_s = link_lat + bs * e * 8 / 16e9;
        double c_u = link_lat + bs * 8 / 16e9;
        double c_i = link_lat + bs * e * 8 / 16e9;
        CHECK(r.seconds == doctest::Approx(titr_alt(rm.sampling_s, c_s, rm.insert_s, c_i,
                                                    rm.update_s, c_u, ln.learner_s))
                               .epsilon(1e-12));
    }
}

TEST_CASE("co-residence uses the third column and the intra link") {
    auto m = make_matrix(
        {"cpu", "acc"},
        {{LatencySet{1, 1, 1, 0}, LatencySet{0, 0, 0, 1}, LatencySet{2, 2, 2, 3}},
         {LatencySet{1, 1, 1, 0}, LatencySet{0, 0, 0, 1}, LatencySet{2, 2, 2, 3}}},
        {{10, 10, 12}, {10, 10, 12}},
        {{true, true, true}, {true, true, true}});
    std::vector<LinkSpec> links{{"cpu", "acc", 1.0, 1e18},
                                {"cpu", "cpu", 0, 1e18},
                                {"acc", "acc", 0.25, 1e18}};
    LinkTable table(std::move(links));
    auto w = basic_workload();

    // comm_reduction on: pair traffic stays on the intra link; the insert hop
    // still crosses from the host
    auto r = drl::t_itr(m, table, w, "acc", "acc", "cpu", true);
    CHECK(r.seconds == doctest::Approx(2 + 0.25 + std::max(2 + 1.0, 2 + 0.25 + 3.0)));

    // comm_reduction off: same-device traffic makes two host hops
    auto r2 = drl::t_itr(m, table, w, "acc", "acc", "cpu", false);
    CHECK(r2.seconds == doctest::Approx(2 + 2.0 + std::max(2 + 1.0, 2 + 2.0 + 3.0)));
}

TEST_CASE("infeasible pairs are rejected") {
    auto m = make_matrix({"cpu"},
                         {{LatencySet{1, 1, 1, 0}, LatencySet{0, 0, 0, 1}, LatencySet{}}},
                         {{10, 10, 0}},
                         {{true, true, false}});
    auto links = zero_links({"cpu"});
    auto w = basic_workload();
    CHECK_THROWS_AS(drl::t_itr(m, links, w, "cpu", "cpu", "cpu", true), drl::InfeasibleError);
    CHECK_THROWS_AS(drl::t_itr(m, links, w, "cpu", "nope", "cpu", true), drl::InfeasibleError);
}

TEST_CASE("single device forces the co-resident composition") {
    auto m = make_matrix({"cpu"},
                         {{LatencySet{1, 1, 1, 0}, LatencySet{0, 0, 0, 1},
                           LatencySet{1, 1, 1, 2}}},
                         {{10, 10, 12}},
                         {{true, true, true}});
    auto links = zero_links({"cpu"});
    auto w = basic_workload();
    auto placed = drl::place_primitives(m, links, w, ObjectiveMetric::kThroughput, "cpu", true);
    CHECK(placed.rm_device == "cpu");
    CHECK(placed.learner_device == "cpu");
}

TEST_CASE("fast RM device pairs with fast learner device over cheap links") {
    // fpga: lowest RM latencies; gpu: lowest learner latency
    auto m = make_matrix(
        {"cpu", "gpu", "fpga"},
        {{LatencySet{50e-6, 10e-6, 10e-6, 0}, LatencySet{0, 0, 0, 400e-6},
          LatencySet{80e-6, 15e-6, 15e-6, 700e-6}},
         {LatencySet{20e-6, 5e-6, 5e-6, 0}, LatencySet{0, 0, 0, 40e-6},
          LatencySet{30e-6, 8e-6, 8e-6, 60e-6}},
         {LatencySet{3e-6, 1e-6, 1e-6, 0}, LatencySet{0, 0, 0, 90e-6},
          LatencySet{3e-6, 1e-6, 1e-6, 95e-6}}},
        {{80, 120, 150}, {90, 220, 260}, {20, 30, 40}},
        {{true, true, true}, {true, true, true}, {true, true, true}});
    std::vector<LinkSpec> links;
    for (std::string a : {"cpu", "gpu", "fpga"})
        for (std::string b : {"cpu", "gpu", "fpga"})
            links.push_back({a, b, a == b ? 0 : 1e-6, a == b ? 1e12 : 16e9});
    LinkTable table(std::move(links));
    auto w = basic_workload();

    auto placed =
        drl::place_primitives(m, table, w, ObjectiveMetric::kThroughput, "cpu", true);
    CHECK(placed.rm_device == "fpga");
    CHECK(placed.learner_device == "gpu");

    // brute force over all pairs confirms the optimum
    double best = placed.objective;
    for (std::string i : {"cpu", "gpu", "fpga"}) {
        for (std::string j : {"cpu", "gpu", "fpga"}) {
            auto r = drl::t_itr(m, table, w, i, j, "cpu", true);
            CHECK(32.0 / r.seconds <= best + 1e-9);
        }
    }
}

TEST_CASE("exhaustive equivalence and scale invariance on random matrices") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> lat(1e-6, 1e-3);
    std::uniform_real_distribution<double> pw(10, 300);
    std::uniform_int_distribution<int> m_dist(1, 4);
    std::uniform_int_distribution<int> feas(0, 9);

    for (int trial = 0; trial < 60; ++trial) {
        int m_count = m_dist(rng);
        std::vector<std::string> names;
        std::vector<std::array<LatencySet, 3>> lats;
        std::vector<std::array<double, 3>> powers;
        std::vector<std::array<bool, 3>> flags;
        for (int d = 0; d < m_count; ++d) {
            names.push_back("dev" + std::to_string(d));
            LatencySet rm{lat(rng), lat(rng), lat(rng), 0};
            LatencySet ln{0, 0, 0, lat(rng)};
            LatencySet both{rm.sampling_s * 1.5, rm.update_s * 1.5, rm.insert_s * 1.5,
                            ln.learner_s * 1.5};
            lats.push_back({rm, ln, both});
            powers.push_back({pw(rng), pw(rng), pw(rng)});
            // occasional infeasible cells (device 0 stays fully feasible)
            flags.push_back({d == 0 || feas(rng) > 1, d == 0 || feas(rng) > 1,
                             d == 0 || feas(rng) > 2});
        }
        auto matrix = make_matrix(names, lats, powers, flags);
        std::vector<LinkSpec> links;
        for (const auto& a : names)
            for (const auto& b : names)
                links.push_back({a, b, a == b ? 0 : lat(rng), a == b ? 1e12 : 16e9});
        LinkTable table(std::move(links));
        auto w = basic_workload();

        for (auto metric : {ObjectiveMetric::kThroughput, ObjectiveMetric::kPowerEfficiency}) {
            auto placed = drl::place_primitives(matrix, table, w, metric, names[0], true);
            // brute force the same objective
            double best = -1;
            for (const auto& i : names) {
                for (const auto& j : names) {
                    try {
                        auto r = drl::t_itr(matrix, table, w, i, j, names[0], true);
                        double obj = 32.0 / r.seconds;
                        if (metric == ObjectiveMetric::kPowerEfficiency)
                            obj /= drl::placement_power(matrix, i, j, names[0]);
                        best = std::max(best, obj);
                    } catch (const drl::InfeasibleError&) {
                    }
                }
            }
            CHECK(placed.objective == doctest::Approx(best).epsilon(1e-12));
        }

        // scale invariance: multiply every latency in the matrix by c > 0
        const double c = 3.7;
        auto scaled = matrix;
        for (auto& row : scaled.cells) {
            for (auto& cell : row) {
                cell.latency.sampling_s *= c;
                cell.latency.update_s *= c;
                cell.latency.insert_s *= c;
                cell.latency.learner_s *= c;
            }
        }
        std::vector<LinkSpec> scaled_links;
        for (const auto& l : table.all())
            scaled_links.push_back({l.src, l.dst, l.latency_s * c, l.bandwidth_bps / c});
        LinkTable scaled_table(std::move(scaled_links));
        auto a = drl::place_primitives(matrix, table, w, ObjectiveMetric::kThroughput,
                                       names[0], true);
        auto b = drl::place_primitives(scaled, scaled_table, w, ObjectiveMetric::kThroughput,
                                       names[0], true);
        CHECK(a.rm_device == b.rm_device);
        CHECK(a.learner_device == b.learner_device);
    }
}

TEST_CASE("equal-objective pairs resolve by lowest traffic then name") {
    LatencySet rm{1e-4, 1e-5, 1e-5, 0};
    LatencySet ln{0, 0, 0, 1e-4};
    LatencySet both{1e-4, 1e-5, 1e-5, 1e-4};
    auto m = make_matrix({"cpu", "acc_a", "acc_b"},
                         {{rm, ln, both}, {rm, ln, both}, {rm, ln, both}},
                         {{50, 50, 60}, {50, 50, 60}, {50, 50, 60}},
                         {{true, true, true}, {true, true, true}, {true, true, true}});
    auto links = zero_links({"cpu", "acc_a", "acc_b"});
    auto w = basic_workload();

    auto placed = drl::place_primitives(m, links, w, ObjectiveMetric::kThroughput, "cpu", true);
    // all pairs tie on T_itr (zero-cost links); co-residence on the host has
    // zero cross-device words and cpu sorts lexicographically first
    CHECK(placed.rm_device == "cpu");
    CHECK(placed.learner_device == "cpu");

    // pure traffic comparison across constructed pairs
    CHECK(drl::pair_traffic_words(w, "cpu", "cpu", "cpu") == 0.0);
    CHECK(drl::pair_traffic_words(w, "acc_a", "acc_a", "cpu") == 32.0 * 5);
    CHECK(drl::pair_traffic_words(w, "acc_a", "acc_b", "cpu") ==
          32.0 * 5 + 32.0 + 32.0 * 5);
}

TEST_CASE("storage placement follows the traffic minimization") {
    auto w = basic_workload(512);
    w.experience_words = 5;
    w.num_actors = 8;
    // C_learner = 512*6 = 3072 words, C_actor = 40, C_rm = 512

    SUBCASE("all primitives on one device: that device wins") {
        auto links = zero_links({"cpu"});
        CHECK(drl::place_storage("cpu", "cpu", "cpu", links, w) == "cpu");
    }

    SUBCASE("learner across a slow link pulls storage to itself") {
        std::vector<LinkSpec> links{{"cpu", "gpu", 0, 1e9},
                                    {"cpu", "cpu", 0, 1e12},
                                    {"gpu", "gpu", 0, 1e12}};
        LinkTable table(std::move(links));
        CHECK(drl::place_storage("gpu", "cpu", "cpu", table, w) == "gpu");
    }

    SUBCASE("symmetric bandwidths: the biggest consumer (learner) wins") {
        std::vector<LinkSpec> links;
        for (std::string a : {"cpu", "gpu", "fpga"})
            for (std::string b : {"cpu", "gpu", "fpga"}) links.push_back({a, b, 0, 16e9});
        LinkTable table(std::move(links));
        CHECK(drl::place_storage("gpu", "cpu", "fpga", table, w) == "gpu");
    }

    SUBCASE("returned traffic is minimal over the candidates") {
        std::vector<LinkSpec> links{{"cpu", "gpu", 0, 2e9},   {"cpu", "fpga", 0, 8e9},
                                    {"gpu", "fpga", 0, 4e9},  {"cpu", "cpu", 0, 1e11},
                                    {"gpu", "gpu", 0, 1e11},  {"fpga", "fpga", 0, 1e11}};
        LinkTable table(std::move(links));
        std::string chosen = drl::place_storage("gpu", "cpu", "fpga", table, w);
        auto traffic = [&](const std::string& host) {
            double t = 0;
            t += 512.0 * 6 * 8 / table.get(host, "gpu").bandwidth_bps;
            t += 8.0 * 5 * 8 / table.get(host, "cpu").bandwidth_bps;
            t += 512.0 * 8 / table.get(host, "fpga").bandwidth_bps;
            return t;
        };
        for (std::string other : {"gpu", "cpu", "fpga"})
            CHECK(traffic(chosen) <= traffic(other) + 1e-18);
    }

    SUBCASE("missing link bandwidth is an error") {
        LinkTable table(std::vector<LinkSpec>{{"cpu", "cpu", 0, 1e11}});
        CHECK_THROWS_AS(drl::place_storage("gpu", "cpu", "cpu", table, w), drl::ConfigError);
    }
}

TEST_CASE("composition JSON round-trips losslessly") {
    Composition c;
    c.rm_device = "fpga";
    c.learner_device = "gpu";
    c.storage_device = "gpu";
    c.t_itr_s = 1.25e-4;
    c.eps = 32 / 1.25e-4;
    c.eps_per_watt = c.eps / 310.0;
    c.total_power_w = 310.0;
    c.breakdown.sampling_s = 3e-6;
    c.breakdown.comm_sample_s = 2e-6;
    c.breakdown.update_s = 1e-6;
    c.breakdown.comm_update_s = 1e-6;
    c.breakdown.learner_s = 9e-5;
    c.breakdown.insert_s = 1e-6;
    c.breakdown.comm_insert_s = 2e-6;
    c.breakdown.insert_bound = false;
    c.metric = "throughput";
    c.batch_size = 32;

    auto text = c.to_json();
    auto back = Composition::from_json(text);
    CHECK(back.rm_device == c.rm_device);
    CHECK(back.learner_device == c.learner_device);
    CHECK(back.storage_device == c.storage_device);
    CHECK(back.t_itr_s == c.t_itr_s);
    CHECK(back.eps == c.eps);
    CHECK(back.eps_per_watt == c.eps_per_watt);
    CHECK(back.total_power_w == c.total_power_w);
    CHECK(back.breakdown.learner_s == c.breakdown.learner_s);
    CHECK(back.batch_size == 32);
    CHECK(back.to_json() == text);  // byte-for-byte determinism

    CHECK_THROWS_AS(Composition::from_json("{broken"), drl::ConfigError);
    CHECK_THROWS_AS(Composition::from_json("{}"), drl::ConfigError);
}

TEST_CASE("predicted eps is exactly BS over T_itr") {
    std::vector<DeviceSpec> devices(1);
    devices[0].name = "cpu";
    devices[0].kind = DeviceKind::kCpu;
    devices[0].cores_or_lanes = 8;
    devices[0].per_mac_cost = 1e-9;
    devices[0].per_level_cost = 1e-8;
    devices[0].power_rm_w = 50;
    devices[0].power_learner_w = 60;
    devices[0].power_both_w = 70;
    auto links = zero_links({"cpu"});
    WorkloadSpec w = basic_workload();
    w.stage_macs = {100, 200};
    w.n_layers = 2;
    w.tree_depth = 3;

    drl::ComposeOptions opts;
    auto composition = drl::compose(devices, links, w, opts);
    CHECK(composition.eps == static_cast<double>(w.batch_size) / composition.t_itr_s);
    CHECK(composition.rm_device == "cpu");
    CHECK(composition.storage_device == "cpu");
    CHECK(composition.eps_per_watt == composition.eps / composition.total_power_w);
}
