#include "drl/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "drl/env.hpp"
#include "drl/errors.hpp"
#include "drl/sum_tree.hpp"

namespace drl {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace
        auto begin = field.find_first_not_of(" \t\r");
        auto end = field.find_last_not_of(" \t\r");
        fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": bad numeric value '" + s + "'");
    }
}

long parse_long(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": bad integer value '" + s + "'");
    }
}

void expect_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                   const std::string& path) {
    if (got != want) {
        std::string expected;
        for (const auto& c : want) expected += (expected.empty() ? "" : ",") + c;
        throw ConfigError(path + ": header must be '" + expected + "'");
    }
}

}  // namespace

std::vector<DeviceSpec> load_devices_csv(const std::string& path) {
    static const std::vector<std::string> kColumns = {
        "name",         "kind",           "cores_or_lanes", "dsp_count",
        "sram_bytes",   "clock_hz",       "per_mac_cost",   "per_level_cost",
        "kernel_overhead_s", "power_rm_w", "power_learner_w", "power_both_w"};

    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
    expect_header(split_csv_row(line), kColumns, path);

    std::vector<DeviceSpec> devices;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_row(line);
        std::string where = path + " row " + std::to_string(row);
        if (fields.size() != kColumns.size())
            throw ConfigError(where + ": expected " + std::to_string(kColumns.size()) +
                              " fields, got " + std::to_string(fields.size()));
        DeviceSpec d;
        d.name = fields[0];
        d.kind = device_kind_from_string(fields[1]);
        d.cores_or_lanes = parse_long(fields[2], where);
        d.dsp_count = parse_long(fields[3], where);
        d.sram_bytes = parse_double(fields[4], where);
        d.clock_hz = parse_double(fields[5], where);
        d.per_mac_cost = parse_double(fields[6], where);
        d.per_level_cost = parse_double(fields[7], where);
        d.kernel_overhead_s = parse_double(fields[8], where);
        d.power_rm_w = parse_double(fields[9], where);
        d.power_learner_w = parse_double(fields[10], where);
        d.power_both_w = parse_double(fields[11], where);
        if (d.name.empty()) throw ConfigError(where + ": device name is empty");
        if (d.clock_hz <= 0) throw ConfigError(where + ": clock_hz must be > 0");
        if (d.power_rm_w <= 0 || d.power_learner_w <= 0 || d.power_both_w <= 0)
            throw ConfigError(where + ": power columns must be > 0");
        devices.push_back(std::move(d));
    }
    if (devices.empty()) throw ConfigError(path + ": no devices");
    return devices;
}

std::vector<LinkSpec> load_links_csv(const std::string& path) {
    static const std::vector<std::string> kColumns = {"src", "dst", "latency_s",
                                                      "bandwidth_bps"};
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
    expect_header(split_csv_row(line), kColumns, path);

    std::vector<LinkSpec> links;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_row(line);
        std::string where = path + " row " + std::to_string(row);
        if (fields.size() != kColumns.size())
            throw ConfigError(where + ": expected 4 fields, got " +
                              std::to_string(fields.size()));
        LinkSpec l;
        l.src = fields[0];
        l.dst = fields[1];
        l.latency_s = parse_double(fields[2], where);
        l.bandwidth_bps = parse_double(fields[3], where);
        if (l.bandwidth_bps <= 0) throw ConfigError(where + ": bandwidth_bps must be > 0");
        links.push_back(std::move(l));
    }
    return links;
}

ToolConfig load_tool_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }

    ToolConfig c;
    try {
        if (j.contains("device_file")) c.device_file = j["device_file"].get<std::string>();
        if (j.contains("connection_file"))
            c.connection_file = j["connection_file"].get<std::string>();
        if (j.contains("opt_metric"))
            c.opt_metric = objective_from_string(j["opt_metric"].get<std::string>());

        if (j.contains("actors")) {
            const auto& a = j["actors"];
            if (a.contains("num_actors")) c.num_actors = a["num_actors"].get<int>();
            if (a.contains("env")) c.env_name = a["env"].get<std::string>();
            if (a.contains("episode_limit")) c.episode_limit = a["episode_limit"].get<long>();
            if (a.contains("batch_per_episode"))
                c.batch_per_episode = a["batch_per_episode"].get<bool>();
            if (a.contains("epsilon")) {
                const auto& e = a["epsilon"];
                c.epsilon.start = e.value("start", 1.0);
                c.epsilon.end = e.value("end", 0.05);
                c.epsilon.decay_steps = e.value("decay_steps", 10000L);
            }
        }
        if (j.contains("replay")) {
            const auto& r = j["replay"];
            if (r.contains("size")) c.replay_size = r["size"].get<std::size_t>();
            if (r.contains("fanout")) c.fanout = r["fanout"].get<unsigned>();
            if (r.contains("mode")) {
                std::string mode = r["mode"].get<std::string>();
                if (mode == "prioritized")
                    c.replay_mode = ReplayMode::kPrioritized;
                else if (mode == "uniform")
                    c.replay_mode = ReplayMode::kUniform;
                else
                    throw ConfigError(path + ": replay.mode must be prioritized|uniform");
            }
        }
        if (j.contains("learner")) {
            const auto& l = j["learner"];
            if (l.contains("layer_dims"))
                c.layer_dims = l["layer_dims"].get<std::vector<std::size_t>>();
            if (l.contains("learning_rate")) c.learning_rate = l["learning_rate"].get<double>();
            if (l.contains("gamma")) c.gamma = l["gamma"].get<double>();
            if (l.contains("batch_size")) c.batch_size = l["batch_size"].get<std::size_t>();
            if (l.contains("sub_batches")) c.sub_batches = l["sub_batches"].get<std::size_t>();
            if (l.contains("sync_period")) c.sync_period = l["sync_period"].get<std::size_t>();
        }
        if (j.contains("run")) {
            const auto& r = j["run"];
            if (r.contains("mode")) {
                std::string mode = r["mode"].get<std::string>();
                if (mode == "real")
                    c.mode = RunMode::kReal;
                else if (mode == "simulated")
                    c.mode = RunMode::kSimulated;
                else
                    throw ConfigError(path + ": run.mode must be real|simulated");
            }
            if (r.contains("max_iterations")) c.max_iterations = r["max_iterations"].get<long>();
            if (r.contains("seed")) c.seed = r["seed"].get<std::uint64_t>();
            if (r.contains("reward_threshold") && !r["reward_threshold"].is_null())
                c.reward_threshold = r["reward_threshold"].get<double>();
            if (r.contains("queue_capacity"))
                c.queue_capacity = r["queue_capacity"].get<std::size_t>();
            if (r.contains("dc_capacity")) c.dc_capacity = r["dc_capacity"].get<std::size_t>();
            if (r.contains("comm_reduction")) c.comm_reduction = r["comm_reduction"].get<bool>();
            if (r.contains("watchdog_polls")) c.watchdog_polls = r["watchdog_polls"].get<long>();
            if (r.contains("use_threads")) c.use_threads = r["use_threads"].get<bool>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }

    // Fill layer dims from the environment shape if the config leaves them out.
    if (c.layer_dims.empty()) {
        auto env = make_environment(c.env_name, c.episode_limit);
        c.layer_dims = {env->state_dim(), 64, 64, env->action_count()};
    } else {
        auto env = make_environment(c.env_name, c.episode_limit);
        if (c.layer_dims.front() != env->state_dim())
            throw ConfigError(path + ": layer_dims[0] must equal env state dim (" +
                              std::to_string(env->state_dim()) + ")");
        if (c.layer_dims.back() != env->action_count())
            throw ConfigError(path + ": layer_dims back must equal env action count (" +
                              std::to_string(env->action_count()) + ")");
    }

    if (c.num_actors < 1) throw ConfigError(path + ": num_actors must be >= 1");
    if (c.batch_size < 1) throw ConfigError(path + ": batch_size must be >= 1");
    if (c.replay_size < 1) throw ConfigError(path + ": replay.size must be >= 1");
    if (c.fanout < 2) throw ConfigError(path + ": replay.fanout must be >= 2");
    if (c.gamma < 0.0 || c.gamma > 1.0) throw ConfigError(path + ": gamma must be in [0,1]");
    if (c.epsilon.start < 0.0 || c.epsilon.start > 1.0 || c.epsilon.end < 0.0 ||
        c.epsilon.end > 1.0)
        throw ConfigError(path + ": epsilon must stay in [0,1]");
    if (c.max_iterations < 1) throw ConfigError(path + ": max_iterations must be >= 1");
    return c;
}

WorkloadSpec make_workload(const ToolConfig& config) {
    WorkloadSpec w;
    w.batch_size = config.batch_size;
    w.fanout = config.fanout;
    w.tree_depth = SumTree::depth_for(config.replay_size, config.fanout);
    w.replay_capacity = config.replay_size;
    auto env = make_environment(config.env_name, config.episode_limit);
    w.experience_words = 2 * env->state_dim() + 3;  // action, reward, done
    w.num_actors = config.num_actors;
    w.stage_macs = make_stage_macs(config.layer_dims);
    w.n_layers = config.layer_dims.size() - 1;
    w.learner_buffer_bytes = pipeline_buffer_bytes(config.layer_dims);
    return w;
}

}  // namespace drl
