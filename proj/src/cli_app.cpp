#include "drl/cli_app.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "drl/errors.hpp"
#include "drl/metrics.hpp"
#include "drl/runtime.hpp"

namespace drl {

namespace {

std::string format_seconds(double s) {
    std::ostringstream out;
    out << std::scientific << std::setprecision(3) << s;
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw RuntimeFailure("cannot write '" + path + "'");
    out << content;
}

std::string read_file_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonOpts {
    std::string config_path;
    std::string devices_path;
    std::string connections_path;
    std::string metric;
    std::int64_t seed = -1;
};

ToolConfig resolve_config(const CommonOpts& opts) {
    ToolConfig config = load_tool_config(opts.config_path);
    if (!opts.devices_path.empty()) config.device_file = opts.devices_path;
    if (!opts.connections_path.empty()) config.connection_file = opts.connections_path;
    if (!opts.metric.empty()) config.opt_metric = objective_from_string(opts.metric);
    if (opts.seed >= 0) config.seed = static_cast<std::uint64_t>(opts.seed);
    if (config.device_file.empty()) throw ConfigError("no device file given");
    if (config.connection_file.empty()) throw ConfigError("no connection file given");
    return config;
}

int cmd_compose(const CommonOpts& opts, const std::string& out_path) {
    ToolConfig config = resolve_config(opts);
    auto devices = load_devices_csv(config.device_file);
    LinkTable links(load_links_csv(config.connection_file));
    WorkloadSpec workload = make_workload(config);

    ComposeOptions copts;
    copts.metric = config.opt_metric;
    copts.comm_reduction = config.comm_reduction;
    Composition composition = compose(devices, links, workload, copts);

    AssignmentMatrix matrix = build_assignment_matrix(devices, links, workload);
    std::string host;
    for (const auto& d : devices)
        if (d.kind == DeviceKind::kCpu) {
            host = d.name;
            break;
        }
    std::cout << render_matrix_table(matrix) << "\n";
    std::cout << "T_itr grid (rows: RM device, cols: Learner device)\n";
    std::cout << render_titr_grid(matrix, links, workload, host, config.comm_reduction) << "\n";
    std::cout << "composition: RM=" << composition.rm_device
              << " Learner=" << composition.learner_device
              << " Storage=" << composition.storage_device
              << " T_itr=" << format_seconds(composition.t_itr_s)
              << " EPS=" << composition.eps << " EPS/W=" << composition.eps_per_watt << "\n";

    write_file(out_path, composition.to_json());
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_run(const CommonOpts& opts, const std::string& composition_path,
            const std::string& out_path, RunMode mode) {
    ToolConfig config = resolve_config(opts);
    config.mode = mode;
    auto devices = load_devices_csv(config.device_file);
    LinkTable links(load_links_csv(config.connection_file));

    Composition composition = Composition::from_json(read_file_or_throw(composition_path));
    TrainingReport report = run_training(config, composition, devices, links);

    write_file(out_path, report.to_json());
    std::cout << "iterations=" << report.iterations
              << " time_s=" << report.virtual_or_wall_time_s << " eps=" << report.eps
              << " final_mean_reward_100=" << report.final_mean_reward_100
              << (report.early_stop ? " (early stop)" : "") << "\n";
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_phi(const std::vector<std::string>& entries) {
    if (entries.empty()) throw ConfigError("phi: need at least one EPS value");
    std::vector<double> values;
    for (const std::string& entry : entries) {
        // accept bare numbers or label=value
        auto eq = entry.find('=');
        std::string num = eq == std::string::npos ? entry : entry.substr(eq + 1);
        try {
            values.push_back(std::stod(num));
        } catch (const std::exception&) {
            throw ConfigError("phi: bad EPS value '" + entry + "'");
        }
    }
    std::cout << "phi=" << portability_phi(values) << "\n";
    return 0;
}

int cmd_report(const std::string& composition_path, const std::string& report_path,
               double power_override) {
    double eps = 0.0;
    double power = power_override;
    if (!composition_path.empty()) {
        Composition c = Composition::from_json(read_file_or_throw(composition_path));
        eps = c.eps;
        if (power <= 0.0) power = c.total_power_w;
    }
    if (!report_path.empty()) {
        TrainingReport r = TrainingReport::from_json(read_file_or_throw(report_path));
        eps = r.eps;  // measured EPS wins over the prediction
    }
    if (eps <= 0.0) throw ConfigError("report: no EPS source (composition or report)");
    if (power <= 0.0) throw ConfigError("report: missing device power");
    std::cout << "eps=" << eps << " power_w=" << power
              << " eps_per_watt=" << eps_per_watt(eps, power) << "\n";
    return 0;
}

}  // namespace

std::string render_matrix_table(const AssignmentMatrix& matrix) {
    std::ostringstream out;
    out << std::left << std::setw(12) << "device" << std::setw(34) << "RM only"
        << std::setw(16) << "Learner only" << "RM & Learner\n";
    for (std::size_t d = 0; d < matrix.devices.size(); ++d) {
        out << std::setw(12) << matrix.devices[d].name;
        {
            const MatrixCell& cell = matrix.cell(d, Column::kRmOnly);
            std::string text = cell.feasible
                                   ? "s=" + format_seconds(cell.latency.sampling_s) +
                                         " u=" + format_seconds(cell.latency.update_s) +
                                         " i=" + format_seconds(cell.latency.insert_s)
                                   : "infeasible";
            out << std::setw(34) << text;
        }
        {
            const MatrixCell& cell = matrix.cell(d, Column::kLearnerOnly);
            std::string text = cell.feasible ? format_seconds(cell.latency.learner_s)
                                             : "infeasible";
            out << std::setw(16) << text;
        }
        {
            const MatrixCell& cell = matrix.cell(d, Column::kBoth);
            if (cell.feasible) {
                out << "s=" << format_seconds(cell.latency.sampling_s)
                    << " u=" << format_seconds(cell.latency.update_s)
                    << " i=" << format_seconds(cell.latency.insert_s)
                    << " l=" << format_seconds(cell.latency.learner_s);
            } else {
                out << "infeasible (" << cell.note << ")";
            }
        }
        out << "\n";
    }
    return out.str();
}

std::string render_titr_grid(const AssignmentMatrix& matrix, const LinkTable& links,
                             const WorkloadSpec& workload, const std::string& host_device,
                             bool comm_reduction) {
    std::ostringstream out;
    out << "rm\\learner";
    for (const auto& d : matrix.devices) out << "," << d.name;
    out << "\n";
    for (const auto& rm : matrix.devices) {
        out << rm.name;
        for (const auto& ln : matrix.devices) {
            out << ",";
            try {
                TitrResult r =
                    t_itr(matrix, links, workload, rm.name, ln.name, host_device, comm_reduction);
                out << format_seconds(r.seconds);
            } catch (const InfeasibleError&) {
                out << "inf";
            }
        }
        out << "\n";
    }
    return out.str();
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"DRL co-optimization toolkit: analytical device placement plus a "
                 "prioritized-replay actor/learner training runtime"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string out_path;
    std::string composition_path = "composition.json";
    std::vector<std::string> phi_entries;
    std::string report_composition;
    std::string report_file;
    double report_power = 0.0;

    auto add_common = [&](CLI::App* cmd, bool need_config) {
        auto* o = cmd->add_option("--config", opts.config_path, "tool config JSON");
        if (need_config) o->required();
        cmd->add_option("--devices", opts.devices_path, "device CSV (overrides config)");
        cmd->add_option("--connections", opts.connections_path,
                        "connection CSV (overrides config)");
        cmd->add_option("--metric", opts.metric, "throughput|power")
            ->check(CLI::IsMember({"throughput", "power", "power_efficiency"}));
        cmd->add_option("--seed", opts.seed, "RNG seed (overrides config)");
    };

    auto* compose_cmd = app.add_subcommand("compose", "pick devices and write composition.json");
    add_common(compose_cmd, true);
    compose_cmd->add_option("--out", out_path, "composition output path");

    auto* train_cmd = app.add_subcommand("train", "run real-mode training for a composition");
    add_common(train_cmd, true);
    train_cmd->add_option("--composition", composition_path, "composition JSON path");
    train_cmd->add_option("--out", out_path, "report output path");

    auto* sim_cmd = app.add_subcommand("simulate", "run virtual-clock training simulation");
    add_common(sim_cmd, true);
    sim_cmd->add_option("--composition", composition_path, "composition JSON path");
    sim_cmd->add_option("--out", out_path, "report output path");

    auto* phi_cmd = app.add_subcommand("phi", "harmonic-mean portability over EPS values");
    phi_cmd->add_option("--eps", phi_entries, "EPS values (bare or label=value)")
        ->required()
        ->delimiter(',');

    auto* report_cmd = app.add_subcommand("report", "EPS/Watt from composition or report");
    report_cmd->add_option("--composition", report_composition, "composition JSON");
    report_cmd->add_option("--report", report_file, "training report JSON");
    report_cmd->add_option("--power", report_power, "total power override (watts)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (compose_cmd->parsed())
            return cmd_compose(opts, out_path.empty() ? "composition.json" : out_path);
        if (train_cmd->parsed())
            return cmd_run(opts, composition_path, out_path.empty() ? "report.json" : out_path,
                           RunMode::kReal);
        if (sim_cmd->parsed())
            return cmd_run(opts, composition_path, out_path.empty() ? "report.json" : out_path,
                           RunMode::kSimulated);
        if (phi_cmd->parsed()) return cmd_phi(phi_entries);
        if (report_cmd->parsed()) return cmd_report(report_composition, report_file, report_power);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

}  // namespace drl
