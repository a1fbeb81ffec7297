// Command-line front end: simulate the protocol, sweep key-rate curves,
// optimize source parameters, and run the verification oracle.
//
// Exit codes: 0 success, 1 validation/config error, 2 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "snsqkd/estimator.hpp"
#include "snsqkd/model.hpp"
#include "snsqkd/oracle.hpp"
#include "snsqkd/simulator.hpp"

namespace {

using nlohmann::json;
using namespace snsqkd;

struct ExperimentConfig {
    ProtocolParams protocol;
    ChannelParams channel;
    std::uint64_t seed = 1;
    std::vector<double> sweep_distances;
    std::vector<double> sweep_misalignment;
    std::string out_dir = "out";
    int oracle_cutoff = 40;
    std::int64_t cauchy_trials = 1000;
    std::int64_t eph_windows = 200000;
    int quadrature_nodes = 2048;
};

std::string line_anchor(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    std::ostringstream os;
    os << "line " << line << ", column " << col;
    return os.str();
}

json parse_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw validation_error("config parse error in " + path + " at " +
                               line_anchor(text, e.byte) + ": " + e.what());
    }
}

void check_top_fields(const json& j) {
    static const std::set<std::string> allowed{"protocol", "channel", "seed",   "sweep",
                                              "output",   "oracle",  "quadrature_nodes"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw validation_error("config: unknown top-level field \"" + it.key() + "\"");
        }
    }
}

ExperimentConfig load_config(const std::string& path) {
    const json j = parse_document(path);
    if (!j.is_object()) throw validation_error("config: expected a JSON object");
    check_top_fields(j);
    ExperimentConfig cfg;
    if (j.contains("protocol")) cfg.protocol = protocol_params_from_json(j.at("protocol"));
    if (j.contains("channel")) cfg.channel = channel_params_from_json(j.at("channel"));
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("quadrature_nodes")) cfg.quadrature_nodes = j.at("quadrature_nodes").get<int>();
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        for (auto it = s.begin(); it != s.end(); ++it) {
            if (it.key() != "distances_km" && it.key() != "misalignment") {
                throw validation_error("config.sweep: unknown field \"" + it.key() + "\"");
            }
        }
        if (s.contains("distances_km"))
            cfg.sweep_distances = s.at("distances_km").get<std::vector<double>>();
        if (s.contains("misalignment"))
            cfg.sweep_misalignment = s.at("misalignment").get<std::vector<double>>();
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        for (auto it = o.begin(); it != o.end(); ++it) {
            if (it.key() != "dir") throw validation_error("config.output: unknown field \"" +
                                                          it.key() + "\"");
        }
        if (o.contains("dir")) cfg.out_dir = o.at("dir").get<std::string>();
    }
    if (j.contains("oracle")) {
        const json& o = j.at("oracle");
        for (auto it = o.begin(); it != o.end(); ++it) {
            if (it.key() != "cutoff" && it.key() != "cauchy_trials" && it.key() != "eph_windows") {
                throw validation_error("config.oracle: unknown field \"" + it.key() + "\"");
            }
        }
        if (o.contains("cutoff")) cfg.oracle_cutoff = o.at("cutoff").get<int>();
        if (o.contains("cauchy_trials")) cfg.cauchy_trials = o.at("cauchy_trials").get<std::int64_t>();
        if (o.contains("eph_windows")) cfg.eph_windows = o.at("eph_windows").get<std::int64_t>();
    }
    return cfg;
}

json config_echo(const ExperimentConfig& cfg) {
    return json{{"protocol", to_json(cfg.protocol)},
                {"channel", to_json(cfg.channel)},
                {"seed", cfg.seed}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write " + path.string());
    out << text;
}

std::string fmt17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

int cmd_simulate(const ExperimentConfig& cfg, int threads) {
    SimulationOptions opts;
    opts.threads = threads;
    const SimulationResult res = run(cfg.protocol, cfg.channel, cfg.seed, opts);

    std::filesystem::create_directories(cfg.out_dir);
    json report = to_json(res);
    report["config"] = config_echo(cfg);
    write_text(std::filesystem::path(cfg.out_dir) / "simulation_report.json", report.dump(2) + "\n");

    std::ostringstream csv;
    csv << "# config: " << config_echo(cfg).dump() << "\n";
    write_tally_csv(csv, res.tally);
    write_text(std::filesystem::path(cfg.out_dir) / "tallies.csv", csv.str());

    std::cout << "simulated " << cfg.protocol.n_windows << " windows (seed " << cfg.seed << ")\n";
    if (res.e_z_observed) {
        std::cout << "observed E_Z (subset v): " << *res.e_z_observed << "\n";
    } else {
        std::cout << "observed E_Z (subset v): undefined (no effective events)\n";
    }
    std::cout << "wrote " << cfg.out_dir << "/simulation_report.json and tallies.csv\n";
    return 0;
}

int cmd_curve(const ExperimentConfig& cfg, PhaseMode mode) {
    if (cfg.sweep_distances.empty() || cfg.sweep_misalignment.empty()) {
        throw validation_error("curve: config.sweep.distances_km and misalignment must be non-empty");
    }
    std::vector<double> eas = cfg.sweep_misalignment;
    std::vector<double> ls = cfg.sweep_distances;
    std::sort(eas.begin(), eas.end());
    std::sort(ls.begin(), ls.end());

    std::ostringstream csv;
    csv << "# config: " << config_echo(cfg).dump() << "\n";
    csv << "L_km,e_a,q,mu,lambda,E_Z,e_ph_upper,rate_per_window,log10_rate\n";
    for (double ea : eas) {
        for (double l : ls) {
            ChannelParams ch = cfg.channel;
            ch.distance_km = l;
            ch.e_a = ea;
            const OptimizationResult opt = optimize(ch, cfg.protocol.f, mode,
                                                    cfg.quadrature_nodes);
            const KeyRateReport& r = opt.report;
            csv << fmt17(l) << ',' << fmt17(ea) << ',' << fmt17(opt.q) << ',' << fmt17(opt.mu)
                << ',' << fmt17(opt.lambda) << ',' << fmt17(r.e_z) << ',' << fmt17(r.e_ph_upper)
                << ',' << fmt17(r.rate_per_window) << ',';
            if (r.rate_per_window > 0.0) csv << fmt17(std::log10(r.rate_per_window));
            csv << '\n';
        }
    }
    std::filesystem::create_directories(cfg.out_dir);
    write_text(std::filesystem::path(cfg.out_dir) / "curve.csv", csv.str());
    std::cout << "wrote " << cfg.out_dir << "/curve.csv (" << eas.size() * ls.size()
              << " points)\n";
    return 0;
}

int cmd_optimize(const ExperimentConfig& cfg, PhaseMode mode) {
    const OptimizationResult opt = optimize(cfg.channel, cfg.protocol.f, mode,
                                            cfg.quadrature_nodes);
    json report = to_json(opt);
    report["config"] = config_echo(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    write_text(std::filesystem::path(cfg.out_dir) / "optimize_report.json", report.dump(2) + "\n");
    std::cout << "L = " << cfg.channel.distance_km << " km, e_a = " << cfg.channel.e_a << ", mode "
              << to_string(mode) << "\n";
    std::cout << "  q* = " << opt.q << ", mu* = " << opt.mu;
    if (mode == PhaseMode::post_selection) std::cout << ", lambda* = " << opt.lambda;
    std::cout << "\n  rate = " << opt.report.rate_per_window
              << (opt.report.no_key ? "  (no key)" : "") << "\n";
    return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
    const oracle::VerifyReport rep =
        oracle::run_verification_suite(cfg.oracle_cutoff, cfg.cauchy_trials, cfg.seed);

    std::cout << std::left << std::setw(52) << "identity" << std::setw(14) << "value"
              << std::setw(12) << "tolerance" << "status\n";
    for (const auto& row : rep.rows) {
        std::cout << std::left << std::setw(52) << row.name << std::setw(14)
                  << std::setprecision(4) << std::scientific << row.value << std::setw(12)
                  << row.tolerance << (row.pass ? "pass" : "FAIL") << "\n"
                  << std::defaultfloat;
    }
    json report = oracle::to_json(rep);
    report["config"] = config_echo(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    write_text(std::filesystem::path(cfg.out_dir) / "oracle_report.json", report.dump(2) + "\n");
    std::cout << (rep.all_pass ? "all identities pass\n" : "VERIFICATION FAILURES detected\n");
    return rep.all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sending-or-not-sending twin-field QKD simulator and security analyzer"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string mode_str;
    std::int64_t seed = -1;
    int threads = 1;

    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--seed", seed, "override config seed");
    app.add_option("--out", out_dir, "override output directory");
    app.add_option("--threads", threads, "worker threads for the simulator");
    app.add_option("--mode", mode_str, "override phase mode: compensation|postselection")
        ->check(CLI::IsMember({"compensation", "postselection"}));

    auto* sim = app.add_subcommand("simulate", "Monte Carlo run of the real protocol");
    auto* curve = app.add_subcommand("curve", "optimized key rate vs distance sweep (CSV)");
    auto* opt = app.add_subcommand("optimize", "optimize (q, mu[, lambda]) for one channel");
    auto* verify = app.add_subcommand("verify", "run the Fock-space verification oracle");
    for (auto* sc : {sim, curve, opt, verify}) sc->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        PhaseMode mode = cfg.protocol.phase_mode;
        if (!mode_str.empty()) {
            mode = mode_str == "compensation" ? PhaseMode::compensation
                                              : PhaseMode::post_selection;
            cfg.protocol.phase_mode = mode;
        }

        if (sim->parsed()) return cmd_simulate(cfg, threads);
        if (curve->parsed()) return cmd_curve(cfg, mode);
        if (opt->parsed()) return cmd_optimize(cfg, mode);
        if (verify->parsed()) return cmd_verify(cfg);
        return 1;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
