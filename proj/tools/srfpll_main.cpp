// Command-line front end: tuning, Bode export, scenario simulation, metric
// recomputation, and recorded-data runs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "srfpll/errors.hpp"
#include "srfpll/metrics.hpp"
#include "srfpll/pll.hpp"
#include "srfpll/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIngest = 3;
constexpr int kExitNumerical = 4;

struct ErrorReporter {
    bool json = false;

    int fail(const std::string& type, const std::string& message, int code) const {
        if (json) {
            nlohmann::ordered_json j;
            j["error"] = {{"type", type}, {"message", message}, {"exit_code", code}};
            std::cerr << j.dump() << "\n";
        } else {
            std::cerr << "error: " << message << "\n";
        }
        return code;
    }
};

std::optional<srfpll::FeedForward> parse_ff(const std::string& text) {
    if (text == "off") {
        return srfpll::FeedForward{srfpll::FeedForwardMode::Off, 0.0};
    }
    if (text == "estimated") {
        return srfpll::FeedForward{srfpll::FeedForwardMode::Estimated, 0.0};
    }
    if (text.rfind("constant:", 0) == 0) {
        try {
            return srfpll::FeedForward{srfpll::FeedForwardMode::Constant,
                                       std::stod(text.substr(9))};
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<srfpll::TimeWindow> parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        return std::nullopt;
    }
    try {
        return srfpll::TimeWindow{std::stod(text.substr(0, colon)),
                                  std::stod(text.substr(colon + 1))};
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw srfpll::IngestError("cannot write '" + path.string() + "'");
    }
    out << content;
}

int run_simulation(srfpll::ScenarioConfig cfg, const std::string& out_dir,
                   std::optional<std::uint64_t> seed,
                   const std::optional<srfpll::FeedForward>& ff, bool paper_metrics) {
    if (seed) {
        if (!cfg.signal) {
            throw srfpll::ConfigError({"--seed applies only to synthetic scenarios"});
        }
        cfg.signal->disturbance.seed = *seed;
    }
    if (ff) {
        cfg.feedforward = *ff;
    }
    if (paper_metrics) {
        cfg.wrapped_metrics = false;
    }

    const auto result = srfpll::run_scenario(cfg);

    std::filesystem::create_directories(out_dir);
    const auto trace_path =
        std::filesystem::path(out_dir) /
        (cfg.output.trace.empty() ? cfg.name + "_trace.csv" : cfg.output.trace);
    const auto metrics_path =
        std::filesystem::path(out_dir) /
        (cfg.output.metrics.empty() ? cfg.name + "_metrics.json" : cfg.output.metrics);
    std::filesystem::create_directories(trace_path.parent_path());
    std::filesystem::create_directories(metrics_path.parent_path());
    {
        std::ofstream trace_out(trace_path, std::ios::binary);
        if (!trace_out) {
            throw srfpll::IngestError("cannot write '" + trace_path.string() + "'");
        }
        srfpll::write_trace_csv(result.trace, trace_out);
    }
    write_file(metrics_path, srfpll::metrics_to_json(result.metrics));

    std::printf("scenario   %s (%zu samples)\n", cfg.name.c_str(), result.trace.size());
    std::printf("gains      kp=%.6g ki=%.6g", result.gains.kp, result.gains.ki);
    if (result.omega_c > 0.0) {
        std::printf("  omega_c=%.6g rad/s", result.omega_c);
    }
    std::printf("\n");
    for (const auto& w : result.detected_loss) {
        std::printf("data loss  [%.6g, %.6g) s (auto-detected)\n", w.start, w.start + w.duration);
    }
    for (const auto& m : result.metrics) {
        if (m.has_phase_reference) {
            std::printf("metrics    [%g, %g) %s: E_sigma=%.6g E_me=%.6g E_rms=%.6g K=%zu\n",
                        m.window.start, m.window.end, m.mode.c_str(), m.e_sigma, m.e_me, m.e_rms,
                        m.count);
        } else {
            std::printf("metrics    [%g, %g) %s: E_rms=%.6g K=%zu (no phase reference)\n",
                        m.window.start, m.window.end, m.mode.c_str(), m.e_rms, m.count);
        }
    }
    std::printf("trace      %s\nmetrics    %s\n", trace_path.c_str(), metrics_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-phase SRF-PLL simulation and analysis toolkit"};
    app.require_subcommand(1);
    ErrorReporter reporter;
    app.add_flag("--json-errors", reporter.json, "Report failures as JSON on stderr");

    // tune
    auto* tune = app.add_subcommand("tune", "Symmetrical-optimum PI gains for a TunerInput");
    srfpll::TunerInput tuner_in;
    bool tune_json = false;
    tune->add_option("--alpha", tuner_in.alpha, "Crossover scale-down factor (> 1)")->required();
    tune->add_option("--tau", tuner_in.tau, "Sampling delay [s]")->required();
    tune->add_option("--plant-gain", tuner_in.plant_gain, "Plant gain U (default sqrt(2/3))");
    tune->add_flag("--json", tune_json, "Emit JSON instead of text");

    // bode
    auto* bode = app.add_subcommand("bode", "Open-loop response CSV (omega,mag_db,phase_deg)");
    double bode_alpha = 0.0, bode_kp = 0.0, bode_ki = 0.0;
    double bode_tau = 0.00025, bode_u = srfpll::kNormalizedAmplitude;
    double bode_wmin = 0.0, bode_wmax = 0.0;
    unsigned bode_points = 400;
    std::string bode_out;
    bode->add_option("--alpha", bode_alpha, "Tune gains from alpha before plotting");
    bode->add_option("--kp", bode_kp, "Explicit proportional gain");
    bode->add_option("--ki", bode_ki, "Explicit integral gain");
    bode->add_option("--tau", bode_tau, "Sampling delay [s]");
    bode->add_option("--plant-gain", bode_u, "Plant gain U");
    bode->add_option("--omega-min", bode_wmin, "Scan start [rad/s] (default ki/kp/100)");
    bode->add_option("--omega-max", bode_wmax, "Scan end [rad/s] (default 100/tau)");
    bode->add_option("--points", bode_points, "Number of log-spaced points");
    bode->add_option("--out", bode_out, "Write CSV here instead of stdout");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run a scenario and write trace + metrics");
    std::string sim_config, sim_preset, sim_out = ".", sim_ff;
    std::uint64_t sim_seed = 0;
    bool sim_seed_set = false, sim_paper = false, sim_dump = false;
    simulate->add_option("--config", sim_config, "Scenario config JSON file");
    simulate->add_option("--preset", sim_preset, "Built-in scenario (see --list-presets)");
    bool sim_list = false;
    simulate->add_flag("--list-presets", sim_list, "List built-in scenarios and exit");
    simulate->add_option("--seed", sim_seed, "Override the disturbance seed");
    simulate->add_flag("--paper-faithful-metrics", sim_paper, "Raw (unwrapped) phase metrics");
    simulate->add_option("--out", sim_out, "Output directory");
    simulate->add_option("--ff", sim_ff, "Feed-forward override: off|estimated|constant:<val>");
    simulate->add_flag("--dump-config", sim_dump, "Print the effective config JSON and exit");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "Recompute metrics from an existing trace CSV");
    std::string met_trace, met_scenario, met_out;
    std::vector<std::string> met_windows;
    bool met_paper = false;
    metrics->add_option("--trace", met_trace, "Trace CSV produced by simulate")->required();
    metrics->add_option("--window", met_windows, "Evaluation window start:end (repeatable)");
    metrics->add_option("--scenario", met_scenario, "Scenario name for the JSON output");
    metrics->add_flag("--paper-faithful-metrics", met_paper, "Raw (unwrapped) phase metrics");
    metrics->add_option("--out", met_out, "Write JSON here instead of stdout");

    // ingest-run
    auto* ingest = app.add_subcommand("ingest-run", "Ingest a recorded CSV and simulate on it");
    std::string ing_input, ing_config, ing_preset, ing_out = ".", ing_ff;
    srfpll::ColumnMap ing_cols;
    bool ing_paper = false;
    ingest->add_option("--input", ing_input, "Recorded three-phase CSV")->required();
    ingest->add_option("--config", ing_config, "Base scenario config JSON file");
    ingest->add_option("--preset", ing_preset, "Base loop parameters from a built-in scenario");
    ingest->add_option("--col-t", ing_cols.t, "Timestamp column (name or index)");
    ingest->add_option("--col-za", ing_cols.za, "Phase a column");
    ingest->add_option("--col-zb", ing_cols.zb, "Phase b column");
    ingest->add_option("--col-zc", ing_cols.zc, "Phase c column");
    ingest->add_option("--col-theta", ing_cols.theta, "Optional phase reference column");
    ingest->add_option("--col-omega", ing_cols.omega, "Optional frequency reference column");
    ingest->add_flag("--paper-faithful-metrics", ing_paper, "Raw (unwrapped) phase metrics");
    ingest->add_option("--out", ing_out, "Output directory");
    ingest->add_option("--ff", ing_ff, "Feed-forward override: off|estimated|constant:<val>");

    // CLI11 stores whether --seed appeared; capture it after parse.
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    sim_seed_set = simulate->count("--seed") > 0;

    try {
        if (*tune) {
            const auto result = srfpll::tune_symmetrical_optimum(tuner_in);
            const auto margin =
                srfpll::phase_margin(result.gains, tuner_in.tau, tuner_in.plant_gain);
            if (tune_json) {
                nlohmann::ordered_json j;
                j["kp"] = result.gains.kp;
                j["ki"] = result.gains.ki;
                j["omega_c"] = result.omega_c;
                j["phase_margin_deg"] = margin.phi_m_deg;
                std::cout << j.dump(2) << "\n";
            } else {
                std::printf("kp            %.10g\n", result.gains.kp);
                std::printf("ki            %.10g\n", result.gains.ki);
                std::printf("omega_c       %.10g rad/s\n", result.omega_c);
                std::printf("phase margin  %.6g deg (at %.10g rad/s)\n", margin.phi_m_deg,
                            margin.omega_c);
            }
            return 0;
        }

        if (*bode) {
            srfpll::PiGains gains{bode_kp, bode_ki};
            if (bode_alpha > 0.0) {
                gains = srfpll::tune_symmetrical_optimum({bode_alpha, bode_tau, bode_u}).gains;
            } else if (!(bode_kp > 0.0 && bode_ki > 0.0)) {
                throw srfpll::ConfigError({"bode needs either --alpha or both --kp and --ki"});
            }
            const double wmin = bode_wmin > 0.0 ? bode_wmin : gains.ki / gains.kp / 100.0;
            const double wmax = bode_wmax > 0.0 ? bode_wmax : 100.0 / bode_tau;
            if (!(wmax > wmin) || bode_points < 2) {
                throw srfpll::ConfigError({"bode scan range or point count is degenerate"});
            }
            std::string csv = "omega,mag_db,phase_deg\n";
            const double step = std::log(wmax / wmin) / (bode_points - 1);
            char buf[128];
            for (unsigned i = 0; i < bode_points; ++i) {
                const double w = wmin * std::exp(step * i);
                const auto r = srfpll::open_loop_response(gains, bode_tau, bode_u, w);
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", w, r.magnitude_db,
                              r.phase_deg);
                csv += buf;
            }
            if (bode_out.empty()) {
                std::cout << csv;
            } else {
                write_file(bode_out, csv);
            }
            return 0;
        }

        if (*simulate) {
            if (sim_list) {
                for (const auto& name : srfpll::preset_names()) {
                    std::printf("%s\n", name.c_str());
                }
                return 0;
            }
            if (sim_config.empty() == sim_preset.empty()) {
                throw srfpll::ConfigError({"simulate needs exactly one of --config or --preset"});
            }
            srfpll::ScenarioConfig cfg;
            if (!sim_config.empty()) {
                cfg = srfpll::load_config_file(sim_config);
            } else {
                try {
                    cfg = srfpll::preset(sim_preset);
                } catch (const std::invalid_argument& e) {
                    throw srfpll::ConfigError({e.what()});
                }
            }
            std::optional<srfpll::FeedForward> ff;
            if (!sim_ff.empty()) {
                ff = parse_ff(sim_ff);
                if (!ff) {
                    throw srfpll::ConfigError({"--ff must be off|estimated|constant:<val>"});
                }
            }
            if (sim_dump) {
                if (sim_seed_set && cfg.signal) {
                    cfg.signal->disturbance.seed = sim_seed;
                }
                if (ff) {
                    cfg.feedforward = *ff;
                }
                std::cout << srfpll::save_config(cfg);
                return 0;
            }
            return run_simulation(std::move(cfg), sim_out,
                                  sim_seed_set ? std::optional<std::uint64_t>(sim_seed)
                                               : std::nullopt,
                                  ff, sim_paper);
        }

        if (*metrics) {
            std::ifstream in(met_trace, std::ios::binary);
            if (!in) {
                throw srfpll::IngestError("cannot open '" + met_trace + "'");
            }
            const auto trace = srfpll::read_trace_csv(in);
            std::vector<srfpll::TimeWindow> windows;
            for (const auto& text : met_windows) {
                const auto w = parse_window(text);
                if (!w) {
                    throw srfpll::ConfigError({"--window must be start:end, got '" + text + "'"});
                }
                windows.push_back(*w);
            }
            if (windows.empty()) {
                windows.push_back({trace.t.front(), trace.t.back() + 1e-9});
            }
            if (met_scenario.empty()) {
                met_scenario = std::filesystem::path(met_trace).stem().string();
            }
            std::vector<srfpll::MetricsSummary> summaries;
            for (const auto& w : windows) {
                try {
                    summaries.push_back(
                        srfpll::evaluate_window(trace, w, !met_paper, met_scenario));
                } catch (const std::invalid_argument& e) {
                    throw srfpll::ConfigError({e.what()});
                }
            }
            const auto json_text = srfpll::metrics_to_json(summaries);
            if (met_out.empty()) {
                std::cout << json_text;
            } else {
                write_file(met_out, json_text);
            }
            return 0;
        }

        if (*ingest) {
            srfpll::ScenarioConfig cfg;
            if (!ing_config.empty() && !ing_preset.empty()) {
                throw srfpll::ConfigError({"ingest-run takes --config or --preset, not both"});
            }
            if (!ing_config.empty()) {
                cfg = srfpll::load_config_file(ing_config);
            } else if (!ing_preset.empty()) {
                try {
                    cfg = srfpll::preset(ing_preset);
                } catch (const std::invalid_argument& e) {
                    throw srfpll::ConfigError({e.what()});
                }
                cfg.name += "-ingest";
            } else {
                cfg.name = std::filesystem::path(ing_input).stem().string();
                cfg.tuner = srfpll::TunerInput{};
                cfg.feedforward = {srfpll::FeedForwardMode::Estimated, 0.0};
            }
            // Recorded data replaces any synthetic source in the base config.
            cfg.signal.reset();
            srfpll::IngestSpec spec;
            if (cfg.ingest) {
                spec = *cfg.ingest;
            }
            spec.path = ing_input;
            if (ingest->count("--col-t")) spec.columns.t = ing_cols.t;
            if (ingest->count("--col-za")) spec.columns.za = ing_cols.za;
            if (ingest->count("--col-zb")) spec.columns.zb = ing_cols.zb;
            if (ingest->count("--col-zc")) spec.columns.zc = ing_cols.zc;
            if (ingest->count("--col-theta")) spec.columns.theta = ing_cols.theta;
            if (ingest->count("--col-omega")) spec.columns.omega = ing_cols.omega;
            cfg.ingest = std::move(spec);
            cfg.metric_windows.clear();  // recorded span differs from any synthetic windows
            std::optional<srfpll::FeedForward> ff;
            if (!ing_ff.empty()) {
                ff = parse_ff(ing_ff);
                if (!ff) {
                    throw srfpll::ConfigError({"--ff must be off|estimated|constant:<val>"});
                }
            }
            return run_simulation(std::move(cfg), ing_out, std::nullopt, ff, ing_paper);
        }
    } catch (const srfpll::ConfigError& e) {
        return reporter.fail("config", e.what(), kExitConfig);
    } catch (const srfpll::IngestError& e) {
        return reporter.fail("ingest", e.what(), kExitIngest);
    } catch (const srfpll::AnalysisError& e) {
        return reporter.fail("analysis", e.what(), kExitNumerical);
    } catch (const srfpll::NumericalError& e) {
        return reporter.fail("numerical", e.what(), kExitNumerical);
    } catch (const std::exception& e) {
        return reporter.fail("internal", e.what(), 1);
    }
    return 0;
}
