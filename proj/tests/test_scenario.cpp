#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <doctest.h>

#include "srfpll/errors.hpp"
#include "srfpll/scenario.hpp"
#include "support.hpp"

using namespace srfpll;

namespace {

ScenarioConfig ramp_config(double kappa, FeedForwardMode mode) {
    ScenarioConfig cfg;
    cfg.name = "ramp-test";
    SyntheticSignal sig;
    sig.frequency.segments = {{FrequencySegment::Kind::Constant, 50.0, 1.0},
                              {FrequencySegment::Kind::Ramp, kappa, 3.0}};
    sig.amplitude = AmplitudeProfile::constant(1.0);
    cfg.signal = sig;
    cfg.t_end = 4.0;
    cfg.tuner = TunerInput{};
    cfg.estimator = {4000.0, 120.0, 1.0};
    cfg.feedforward = {mode, 0.0};
    cfg.metric_windows = {{3.0, 4.0}};
    return cfg;
}

// Steady q-axis tracking deficit in the units of the ramp law.
double ramp_deficit(const RunTrace& trace, double start, double end) {
    return std::sqrt(1.5) * std::abs(testutil::window_mean(trace.t, trace.zq, start, end));
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("validation enumerates every violation") {
    ScenarioConfig cfg;  // no source, no tuner/gains, empty name is fine ("scenario")
    cfg.name = "bad name!";
    cfg.feedforward = {FeedForwardMode::Constant, -5.0};
    const auto v = validate(cfg);
    CHECK(v.size() >= 4);
    try {
        run_scenario(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.violations().size() == v.size());
    }
}

TEST_CASE("dt must match the tuner tau unless explicitly allowed") {
    auto cfg = ramp_config(100.0, FeedForwardMode::Off);
    cfg.dt = 0.0005;
    auto v = validate(cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("allow_dt_tau_mismatch") != std::string::npos);
    cfg.allow_dt_tau_mismatch = true;
    CHECK(validate(cfg).empty());
}

TEST_CASE("explicit gains must respect the delay separation invariant") {
    auto cfg = ramp_config(100.0, FeedForwardMode::Off);
    cfg.tuner.reset();
    cfg.gains = PiGains{1.0, 1000.0};  // kp/ki = 1e-3 < 10*dt
    const auto v = validate(cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("kp/ki") != std::string::npos);
}

TEST_CASE("estimator Euler stability is checked at configuration time") {
    auto cfg = ramp_config(100.0, FeedForwardMode::Estimated);
    cfg.dt = 0.01;
    cfg.allow_dt_tau_mismatch = true;
    const auto v = validate(cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("omega_init*dt") != std::string::npos);
}

TEST_CASE("plain loop rides a ramp with the law-predicted q-axis deficit") {
    const auto r = run_scenario(ramp_config(100.0, FeedForwardMode::Off));
    const double law = steady_state_ramp_error(100.0, r.gains.ki, kNormalizedAmplitude);
    CHECK(ramp_deficit(r.trace, 3.0, 4.0) == doctest::Approx(law).epsilon(0.005));
    // literal frequency error vanishes in steady ramp tracking (type-2 loop)
    std::vector<double> dw(r.trace.size());
    for (std::size_t k = 0; k < dw.size(); ++k) {
        dw[k] = r.trace.omega_star[k] - r.trace.omega_true[k];
    }
    CHECK(std::abs(testutil::window_mean(r.trace.t, dw, 3.0, 4.0)) < 0.02);
    // wrapped phase error matches the exact nonlinear prediction
    const double predicted =
        std::asin(100.0 / (r.gains.ki * kNormalizedAmplitude));
    const double measured = testutil::window_mean_abs_phase_error(
        r.trace.t, r.trace.theta_star, r.trace.theta_true, 3.0, 4.0);
    CHECK(measured == doctest::Approx(predicted).epsilon(0.01));
}

TEST_CASE("feed-forward collapses the ramp deficit and the metrics agree") {
    const auto off = run_scenario(ramp_config(100.0, FeedForwardMode::Off));
    const auto ff = run_scenario(ramp_config(100.0, FeedForwardMode::Estimated));
    CHECK(ramp_deficit(ff.trace, 3.0, 4.0) < 0.1 * ramp_deficit(off.trace, 3.0, 4.0));
    REQUIRE(off.metrics.size() == 1);
    REQUIRE(ff.metrics.size() == 1);
    CHECK(ff.metrics[0].e_me < off.metrics[0].e_me);
    CHECK(ff.metrics[0].e_rms < off.metrics[0].e_rms);
}

TEST_CASE("constant feed-forward injects the nominal frequency") {
    auto cfg = ramp_config(100.0, FeedForwardMode::Constant);
    cfg.feedforward.constant = 50.0;
    const auto r = run_scenario(cfg);
    CHECK(r.trace.omega_tilde[0] == 50.0);
    CHECK(r.trace.omega_tilde.back() == 50.0);
}

TEST_CASE("normalization decouples the loop from the input amplitude") {
    auto make = [](double amplitude) {
        ScenarioConfig cfg;
        cfg.name = "decouple";
        SyntheticSignal sig;
        sig.frequency = FrequencyProfile::constant(50.0, 2.0);
        sig.amplitude = AmplitudeProfile::constant(amplitude);
        cfg.signal = sig;
        cfg.t_end = 2.0;
        cfg.tuner = TunerInput{};
        cfg.feedforward = {FeedForwardMode::Estimated, 0.0};
        return run_scenario(cfg);
    };
    const auto lo = make(0.5);
    const auto hi = make(1.5);
    REQUIRE(lo.trace.size() == hi.trace.size());
    double worst_theta = 0.0, worst_omega = 0.0;
    for (std::size_t k = 0; k < lo.trace.size(); ++k) {
        worst_theta = std::max(
            worst_theta, std::abs(wrap_pi(lo.trace.theta_star[k] - hi.trace.theta_star[k])));
        worst_omega =
            std::max(worst_omega, std::abs(lo.trace.omega_star[k] - hi.trace.omega_star[k]));
    }
    CHECK(worst_theta <= 1e-9);
    CHECK(worst_omega <= 1e-9);
}

TEST_CASE("presets validate, run, and round-trip through JSON") {
    for (const auto& name : preset_names()) {
        const auto cfg = preset(name);
        CHECK(validate(cfg).empty());
        const auto text = save_config(cfg);
        const auto reloaded = load_config(text);
        CHECK(save_config(reloaded) == text);
    }
    CHECK_THROWS_AS(preset("no-such"), std::invalid_argument);
}

TEST_CASE("ingest configs and output paths round-trip through JSON") {
    ScenarioConfig cfg;
    cfg.name = "recorded";
    IngestSpec spec;
    spec.path = "data.csv";
    spec.columns.za = "ia";
    spec.columns.theta = "enc";
    cfg.ingest = spec;
    cfg.gains = PiGains{122.47, 306.19};
    cfg.feedforward = {FeedForwardMode::Constant, 50.0};
    cfg.output = {"out/trace.csv", "out/metrics.json"};
    cfg.wrapped_metrics = false;
    const auto text = save_config(cfg);
    const auto back = load_config(text);
    CHECK(save_config(back) == text);
    CHECK(back.ingest->columns.za == "ia");
    CHECK(back.ingest->columns.theta == "enc");
    CHECK(back.output.trace == "out/trace.csv");
    CHECK(back.feedforward.mode == FeedForwardMode::Constant);
    CHECK_FALSE(back.wrapped_metrics);
}

TEST_CASE("independent scenarios run in parallel with identical results") {
    const auto cfg = preset("ramp-startup");
    const auto serial = run_scenario(cfg);
    RunTrace from_a, from_b;
    std::thread a([&] { from_a = run_scenario(cfg).trace; });
    std::thread b([&] { from_b = run_scenario(cfg).trace; });
    a.join();
    b.join();
    REQUIRE(from_a.size() == serial.trace.size());
    REQUIRE(from_b.size() == serial.trace.size());
    for (std::size_t k = 0; k < serial.trace.size(); ++k) {
        CHECK(from_a.omega_star[k] == serial.trace.omega_star[k]);
        CHECK(from_b.theta_star[k] == serial.trace.theta_star[k]);
    }
}

TEST_CASE("same seed, same bytes") {
    const auto cfg = preset("load-step-50");
    const auto a = run_scenario(cfg);
    const auto b = run_scenario(cfg);
    std::ostringstream ca, cb;
    write_trace_csv(a.trace, ca);
    write_trace_csv(b.trace, cb);
    CHECK(ca.str() == cb.str());
    CHECK(metrics_to_json(a.metrics) == metrics_to_json(b.metrics));
}

TEST_CASE("config JSON rejects unknown keys and bad types together") {
    const char* text = R"({
        "name": "x",
        "t_end": "ten",
        "mystery": 1,
        "feedforward": "sometimes"
    })";
    try {
        load_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.violations().size() == 3);
        std::string all;
        for (const auto& s : e.violations()) {
            all += s + "\n";
        }
        CHECK(all.find("mystery") != std::string::npos);
        CHECK(all.find("t_end") != std::string::npos);
        CHECK(all.find("feedforward") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("not json"), ConfigError);
}

TEST_CASE("ingest reads well-formed rows") {
    const auto path = temp_file("srfpll_ingest_ok.csv");
    {
        std::ofstream out(path);
        out << "t,ia,ib,ic\n";
        out << "0.0,1.0,-0.5,-0.5\n";
        out << "0.00025,0.99,-0.48,-0.51\n";
        out << "0.0005,0.97,-0.45,-0.52\n";
    }
    ColumnMap map;
    map.za = "ia";
    map.zb = "ib";
    map.zc = "ic";
    const auto r = ingest_csv(path.string(), map);
    REQUIRE(r.samples.size() == 3);
    CHECK(r.median_dt == doctest::Approx(0.00025).epsilon(1e-12));
    CHECK(r.samples[1].zb == -0.48);
    CHECK(r.detected_loss.empty());

    // columns can also be referenced by index
    ColumnMap by_index;
    by_index.t = "0";
    by_index.za = "1";
    by_index.zb = "2";
    by_index.zc = "3";
    CHECK(ingest_csv(path.string(), by_index).samples.size() == 3);
}

TEST_CASE("ingest rejects duplicate and non-monotonic timestamps with the line number") {
    const auto path = temp_file("srfpll_ingest_dup.csv");
    {
        std::ofstream out(path);
        out << "t,za,zb,zc\n0,1,0,0\n0.001,1,0,0\n0.001,1,0,0\n";
    }
    try {
        ingest_csv(path.string(), {});
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(e.row() == 4);
        CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
    {
        std::ofstream out(path);
        out << "t,za,zb,zc\n0,1,0,0\n0.002,1,0,0\n0.001,1,0,0\n";
    }
    CHECK_THROWS_AS(ingest_csv(path.string(), {}), IngestError);
}

TEST_CASE("ingest reports malformed cells and missing columns") {
    const auto path = temp_file("srfpll_ingest_bad.csv");
    {
        std::ofstream out(path);
        out << "t,za,zb,zc\n0,1,0,0\n0.001,oops,0,0\n";
    }
    try {
        ingest_csv(path.string(), {});
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(e.row() == 3);
        CHECK(std::string(e.what()).find("oops") != std::string::npos);
    }
    ColumnMap missing;
    missing.za = "does_not_exist";
    CHECK_THROWS_AS(ingest_csv(path.string(), missing), IngestError);
    CHECK_THROWS_AS(ingest_csv("/no/such/file.csv", {}), IngestError);
}

TEST_CASE("ingest tolerates CRLF line endings") {
    const auto path = temp_file("srfpll_ingest_crlf.csv");
    {
        std::ofstream out(path, std::ios::binary);
        out << "t,za,zb,zc\r\n0,1,0,0\r\n0.00025,0.9,0.1,-0.2\r\n0.0005,0.8,0.2,-0.3\r\n";
    }
    const auto r = ingest_csv(path.string(), {});
    REQUIRE(r.samples.size() == 3);
    CHECK(r.samples[1].zc == -0.2);
}

TEST_CASE("a 0.05 s gap at 4 kHz becomes one ~200-sample loss window") {
    const auto path = temp_file("srfpll_ingest_gap.csv");
    {
        std::ofstream out(path);
        out << "t,za,zb,zc\n";
        char buf[128];
        for (int k = 0; k < 400; ++k) {
            double t = k * 0.00025;
            if (t >= 0.05) {
                t += 0.05;  // recorder dropped 0.05 s of samples
            }
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", t, std::cos(50.0 * t),
                          std::cos(50.0 * t - 2.0), std::cos(50.0 * t + 2.0));
            out << buf;
        }
    }
    const auto r = ingest_csv(path.string(), {});
    REQUIRE(r.detected_loss.size() == 1);
    // rows jump from 0.04975 to 0.1: a 0.05025 s gap, 200 samples short
    CHECK(r.detected_loss[0].duration == doctest::Approx(0.05).epsilon(1e-6));
    std::size_t invalid = 0;
    for (const auto& s : r.samples) {
        if (!s.valid) {
            ++invalid;
        }
    }
    CHECK(invalid == 200);
    CHECK(r.samples.size() == 600);
    // the filled stream is uniform
    for (std::size_t k = 1; k < r.samples.size(); ++k) {
        CHECK(r.samples[k].t - r.samples[k - 1].t == doctest::Approx(0.00025).epsilon(1e-6));
    }
}

TEST_CASE("ingest-run end to end on generator output with a recorder gap") {
    // Synthesize a clean run, drop the loss-window rows the way a recorder
    // would, and feed the file back through ingest + the closed loop.
    DisturbanceConfig dist;
    dist.data_loss = {{0.9, 0.05}};
    const auto sig = generate(FrequencyProfile::constant(50.0, 2.0),
                              AmplitudeProfile::constant(1.0), dist, 0.00025, 2.0);
    const auto path = temp_file("srfpll_ingest_e2e.csv");
    {
        std::ofstream out(path);
        std::ostringstream buf;
        write_signal_csv(sig, buf);
        std::istringstream in(buf.str());
        std::string line;
        std::getline(in, line);
        out << line << "\n";
        while (std::getline(in, line)) {
            if (line.find(",0,") == std::string::npos) {  // keep valid rows only
                out << line << "\n";
            }
        }
    }

    ScenarioConfig cfg;
    cfg.name = "ingest-e2e";
    IngestSpec spec;
    spec.path = path.string();
    spec.columns.theta = "theta_true";
    spec.columns.omega = "omega_true";
    cfg.ingest = spec;
    cfg.tuner = TunerInput{};
    cfg.estimator = {4000.0, 120.0, 1.0};
    cfg.feedforward = {FeedForwardMode::Estimated, 0.0};
    cfg.metric_windows = {{0.5, 0.9}};
    const auto r = run_scenario(cfg);

    REQUIRE(r.detected_loss.size() == 1);
    CHECK(r.metrics[0].has_phase_reference);
    CHECK(r.metrics[0].e_me < 0.02);   // locked before the gap
    CHECK(r.metrics[0].e_rms < 0.02);  // sine-referenced reconstruction matches
    // held samples are marked invalid and the estimate freezes across them
    bool saw_invalid = false;
    double frozen = 0.0;
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
        if (!r.trace.valid[k]) {
            if (!saw_invalid) {
                frozen = r.trace.omega_tilde[k];
            }
            saw_invalid = true;
            CHECK(r.trace.omega_tilde[k] == frozen);
        }
    }
    CHECK(saw_invalid);
}

TEST_CASE("metric windows beyond the run are rejected") {
    auto cfg = ramp_config(100.0, FeedForwardMode::Off);
    cfg.metric_windows = {{5.0, 6.0}};
    const auto v = validate(cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("beyond the run length") != std::string::npos);
}

TEST_CASE("an ingest window that selects no samples is a config error") {
    const auto path = temp_file("srfpll_ingest_window.csv");
    {
        std::ofstream out(path);
        out << "t,za,zb,zc\n0,1,0,0\n0.00025,1,0,0\n0.0005,1,0,0\n";
    }
    ScenarioConfig cfg;
    cfg.name = "win";
    IngestSpec spec;
    spec.path = path.string();
    cfg.ingest = spec;
    cfg.gains = PiGains{122.47, 306.19};
    cfg.metric_windows = {{10.0, 11.0}};
    CHECK_THROWS_AS(run_scenario(cfg), ConfigError);
}

TEST_CASE("paper-literal reconstruction keeps the pi/2 artifact") {
    auto cfg = ramp_config(100.0, FeedForwardMode::Estimated);
    cfg.reconstruction_offset = 0.0;
    const auto paper = run_scenario(cfg);
    const auto sine = run_scenario(ramp_config(100.0, FeedForwardMode::Estimated));
    // locked loop: sine-referenced comparison is tight, the literal one sits
    // near the full sqrt(2/3) RMS offset
    CHECK(sine.metrics[0].e_rms < 0.05);
    CHECK(paper.metrics[0].e_rms > 0.5);
}

}  // TEST_SUITE
