#include "srfpll/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "srfpll/errors.hpp"
#include "srfpll/transforms.hpp"

namespace srfpll {
namespace {

using json = nlohmann::ordered_json;

constexpr double kHalfPi = std::numbers::pi / 2.0;

bool valid_name(const std::string& name) {
    if (name.empty()) {
        return false;
    }
    return std::all_of(name.begin(), name.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '.' || c == '_' || c == '-';
    });
}

double effective_tau(const ScenarioConfig& cfg) {
    return cfg.tuner ? cfg.tuner->tau : cfg.dt;
}

// --- CSV helpers -------------------------------------------------------------

std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(',', pos);
        cells.push_back(line.substr(pos, next == std::string::npos ? next : next - pos));
        if (next == std::string::npos) {
            break;
        }
        pos = next + 1;
    }
    return cells;
}

// A column reference is a header name or a 0-based index written in digits.
std::size_t resolve_column(const std::vector<std::string>& header, const std::string& ref) {
    const auto it = std::find(header.begin(), header.end(), ref);
    if (it != header.end()) {
        return static_cast<std::size_t>(it - header.begin());
    }
    if (!ref.empty() && std::all_of(ref.begin(), ref.end(),
                                    [](unsigned char c) { return std::isdigit(c); })) {
        const std::size_t idx = std::stoul(ref);
        if (idx < header.size()) {
            return idx;
        }
    }
    throw IngestError("column '" + ref + "' not found in header", 1);
}

double parse_cell(const std::string& cell, std::size_t row) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) {
            throw std::invalid_argument(cell);
        }
        return v;
    } catch (const std::exception&) {
        throw IngestError("value '" + cell + "' is not a number", row);
    }
}

// --- JSON helpers ------------------------------------------------------------

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& path, std::vector<std::string>& v) {
    for (const auto& item : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return item.key() == k;
            }) == allowed.end()) {
            v.push_back(path + ": unknown key '" + item.key() + "'");
        }
    }
}

bool expect_object(const json& j, const std::string& path, std::vector<std::string>& v) {
    if (!j.is_object()) {
        v.push_back(path + ": expected an object");
        return false;
    }
    return true;
}

double get_num(const json& j, const char* key, double fallback, const std::string& path,
               std::vector<std::string>& v) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_number()) {
        v.push_back(path + "." + key + ": expected a number");
        return fallback;
    }
    return j[key].get<double>();
}

}  // namespace

std::vector<std::string> validate(const ScenarioConfig& cfg) {
    std::vector<std::string> v;
    if (!valid_name(cfg.name)) {
        v.push_back("name must be non-empty and use only [A-Za-z0-9._-]");
    }
    if (cfg.signal.has_value() == cfg.ingest.has_value()) {
        v.push_back("exactly one of signal or ingest must be configured");
    }
    if (cfg.signal) {
        auto sv = validate_signal_config(cfg.signal->frequency, cfg.signal->amplitude,
                                         cfg.signal->disturbance, cfg.dt, cfg.t_end);
        v.insert(v.end(), sv.begin(), sv.end());
    }
    if (cfg.ingest) {
        if (cfg.ingest->path.empty()) {
            v.push_back("ingest.path must be set");
        }
        if (!(cfg.ingest->gap_factor > 1.0)) {
            v.push_back("ingest.gap_factor must be > 1");
        }
        for (const std::string* col : {&cfg.ingest->columns.t, &cfg.ingest->columns.za,
                                       &cfg.ingest->columns.zb, &cfg.ingest->columns.zc}) {
            if (col->empty()) {
                v.push_back("ingest.columns t/za/zb/zc must all be set");
                break;
            }
        }
    }

    if (cfg.tuner.has_value() == cfg.gains.has_value()) {
        v.push_back("exactly one of tuner or gains must be configured");
    }
    if (cfg.tuner) {
        if (!(cfg.tuner->alpha > 1.0)) {
            v.push_back("tuner.alpha must be > 1");
        }
        if (!(cfg.tuner->tau > 0.0)) {
            v.push_back("tuner.tau must be > 0");
        }
        if (!(cfg.tuner->plant_gain > 0.0)) {
            v.push_back("tuner.plant_gain must be > 0");
        }
        if (cfg.signal && !cfg.allow_dt_tau_mismatch && cfg.tuner->tau > 0.0 &&
            std::abs(cfg.dt - cfg.tuner->tau) > 1e-12 * std::max(cfg.dt, cfg.tuner->tau)) {
            v.push_back("dt differs from tuner.tau; set allow_dt_tau_mismatch to run anyway");
        }
    }
    PiGains gains{};
    bool have_gains = false;
    if (cfg.gains) {
        gains = *cfg.gains;
        have_gains = true;
        if (!(gains.kp > 0.0) || !(gains.ki > 0.0)) {
            v.push_back("gains.kp and gains.ki must be > 0");
            have_gains = false;
        }
    } else if (cfg.tuner && cfg.tuner->alpha > 1.0 && cfg.tuner->tau > 0.0 &&
               cfg.tuner->plant_gain > 0.0) {
        gains = tune_symmetrical_optimum(*cfg.tuner).gains;
        have_gains = true;
    }
    if (have_gains && !(gains.kp / gains.ki > 10.0 * effective_tau(cfg))) {
        v.push_back("kp/ki must exceed 10*tau (loop delay separation)");
    }

    if (cfg.feedforward.mode == FeedForwardMode::Estimated) {
        if (!(cfg.estimator.gamma > 0.0)) {
            v.push_back("estimator.gamma must be > 0");
        }
        if (!(cfg.estimator.omega_floor > 0.0)) {
            v.push_back("estimator.omega_floor must be > 0");
        }
        if (!(cfg.estimator.omega_init > cfg.estimator.omega_floor)) {
            v.push_back("estimator.omega_init must exceed omega_floor");
        }
        if (cfg.signal && !(cfg.estimator.omega_init * cfg.dt < 0.5)) {
            v.push_back("estimator Euler stability requires omega_init*dt < 0.5");
        }
    }
    if (cfg.feedforward.mode == FeedForwardMode::Constant &&
        !(std::isfinite(cfg.feedforward.constant) && cfg.feedforward.constant >= 0.0)) {
        v.push_back("feedforward constant must be finite and >= 0");
    }

    for (std::size_t i = 0; i < cfg.metric_windows.size(); ++i) {
        const auto& w = cfg.metric_windows[i];
        if (!(w.end > w.start) || !(w.start >= 0.0)) {
            v.push_back("metric window " + std::to_string(i) + " must satisfy 0 <= start < end");
        } else if (cfg.signal && w.start >= cfg.t_end) {
            v.push_back("metric window " + std::to_string(i) + " starts beyond the run length");
        }
    }
    if (!std::isfinite(cfg.reconstruction_offset)) {
        v.push_back("reconstruction offset must be finite");
    }
    if (!(cfg.normalize_floor > 0.0)) {
        v.push_back("normalize_floor must be > 0");
    }
    if (!std::isfinite(cfg.initial.theta0) || !std::isfinite(cfg.initial.theta_star0) ||
        !std::isfinite(cfg.initial.integrator0)) {
        v.push_back("initial conditions must be finite");
    }
    return v;
}

TunerResult resolve_gains(const ScenarioConfig& cfg) {
    if (cfg.tuner) {
        return tune_symmetrical_optimum(*cfg.tuner);
    }
    return {*cfg.gains, 0.0};
}

IngestResult ingest_csv(const std::string& path, const ColumnMap& columns, double gap_factor) {
    std::ifstream in(path);
    if (!in) {
        throw IngestError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IngestError("'" + path + "' is empty", 1);
    }
    const auto header = split_csv_line(line);
    const std::size_t col_t = resolve_column(header, columns.t);
    const std::size_t col_a = resolve_column(header, columns.za);
    const std::size_t col_b = resolve_column(header, columns.zb);
    const std::size_t col_c = resolve_column(header, columns.zc);
    const bool has_theta = !columns.theta.empty();
    const bool has_omega = !columns.omega.empty();
    const std::size_t col_theta = has_theta ? resolve_column(header, columns.theta) : 0;
    const std::size_t col_omega = has_omega ? resolve_column(header, columns.omega) : 0;

    struct Row {
        double t, za, zb, zc, theta, omega;
    };
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw IngestError("row has " + std::to_string(cells.size()) + " fields, header has " +
                                  std::to_string(header.size()),
                              lineno);
        }
        Row r{};
        r.t = parse_cell(cells[col_t], lineno);
        r.za = parse_cell(cells[col_a], lineno);
        r.zb = parse_cell(cells[col_b], lineno);
        r.zc = parse_cell(cells[col_c], lineno);
        r.theta = has_theta ? parse_cell(cells[col_theta], lineno) : 0.0;
        r.omega = has_omega ? parse_cell(cells[col_omega], lineno) : 0.0;
        for (double x : {r.t, r.za, r.zb, r.zc, r.theta, r.omega}) {
            if (!std::isfinite(x)) {
                throw IngestError("non-finite value", lineno);
            }
        }
        if (!rows.empty()) {
            if (r.t == rows.back().t) {
                throw IngestError("duplicate timestamp", lineno);
            }
            if (r.t < rows.back().t) {
                throw IngestError("non-monotonic timestamp", lineno);
            }
        }
        rows.push_back(r);
    }
    if (rows.size() < 2) {
        throw IngestError("'" + path + "' must contain at least 2 samples", lineno);
    }

    std::vector<double> diffs;
    diffs.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        diffs.push_back(rows[i].t - rows[i - 1].t);
    }
    std::sort(diffs.begin(), diffs.end());
    const std::size_t n = diffs.size();
    const double median_dt =
        n % 2 == 1 ? diffs[n / 2] : 0.5 * (diffs[n / 2 - 1] + diffs[n / 2]);

    IngestResult out;
    out.median_dt = median_dt;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        out.samples.push_back({r.t, r.za, r.zb, r.zc, true});
        if (has_theta) {
            out.theta_ref.push_back(r.theta);
        }
        if (has_omega) {
            out.omega_ref.push_back(r.omega);
        }
        if (i + 1 < rows.size()) {
            const double gap = rows[i + 1].t - r.t;
            if (gap > gap_factor * median_dt) {
                // Fill with sample-and-hold rows so the fixed-step loop stays uniform.
                const auto missing = static_cast<std::size_t>(std::llround(gap / median_dt)) - 1;
                for (std::size_t j = 1; j <= missing; ++j) {
                    const double t = r.t + static_cast<double>(j) * median_dt;
                    out.samples.push_back({t, r.za, r.zb, r.zc, false});
                    if (has_theta) {
                        out.theta_ref.push_back(r.theta);
                    }
                    if (has_omega) {
                        out.omega_ref.push_back(r.omega);
                    }
                }
                out.detected_loss.push_back({r.t + median_dt, gap - median_dt});
            }
        }
    }
    return out;
}

// --- runner ------------------------------------------------------------------

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    auto violations = validate(cfg);
    if (!violations.empty()) {
        throw ConfigError(std::move(violations));
    }

    std::vector<ThreePhaseSample> samples;
    std::vector<double> theta_ref;
    std::vector<double> omega_ref;
    std::vector<LossWindow> detected_loss;
    double dt = cfg.dt;

    if (cfg.signal) {
        auto gen = generate(cfg.signal->frequency, cfg.signal->amplitude,
                            cfg.signal->disturbance, cfg.dt, cfg.t_end, cfg.initial.theta0);
        samples = std::move(gen.samples);
        theta_ref = std::move(gen.theta_true);
        omega_ref = std::move(gen.omega_true);
    } else {
        auto ing = ingest_csv(cfg.ingest->path, cfg.ingest->columns, cfg.ingest->gap_factor);
        samples = std::move(ing.samples);
        theta_ref = std::move(ing.theta_ref);
        omega_ref = std::move(ing.omega_ref);
        detected_loss = std::move(ing.detected_loss);
        dt = ing.median_dt;
        if (cfg.feedforward.mode == FeedForwardMode::Estimated &&
            !(cfg.estimator.omega_init * dt < 0.5)) {
            throw ConfigError({"estimator Euler stability requires omega_init*dt < 0.5 "
                               "(recorded data dt = " +
                               std::to_string(dt) + ")"});
        }
    }
    const bool has_reference = !theta_ref.empty();

    const TunerResult tuned = resolve_gains(cfg);
    const PiGains gains = tuned.gains;

    const bool use_estimators = cfg.feedforward.mode == FeedForwardMode::Estimated;
    EstimatorState est[3] = {make_estimator_state(cfg.estimator),
                             make_estimator_state(cfg.estimator),
                             make_estimator_state(cfg.estimator)};

    PllState pll;
    pll.theta_star = wrap_two_pi(cfg.initial.theta_star0);
    pll.integrator = cfg.initial.integrator0;

    const std::size_t count = samples.size();
    RunTrace trace;
    for (auto* col : {&trace.t, &trace.za, &trace.zb, &trace.zc, &trace.omega_true,
                      &trace.theta_true, &trace.omega_tilde, &trace.omega_star,
                      &trace.theta_star, &trace.zq, &trace.zbar_a, &trace.zbar_a_star}) {
        col->reserve(count);
    }
    trace.valid.reserve(count);

    for (std::size_t k = 0; k < count; ++k) {
        const ThreePhaseSample& raw = samples[k];
        const ThreePhaseSample norm = normalize(raw, cfg.normalize_floor);
        // Below the floor normalize() passes values through; such a sample
        // carries no usable phase information, so the loop coasts on zq = 0.
        const bool norm_ok =
            std::sqrt(raw.za * raw.za + raw.zb * raw.zb + raw.zc * raw.zc) >= cfg.normalize_floor;
        const bool usable = raw.valid && norm_ok;

        double omega_ff = 0.0;
        if (use_estimators) {
            for (int n = 0; n < 3; ++n) {
                const double z_n = n == 0 ? norm.za : (n == 1 ? norm.zb : norm.zc);
                if (!estimator_step(est[n], z_n, usable, dt, cfg.estimator)) {
                    throw NumericalError("estimator rejected a non-finite input at sample " +
                                         std::to_string(k));
                }
            }
            omega_ff = average_estimate(est[0].omega_tilde, est[1].omega_tilde,
                                        est[2].omega_tilde);
        } else if (cfg.feedforward.mode == FeedForwardMode::Constant) {
            omega_ff = cfg.feedforward.constant;
        }

        const double theta_star_used = pll.theta_star;
        const double zq = norm_ok ? abc_to_dq(norm, theta_star_used).zq : 0.0;
        if (!pll_step(pll, zq, omega_ff, gains, dt)) {
            throw NumericalError("pll rejected a non-finite input at sample " +
                                 std::to_string(k));
        }

        trace.t.push_back(raw.t);
        trace.za.push_back(raw.za);
        trace.zb.push_back(raw.zb);
        trace.zc.push_back(raw.zc);
        trace.valid.push_back(usable ? 1 : 0);
        trace.omega_true.push_back(has_reference ? omega_ref[k]
                                                 : std::numeric_limits<double>::quiet_NaN());
        trace.theta_true.push_back(has_reference ? theta_ref[k]
                                                 : std::numeric_limits<double>::quiet_NaN());
        trace.omega_tilde.push_back(omega_ff);
        trace.omega_star.push_back(pll.omega_star);
        trace.theta_star.push_back(theta_star_used);
        trace.zq.push_back(zq);
        trace.zbar_a.push_back(norm.za);
        trace.zbar_a_star.push_back(kNormalizedAmplitude *
                                    std::sin(theta_star_used + cfg.reconstruction_offset));
    }

    ScenarioResult result;
    result.trace = std::move(trace);
    result.gains = gains;
    result.omega_c = tuned.omega_c;
    result.detected_loss = std::move(detected_loss);

    std::vector<TimeWindow> windows = cfg.metric_windows;
    if (windows.empty() && !result.trace.t.empty()) {
        windows.push_back({result.trace.t.front(), result.trace.t.back() + dt});
    }
    for (const auto& w : windows) {
        try {
            result.metrics.push_back(
                evaluate_window(result.trace, w, cfg.wrapped_metrics, cfg.name));
        } catch (const std::invalid_argument&) {
            throw ConfigError({"metric window [" + std::to_string(w.start) + ", " +
                               std::to_string(w.end) + ") selects no samples"});
        }
    }
    return result;
}

// --- JSON configuration ------------------------------------------------------

namespace {

FrequencyProfile frequency_from_json(const json& j, std::vector<std::string>& v) {
    FrequencyProfile profile;
    if (!j.is_array()) {
        v.push_back("signal.frequency: expected an array of segments");
        return profile;
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& seg = j[i];
        const std::string path = "signal.frequency[" + std::to_string(i) + "]";
        if (!expect_object(seg, path, v)) {
            continue;
        }
        check_keys(seg, {"kind", "omega", "kappa", "duration"}, path, v);
        FrequencySegment out;
        const std::string kind = seg.contains("kind") && seg["kind"].is_string()
                                     ? seg["kind"].get<std::string>()
                                     : "";
        if (kind == "constant") {
            out.kind = FrequencySegment::Kind::Constant;
            out.value = get_num(seg, "omega", 0.0, path, v);
        } else if (kind == "ramp") {
            out.kind = FrequencySegment::Kind::Ramp;
            out.value = get_num(seg, "kappa", 0.0, path, v);
        } else if (kind == "step") {
            out.kind = FrequencySegment::Kind::Step;
            out.value = get_num(seg, "omega", 0.0, path, v);
        } else {
            v.push_back(path + ".kind must be one of constant|ramp|step");
        }
        out.duration = get_num(seg, "duration", 0.0, path, v);
        profile.segments.push_back(out);
    }
    return profile;
}

json frequency_to_json(const FrequencyProfile& profile) {
    json arr = json::array();
    for (const auto& seg : profile.segments) {
        json s;
        switch (seg.kind) {
            case FrequencySegment::Kind::Constant:
                s["kind"] = "constant";
                s["omega"] = seg.value;
                break;
            case FrequencySegment::Kind::Ramp:
                s["kind"] = "ramp";
                s["kappa"] = seg.value;
                break;
            case FrequencySegment::Kind::Step:
                s["kind"] = "step";
                s["omega"] = seg.value;
                break;
        }
        s["duration"] = seg.duration;
        arr.push_back(std::move(s));
    }
    return arr;
}

}  // namespace

ScenarioConfig load_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
    }
    std::vector<std::string> v;
    if (!j.is_object()) {
        throw ConfigError({"config root must be an object"});
    }
    check_keys(j,
               {"name", "dt", "t_end", "signal", "ingest", "tuner", "gains",
                "allow_dt_tau_mismatch", "estimator", "feedforward", "initial", "metrics",
                "reconstruction_reference", "normalize_floor", "output"},
               "config", v);

    ScenarioConfig cfg;
    if (j.contains("name")) {
        if (j["name"].is_string()) {
            cfg.name = j["name"].get<std::string>();
        } else {
            v.push_back("name: expected a string");
        }
    }
    cfg.dt = get_num(j, "dt", cfg.dt, "config", v);
    cfg.t_end = get_num(j, "t_end", cfg.t_end, "config", v);

    if (j.contains("signal")) {
        const auto& s = j["signal"];
        if (expect_object(s, "signal", v)) {
            check_keys(s, {"frequency", "amplitude", "disturbance"}, "signal", v);
            SyntheticSignal sig;
            if (s.contains("frequency")) {
                sig.frequency = frequency_from_json(s["frequency"], v);
            } else {
                v.push_back("signal.frequency is required");
            }
            if (s.contains("amplitude") && s["amplitude"].is_array()) {
                for (std::size_t i = 0; i < s["amplitude"].size(); ++i) {
                    const auto& seg = s["amplitude"][i];
                    const std::string path = "signal.amplitude[" + std::to_string(i) + "]";
                    if (!expect_object(seg, path, v)) {
                        continue;
                    }
                    check_keys(seg, {"start", "amplitude"}, path, v);
                    sig.amplitude.segments.push_back({get_num(seg, "start", 0.0, path, v),
                                                      get_num(seg, "amplitude", 1.0, path, v)});
                }
            } else {
                v.push_back("signal.amplitude: expected an array of segments");
            }
            if (s.contains("disturbance")) {
                const auto& d = s["disturbance"];
                if (expect_object(d, "signal.disturbance", v)) {
                    check_keys(d,
                               {"noise_std", "noise_corner", "harmonic3_ratio", "notch_rate",
                                "notch_amplitude", "data_loss", "seed"},
                               "signal.disturbance", v);
                    auto& dist = sig.disturbance;
                    dist.noise_std = get_num(d, "noise_std", 0.0, "signal.disturbance", v);
                    dist.noise_corner = get_num(d, "noise_corner", 0.0, "signal.disturbance", v);
                    dist.harmonic3_ratio =
                        get_num(d, "harmonic3_ratio", 0.0, "signal.disturbance", v);
                    dist.notch_rate = get_num(d, "notch_rate", 0.0, "signal.disturbance", v);
                    dist.notch_amplitude =
                        get_num(d, "notch_amplitude", 0.0, "signal.disturbance", v);
                    if (d.contains("seed")) {
                        if (d["seed"].is_number_unsigned() || d["seed"].is_number_integer()) {
                            dist.seed = d["seed"].get<std::uint64_t>();
                        } else {
                            v.push_back("signal.disturbance.seed: expected an integer");
                        }
                    }
                    if (d.contains("data_loss")) {
                        if (d["data_loss"].is_array()) {
                            for (std::size_t i = 0; i < d["data_loss"].size(); ++i) {
                                const auto& w = d["data_loss"][i];
                                const std::string path =
                                    "signal.disturbance.data_loss[" + std::to_string(i) + "]";
                                if (!expect_object(w, path, v)) {
                                    continue;
                                }
                                check_keys(w, {"start", "duration"}, path, v);
                                dist.data_loss.push_back({get_num(w, "start", 0.0, path, v),
                                                          get_num(w, "duration", 0.0, path, v)});
                            }
                        } else {
                            v.push_back("signal.disturbance.data_loss: expected an array");
                        }
                    }
                }
            }
            cfg.signal = std::move(sig);
        }
    }

    if (j.contains("ingest")) {
        const auto& g = j["ingest"];
        if (expect_object(g, "ingest", v)) {
            check_keys(g, {"path", "columns", "gap_factor"}, "ingest", v);
            IngestSpec spec;
            if (g.contains("path") && g["path"].is_string()) {
                spec.path = g["path"].get<std::string>();
            } else {
                v.push_back("ingest.path: expected a string");
            }
            spec.gap_factor = get_num(g, "gap_factor", spec.gap_factor, "ingest", v);
            if (g.contains("columns")) {
                const auto& c = g["columns"];
                if (expect_object(c, "ingest.columns", v)) {
                    check_keys(c, {"t", "za", "zb", "zc", "theta", "omega"}, "ingest.columns", v);
                    auto col = [&](const char* key, std::string& target) {
                        if (c.contains(key)) {
                            if (c[key].is_string()) {
                                target = c[key].get<std::string>();
                            } else {
                                v.push_back(std::string("ingest.columns.") + key +
                                            ": expected a string");
                            }
                        }
                    };
                    col("t", spec.columns.t);
                    col("za", spec.columns.za);
                    col("zb", spec.columns.zb);
                    col("zc", spec.columns.zc);
                    col("theta", spec.columns.theta);
                    col("omega", spec.columns.omega);
                }
            }
            cfg.ingest = std::move(spec);
        }
    }

    if (j.contains("tuner")) {
        const auto& t = j["tuner"];
        if (expect_object(t, "tuner", v)) {
            check_keys(t, {"alpha", "tau", "plant_gain"}, "tuner", v);
            TunerInput in;
            in.alpha = get_num(t, "alpha", in.alpha, "tuner", v);
            in.tau = get_num(t, "tau", in.tau, "tuner", v);
            in.plant_gain = get_num(t, "plant_gain", in.plant_gain, "tuner", v);
            cfg.tuner = in;
        }
    }
    if (j.contains("gains")) {
        const auto& g = j["gains"];
        if (expect_object(g, "gains", v)) {
            check_keys(g, {"kp", "ki"}, "gains", v);
            cfg.gains = PiGains{get_num(g, "kp", 0.0, "gains", v),
                                get_num(g, "ki", 0.0, "gains", v)};
        }
    }
    if (j.contains("allow_dt_tau_mismatch")) {
        if (j["allow_dt_tau_mismatch"].is_boolean()) {
            cfg.allow_dt_tau_mismatch = j["allow_dt_tau_mismatch"].get<bool>();
        } else {
            v.push_back("allow_dt_tau_mismatch: expected a boolean");
        }
    }

    if (j.contains("estimator")) {
        const auto& e = j["estimator"];
        if (expect_object(e, "estimator", v)) {
            check_keys(e, {"gamma", "omega_init", "omega_floor"}, "estimator", v);
            cfg.estimator.gamma = get_num(e, "gamma", cfg.estimator.gamma, "estimator", v);
            cfg.estimator.omega_init =
                get_num(e, "omega_init", cfg.estimator.omega_init, "estimator", v);
            cfg.estimator.omega_floor =
                get_num(e, "omega_floor", cfg.estimator.omega_floor, "estimator", v);
        }
    }

    if (j.contains("feedforward")) {
        const auto& f = j["feedforward"];
        if (f.is_string()) {
            const std::string mode = f.get<std::string>();
            if (mode == "off") {
                cfg.feedforward = {FeedForwardMode::Off, 0.0};
            } else if (mode == "estimated") {
                cfg.feedforward = {FeedForwardMode::Estimated, 0.0};
            } else {
                v.push_back("feedforward must be \"off\", \"estimated\" or {\"constant\": value}");
            }
        } else if (f.is_object()) {
            check_keys(f, {"constant"}, "feedforward", v);
            cfg.feedforward = {FeedForwardMode::Constant,
                               get_num(f, "constant", 0.0, "feedforward", v)};
        } else {
            v.push_back("feedforward must be \"off\", \"estimated\" or {\"constant\": value}");
        }
    }

    if (j.contains("initial")) {
        const auto& i = j["initial"];
        if (expect_object(i, "initial", v)) {
            check_keys(i, {"theta0", "theta_star0", "integrator0"}, "initial", v);
            cfg.initial.theta0 = get_num(i, "theta0", 0.0, "initial", v);
            cfg.initial.theta_star0 = get_num(i, "theta_star0", 0.0, "initial", v);
            cfg.initial.integrator0 = get_num(i, "integrator0", 0.0, "initial", v);
        }
    }

    if (j.contains("metrics")) {
        const auto& m = j["metrics"];
        if (expect_object(m, "metrics", v)) {
            check_keys(m, {"windows", "wrapped"}, "metrics", v);
            if (m.contains("windows")) {
                if (m["windows"].is_array()) {
                    for (const auto& w : m["windows"]) {
                        if (w.is_array() && w.size() == 2 && w[0].is_number() &&
                            w[1].is_number()) {
                            cfg.metric_windows.push_back(
                                {w[0].get<double>(), w[1].get<double>()});
                        } else {
                            v.push_back("metrics.windows entries must be [start, end] pairs");
                        }
                    }
                } else {
                    v.push_back("metrics.windows: expected an array");
                }
            }
            if (m.contains("wrapped")) {
                if (m["wrapped"].is_boolean()) {
                    cfg.wrapped_metrics = m["wrapped"].get<bool>();
                } else {
                    v.push_back("metrics.wrapped: expected a boolean");
                }
            }
        }
    }

    if (j.contains("output")) {
        const auto& o = j["output"];
        if (expect_object(o, "output", v)) {
            check_keys(o, {"trace", "metrics"}, "output", v);
            auto path = [&](const char* key, std::string& target) {
                if (o.contains(key)) {
                    if (o[key].is_string()) {
                        target = o[key].get<std::string>();
                    } else {
                        v.push_back(std::string("output.") + key + ": expected a string");
                    }
                }
            };
            path("trace", cfg.output.trace);
            path("metrics", cfg.output.metrics);
        }
    }

    if (j.contains("reconstruction_reference")) {
        const auto& r = j["reconstruction_reference"];
        if (r.is_string() && r.get<std::string>() == "sine") {
            cfg.reconstruction_offset = kHalfPi;
        } else if (r.is_string() && r.get<std::string>() == "paper") {
            cfg.reconstruction_offset = 0.0;
        } else {
            v.push_back("reconstruction_reference must be \"sine\" or \"paper\"");
        }
    }
    cfg.normalize_floor = get_num(j, "normalize_floor", cfg.normalize_floor, "config", v);

    if (!v.empty()) {
        throw ConfigError(std::move(v));
    }
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({"cannot open config file '" + path + "'"});
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return load_config(buf.str());
}

std::string save_config(const ScenarioConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["dt"] = cfg.dt;
    j["t_end"] = cfg.t_end;
    if (cfg.signal) {
        json s;
        s["frequency"] = frequency_to_json(cfg.signal->frequency);
        json amp = json::array();
        for (const auto& seg : cfg.signal->amplitude.segments) {
            amp.push_back({{"start", seg.start}, {"amplitude", seg.amplitude}});
        }
        s["amplitude"] = std::move(amp);
        const auto& dist = cfg.signal->disturbance;
        json d;
        d["noise_std"] = dist.noise_std;
        d["noise_corner"] = dist.noise_corner;
        d["harmonic3_ratio"] = dist.harmonic3_ratio;
        d["notch_rate"] = dist.notch_rate;
        d["notch_amplitude"] = dist.notch_amplitude;
        json loss = json::array();
        for (const auto& w : dist.data_loss) {
            loss.push_back({{"start", w.start}, {"duration", w.duration}});
        }
        d["data_loss"] = std::move(loss);
        d["seed"] = dist.seed;
        s["disturbance"] = std::move(d);
        j["signal"] = std::move(s);
    }
    if (cfg.ingest) {
        json g;
        g["path"] = cfg.ingest->path;
        json c;
        c["t"] = cfg.ingest->columns.t;
        c["za"] = cfg.ingest->columns.za;
        c["zb"] = cfg.ingest->columns.zb;
        c["zc"] = cfg.ingest->columns.zc;
        if (!cfg.ingest->columns.theta.empty()) {
            c["theta"] = cfg.ingest->columns.theta;
        }
        if (!cfg.ingest->columns.omega.empty()) {
            c["omega"] = cfg.ingest->columns.omega;
        }
        g["columns"] = std::move(c);
        g["gap_factor"] = cfg.ingest->gap_factor;
        j["ingest"] = std::move(g);
    }
    if (cfg.tuner) {
        j["tuner"] = {{"alpha", cfg.tuner->alpha},
                      {"tau", cfg.tuner->tau},
                      {"plant_gain", cfg.tuner->plant_gain}};
    }
    if (cfg.gains) {
        j["gains"] = {{"kp", cfg.gains->kp}, {"ki", cfg.gains->ki}};
    }
    if (cfg.allow_dt_tau_mismatch) {
        j["allow_dt_tau_mismatch"] = true;
    }
    j["estimator"] = {{"gamma", cfg.estimator.gamma},
                      {"omega_init", cfg.estimator.omega_init},
                      {"omega_floor", cfg.estimator.omega_floor}};
    switch (cfg.feedforward.mode) {
        case FeedForwardMode::Off:
            j["feedforward"] = "off";
            break;
        case FeedForwardMode::Estimated:
            j["feedforward"] = "estimated";
            break;
        case FeedForwardMode::Constant:
            j["feedforward"] = {{"constant", cfg.feedforward.constant}};
            break;
    }
    j["initial"] = {{"theta0", cfg.initial.theta0},
                    {"theta_star0", cfg.initial.theta_star0},
                    {"integrator0", cfg.initial.integrator0}};
    json windows = json::array();
    for (const auto& w : cfg.metric_windows) {
        windows.push_back({w.start, w.end});
    }
    j["metrics"] = {{"windows", std::move(windows)}, {"wrapped", cfg.wrapped_metrics}};
    if (!cfg.output.trace.empty() || !cfg.output.metrics.empty()) {
        json o;
        if (!cfg.output.trace.empty()) {
            o["trace"] = cfg.output.trace;
        }
        if (!cfg.output.metrics.empty()) {
            o["metrics"] = cfg.output.metrics;
        }
        j["output"] = std::move(o);
    }
    j["reconstruction_reference"] = cfg.reconstruction_offset == 0.0 ? "paper" : "sine";
    j["normalize_floor"] = cfg.normalize_floor;
    return j.dump(2) + "\n";
}

// --- presets -----------------------------------------------------------------

namespace {

// Five stepwise amplitude changes spanning [0.5, 1.5] signal units.
AmplitudeProfile load_step_amplitudes() {
    AmplitudeProfile amp;
    amp.segments = {{0.0, 1.0}, {1.5, 0.5}, {3.0, 1.0}, {4.5, 1.5}, {6.0, 0.75}, {7.5, 1.25}};
    return amp;
}

ScenarioConfig load_step_preset(const std::string& name, double omega, double omega_init,
                                std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.dt = 0.00025;
    cfg.t_end = 10.0;
    SyntheticSignal sig;
    sig.frequency = FrequencyProfile::constant(omega, 10.0);
    sig.amplitude = load_step_amplitudes();
    sig.disturbance.noise_std = 0.02;
    sig.disturbance.notch_rate = 25.0;
    sig.disturbance.notch_amplitude = 0.3;
    sig.disturbance.data_loss = {{8.2, 0.05}};
    sig.disturbance.seed = seed;
    cfg.signal = std::move(sig);
    cfg.tuner = TunerInput{};
    cfg.estimator = {4000.0, omega_init, 1.0};
    cfg.feedforward = {FeedForwardMode::Estimated, 0.0};
    cfg.metric_windows = {{1.0, 10.0}};
    return cfg;
}

}  // namespace

ScenarioConfig preset(const std::string& name) {
    if (name == "load-step-50") {
        return load_step_preset(name, 50.0, 120.0, 1);
    }
    if (name == "load-step-150") {
        return load_step_preset(name, 150.0, 250.0, 2);
    }
    if (name == "ramp-startup") {
        ScenarioConfig cfg;
        cfg.name = name;
        cfg.dt = 0.00025;
        cfg.t_end = 10.0;
        SyntheticSignal sig;
        sig.frequency.segments = {{FrequencySegment::Kind::Constant, 90.0, 9.0},
                                  {FrequencySegment::Kind::Ramp, 100.0, 1.0}};
        sig.amplitude = AmplitudeProfile::constant(1.0);
        sig.disturbance.noise_std = 0.02;
        sig.disturbance.seed = 7;
        cfg.signal = std::move(sig);
        cfg.tuner = TunerInput{};
        cfg.estimator = {4000.0, 90.0, 1.0};
        cfg.feedforward = {FeedForwardMode::Estimated, 0.0};
        cfg.metric_windows = {{9.0, 10.0}};
        return cfg;
    }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
    return {"load-step-50", "load-step-150", "ramp-startup"};
}

}  // namespace srfpll
