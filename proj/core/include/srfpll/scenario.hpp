#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srfpll/estimator.hpp"
#include "srfpll/metrics.hpp"
#include "srfpll/pll.hpp"
#include "srfpll/signals.hpp"

namespace srfpll {

enum class FeedForwardMode {
    Off,        // omega_ff = 0
    Estimated,  // three per-phase estimators, averaged
    Constant,   // fixed nominal frequency
};

struct FeedForward {
    FeedForwardMode mode = FeedForwardMode::Off;
    double constant = 0.0;  // used only in Constant mode
};

struct SyntheticSignal {
    FrequencyProfile frequency;
    AmplitudeProfile amplitude;
    DisturbanceConfig disturbance;
};

// Maps trace columns to CSV columns of a recorded file; each entry is a header
// name or a 0-based column index given as digits. theta/omega references are
// optional (encoder ground truth, when the recording has one).
struct ColumnMap {
    std::string t = "t";
    std::string za = "za";
    std::string zb = "zb";
    std::string zc = "zc";
    std::string theta;  // optional
    std::string omega;  // optional
};

struct IngestSpec {
    std::string path;
    ColumnMap columns;
    double gap_factor = 1.5;  // gaps > gap_factor*median(dt) become data-loss windows
};

struct InitialConditions {
    double theta0 = 0.0;       // generator phase at t = 0
    double theta_star0 = 0.0;  // loop angle at t = 0
    double integrator0 = 0.0;  // PI integrator at t = 0 (warm start)
};

// Optional file destinations; empty selects <name>_trace.csv / <name>_metrics.json.
struct OutputPaths {
    std::string trace;
    std::string metrics;
};

struct ScenarioConfig {
    std::string name = "scenario";

    // Exactly one signal source.
    std::optional<SyntheticSignal> signal;
    std::optional<IngestSpec> ingest;

    double dt = 0.00025;  // sampling period [s]; ingest mode uses the file's median dt
    double t_end = 0.0;   // run length [s]; ignored for ingest

    // Exactly one of tuner / explicit gains.
    std::optional<TunerInput> tuner;
    std::optional<PiGains> gains;
    bool allow_dt_tau_mismatch = false;

    EstimatorConfig estimator;
    FeedForward feedforward;
    InitialConditions initial;

    std::vector<TimeWindow> metric_windows;
    bool wrapped_metrics = true;
    OutputPaths output;

    // Phase offset applied to theta_star before the sin() reconstruction.
    // pi/2 (default) compares in the sine-referenced angle, matching the cos
    // generator; 0 is the paper-literal Z*sin(theta_star).
    double reconstruction_offset = 1.5707963267948966;

    double normalize_floor = kDefaultNormFloor;
};

// Every violated constraint, empty when the configuration is runnable.
std::vector<std::string> validate(const ScenarioConfig& cfg);

// The gains the run will use: tuner output or the explicit pair.
TunerResult resolve_gains(const ScenarioConfig& cfg);

struct ScenarioResult {
    RunTrace trace;
    PiGains gains;
    double omega_c = 0.0;  // 0 when gains were given explicitly
    std::vector<MetricsSummary> metrics;
    std::vector<LossWindow> detected_loss;  // ingest mode: auto-detected gaps
};

// Runs the closed loop over the configured source. Per-sample order:
// acquire -> normalize -> estimator steps + average (Estimated mode only) ->
// abc_to_dq at the current theta_star -> pll_step -> record.
// Throws ConfigError (with all violations), IngestError, or NumericalError.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

struct IngestResult {
    std::vector<ThreePhaseSample> samples;
    std::vector<double> theta_ref;  // empty when the map has no theta column
    std::vector<double> omega_ref;  // empty when the map has no omega column
    std::vector<LossWindow> detected_loss;
    double median_dt = 0.0;
};

// Reads a recorded CSV, validates monotonic timestamps, and fills gaps larger
// than gap_factor*median(dt) with sample-and-hold rows flagged invalid so the
// fixed-step runner sees a uniform stream. Throws IngestError with the
// offending 1-based file line where applicable.
IngestResult ingest_csv(const std::string& path, const ColumnMap& columns,
                        double gap_factor = 1.5);

// JSON configuration round-trip. load rejects unknown keys and type mismatches
// as ConfigError; save(load(x)) and load(save(cfg)) are stable.
ScenarioConfig load_config(const std::string& json_text);
ScenarioConfig load_config_file(const std::string& path);
std::string save_config(const ScenarioConfig& cfg);

// Built-in experiment classes: "load-step-50", "load-step-150", "ramp-startup".
// Each defaults to feed-forward = Estimated; pass FeedForwardMode::Off for the
// plain-loop variant. Throws std::invalid_argument for an unknown name.
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace srfpll
