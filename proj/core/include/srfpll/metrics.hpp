#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace srfpll {

// Half-open evaluation window [start, end) in seconds. Adjacent windows
// compose without double counting.
struct TimeWindow {
    double start = 0.0;
    double end = 0.0;
};

// Per-sample arrays of one closed-loop run, all of equal length with strictly
// increasing t. Angle columns are wrapped to [0, 2*pi). omega_tilde records
// the feed-forward value the loop actually used (0 when feed-forward is off).
struct RunTrace {
    std::vector<double> t;
    std::vector<double> za, zb, zc;
    std::vector<std::uint8_t> valid;
    std::vector<double> omega_true;
    std::vector<double> theta_true;
    std::vector<double> omega_tilde;
    std::vector<double> omega_star;
    std::vector<double> theta_star;
    std::vector<double> zq;
    std::vector<double> zbar_a;       // normalized measured phase a
    std::vector<double> zbar_a_star;  // reconstructed phase a

    std::size_t size() const { return t.size(); }
    bool has_reference() const;  // theta_true/omega_true carry real values (synthetic or mapped)
};

struct PhaseErrorMetrics {
    double e_sigma = 0.0;  // sum of |dtheta| over the window
    double e_me = 0.0;     // e_sigma / K
    std::size_t count = 0;
};

// dtheta = theta_star - theta_true, either raw (paper-faithful: keeps the
// spurious spikes where one angle wraps before the other) or wrapped to
// (-pi, pi]. Throws std::invalid_argument for an empty window.
PhaseErrorMetrics phase_error_metrics(const RunTrace& trace, TimeWindow window, bool wrapped);

// Element-wise sqrt(2/3)*sin(theta_star).
std::vector<double> reconstruct_waveform(std::span<const double> theta_star);

// Root mean square of (measured - reconstructed) over the window.
// Throws std::invalid_argument on length mismatch or an empty window.
double waveform_rmse(std::span<const double> t, std::span<const double> measured,
                     std::span<const double> reconstructed, TimeWindow window);

// One evaluated window, serialized as
// {"scenario":..., "mode":"wrapped"|"raw", "window":[a,b],
//  "E_sigma":..., "E_me":..., "E_rms":..., "K":...}
// E_sigma/E_me are null when the trace has no phase reference.
struct MetricsSummary {
    std::string scenario;
    std::string mode;
    TimeWindow window;
    bool has_phase_reference = true;
    double e_sigma = 0.0;
    double e_me = 0.0;
    double e_rms = 0.0;
    std::size_t count = 0;
};

MetricsSummary evaluate_window(const RunTrace& trace, TimeWindow window, bool wrapped,
                               const std::string& scenario_name);

std::string metrics_to_json(const std::vector<MetricsSummary>& summaries);

// Full trace CSV with columns
// t,za,zb,zc,valid,omega_true,theta_true,omega_tilde,omega_star,theta_star,zq,zbar_a,zbar_a_star
void write_trace_csv(const RunTrace& trace, std::ostream& out);

// Reads a CSV produced by write_trace_csv. Throws IngestError on malformed input.
RunTrace read_trace_csv(std::istream& in);

}  // namespace srfpll
