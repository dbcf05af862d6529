#include "srfpll/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "srfpll/errors.hpp"
#include "srfpll/pll.hpp"
#include "srfpll/signals.hpp"

namespace srfpll {
namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Index range of the half-open window [start, end).
std::pair<std::size_t, std::size_t> window_range(const std::vector<double>& t, TimeWindow w) {
    const auto first = std::lower_bound(t.begin(), t.end(), w.start);
    const auto last = std::lower_bound(first, t.end(), w.end);
    return {static_cast<std::size_t>(first - t.begin()), static_cast<std::size_t>(last - t.begin())};
}

}  // namespace

bool RunTrace::has_reference() const {
    return !theta_true.empty() && std::isfinite(theta_true.front());
}

PhaseErrorMetrics phase_error_metrics(const RunTrace& trace, TimeWindow window, bool wrapped) {
    auto [first, last] = window_range(trace.t, window);
    if (first >= last) {
        throw std::invalid_argument("phase_error_metrics: window contains no samples");
    }
    double sum = 0.0;
    for (std::size_t k = first; k < last; ++k) {
        double d = trace.theta_star[k] - trace.theta_true[k];
        if (wrapped) {
            d = wrap_pi(d);
        }
        sum += std::abs(d);
    }
    PhaseErrorMetrics out;
    out.count = last - first;
    out.e_sigma = sum;
    out.e_me = sum / static_cast<double>(out.count);
    return out;
}

std::vector<double> reconstruct_waveform(std::span<const double> theta_star) {
    std::vector<double> out;
    out.reserve(theta_star.size());
    for (double th : theta_star) {
        out.push_back(kNormalizedAmplitude * std::sin(th));
    }
    return out;
}

double waveform_rmse(std::span<const double> t, std::span<const double> measured,
                     std::span<const double> reconstructed, TimeWindow window) {
    if (measured.size() != reconstructed.size() || t.size() != measured.size()) {
        throw std::invalid_argument("waveform_rmse: series lengths differ");
    }
    std::vector<double> tv(t.begin(), t.end());
    auto [first, last] = window_range(tv, window);
    if (first >= last) {
        throw std::invalid_argument("waveform_rmse: window contains no samples");
    }
    double sum = 0.0;
    for (std::size_t k = first; k < last; ++k) {
        const double d = measured[k] - reconstructed[k];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(last - first));
}

MetricsSummary evaluate_window(const RunTrace& trace, TimeWindow window, bool wrapped,
                               const std::string& scenario_name) {
    MetricsSummary out;
    out.scenario = scenario_name;
    out.mode = wrapped ? "wrapped" : "raw";
    out.window = window;
    out.has_phase_reference = trace.has_reference();
    if (out.has_phase_reference) {
        const auto pe = phase_error_metrics(trace, window, wrapped);
        out.e_sigma = pe.e_sigma;
        out.e_me = pe.e_me;
        out.count = pe.count;
    }
    out.e_rms = waveform_rmse(trace.t, trace.zbar_a, trace.zbar_a_star, window);
    if (!out.has_phase_reference) {
        auto [first, last] = window_range(trace.t, window);
        out.count = last - first;
    }
    return out;
}

std::string metrics_to_json(const std::vector<MetricsSummary>& summaries) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& m : summaries) {
        nlohmann::ordered_json j;
        j["scenario"] = m.scenario;
        j["mode"] = m.mode;
        j["window"] = {m.window.start, m.window.end};
        if (m.has_phase_reference) {
            j["E_sigma"] = m.e_sigma;
            j["E_me"] = m.e_me;
        } else {
            j["E_sigma"] = nullptr;
            j["E_me"] = nullptr;
        }
        j["E_rms"] = m.e_rms;
        j["K"] = m.count;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
    out << "t,za,zb,zc,valid,omega_true,theta_true,omega_tilde,omega_star,theta_star,zq,"
           "zbar_a,zbar_a_star\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
        out << fmt(trace.t[k]) << ',' << fmt(trace.za[k]) << ',' << fmt(trace.zb[k]) << ','
            << fmt(trace.zc[k]) << ',' << (trace.valid[k] ? '1' : '0') << ','
            << fmt(trace.omega_true[k]) << ',' << fmt(trace.theta_true[k]) << ','
            << fmt(trace.omega_tilde[k]) << ',' << fmt(trace.omega_star[k]) << ','
            << fmt(trace.theta_star[k]) << ',' << fmt(trace.zq[k]) << ',' << fmt(trace.zbar_a[k])
            << ',' << fmt(trace.zbar_a_star[k]) << '\n';
    }
}

RunTrace read_trace_csv(std::istream& in) {
    std::string line;
    const auto strip_cr = [](std::string& s) {
        if (!s.empty() && s.back() == '\r') {
            s.pop_back();
        }
    };
    if (!std::getline(in, line)) {
        throw IngestError("trace CSV is empty", 1);
    }
    strip_cr(line);
    const std::string expected =
        "t,za,zb,zc,valid,omega_true,theta_true,omega_tilde,omega_star,theta_star,zq,zbar_a,"
        "zbar_a_star";
    if (line != expected) {
        throw IngestError("trace CSV header mismatch", 1);
    }
    RunTrace trace;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        strip_cr(line);
        if (line.empty()) {
            continue;
        }
        double fields[13];
        std::size_t pos = 0;
        for (int f = 0; f < 13; ++f) {
            const std::size_t next = line.find(',', pos);
            const bool is_last = f == 12;
            if ((next == std::string::npos) != is_last) {
                throw IngestError("trace row has wrong field count", row);
            }
            const std::string cell = line.substr(pos, next == std::string::npos ? next : next - pos);
            try {
                fields[f] = std::stod(cell);
            } catch (const std::exception&) {
                throw IngestError("trace row field '" + cell + "' is not a number", row);
            }
            pos = next + 1;
        }
        trace.t.push_back(fields[0]);
        trace.za.push_back(fields[1]);
        trace.zb.push_back(fields[2]);
        trace.zc.push_back(fields[3]);
        trace.valid.push_back(fields[4] != 0.0);
        trace.omega_true.push_back(fields[5]);
        trace.theta_true.push_back(fields[6]);
        trace.omega_tilde.push_back(fields[7]);
        trace.omega_star.push_back(fields[8]);
        trace.theta_star.push_back(fields[9]);
        trace.zq.push_back(fields[10]);
        trace.zbar_a.push_back(fields[11]);
        trace.zbar_a_star.push_back(fields[12]);
        if (trace.size() > 1 && !(trace.t[trace.size() - 1] > trace.t[trace.size() - 2])) {
            throw IngestError("trace timestamps must be strictly increasing", row);
        }
    }
    if (trace.size() == 0) {
        throw IngestError("trace CSV has no data rows", 1);
    }
    return trace;
}

}  // namespace srfpll
