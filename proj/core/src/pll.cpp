#include "srfpll/pll.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "srfpll/errors.hpp"

namespace srfpll {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::complex<double> loop_transfer(const PiGains& gains, double tau, double plant_gain,
                                   double omega) {
    const std::complex<double> jw(0.0, omega);
    return plant_gain * (gains.kp * jw + gains.ki) / (jw * jw) / (tau * jw + 1.0);
}

}  // namespace

double wrap_two_pi(double angle) {
    double a = std::fmod(angle, kTwoPi);
    if (a < 0.0) {
        a += kTwoPi;
    }
    return a;
}

double wrap_pi(double angle) {
    double a = std::fmod(angle + std::numbers::pi, kTwoPi);
    if (a <= 0.0) {
        a += kTwoPi;
    }
    return a - std::numbers::pi;
}

TunerResult tune_symmetrical_optimum(const TunerInput& in) {
    std::vector<std::string> v;
    if (!(in.alpha > 1.0)) {
        v.push_back("tuner alpha must be > 1");
    }
    if (!(in.tau > 0.0)) {
        v.push_back("tuner tau must be > 0");
    }
    if (!(in.plant_gain > 0.0)) {
        v.push_back("tuner plant_gain must be > 0");
    }
    if (!v.empty()) {
        throw ConfigError(std::move(v));
    }
    TunerResult out;
    out.gains.kp = 1.0 / (in.plant_gain * in.alpha * in.tau);
    out.gains.ki = 1.0 / (in.plant_gain * in.alpha * in.alpha * in.alpha * in.tau * in.tau);
    out.omega_c = 1.0 / (in.alpha * in.tau);
    return out;
}

bool pll_step(PllState& state, double zq, double omega_ff, const PiGains& gains, double dt) {
    if (!std::isfinite(zq) || !std::isfinite(omega_ff) || !(dt > 0.0)) {
        return false;
    }
    const double e = -zq;  // setpoint zq* = 0, negative feedback
    state.integrator += gains.ki * e * dt;
    state.omega_star = gains.kp * e + state.integrator + omega_ff;
    state.theta_star = wrap_two_pi(state.theta_star + state.omega_star * dt);
    return true;
}

LoopResponse open_loop_response(const PiGains& gains, double tau, double plant_gain,
                                double omega) {
    const auto h = loop_transfer(gains, tau, plant_gain, omega);
    LoopResponse out;
    out.magnitude_db = 20.0 * std::log10(std::abs(h));
    out.phase_deg = std::arg(h) * 180.0 / std::numbers::pi;
    return out;
}

PhaseMarginResult phase_margin(const PiGains& gains, double tau, double plant_gain) {
    double lo = gains.ki / gains.kp / 100.0;
    double hi = 100.0 / tau;
    auto mag = [&](double w) { return std::abs(loop_transfer(gains, tau, plant_gain, w)); };
    if (mag(lo) < 1.0 || mag(hi) > 1.0) {
        throw AnalysisError("phase_margin: no 0 dB crossover in the scan range");
    }
    // |H| falls monotonically (-40/-20/-40 dB per decade), so bisection on the
    // log axis brackets the single crossing.
    for (int i = 0; i < 200 && (hi - lo) > 1e-6 * lo; ++i) {
        const double mid = std::sqrt(lo * hi);
        (mag(mid) > 1.0 ? lo : hi) = mid;
    }
    PhaseMarginResult out;
    out.omega_c = std::sqrt(lo * hi);
    out.phi_m_deg = 180.0 + open_loop_response(gains, tau, plant_gain, out.omega_c).phase_deg;
    return out;
}

double steady_state_ramp_error(double kappa, double ki, double plant_gain) {
    if (!(ki > 0.0) || !(plant_gain > 0.0)) {
        throw ConfigError({"steady_state_ramp_error: ki and plant_gain must be > 0"});
    }
    return kappa / (plant_gain * ki);
}

}  // namespace srfpll
