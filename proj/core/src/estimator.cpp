#include "srfpll/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace srfpll {

namespace {
// sign(0) = 0: no adaptation impulse when eta1 crosses zero exactly.
double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace

EstimatorState make_estimator_state(const EstimatorConfig& cfg) {
    return {0.0, 0.0, cfg.omega_init};
}

bool estimator_step(EstimatorState& state, double z_n, bool input_valid, double dt,
                    const EstimatorConfig& cfg) {
    if (!std::isfinite(z_n) || !(dt > 0.0)) {
        return false;
    }
    const double w = state.omega_tilde;
    const double d_eta1 = state.eta2;
    const double d_eta2 = -w * w * state.eta1 - 2.0 * w * state.eta2 + 2.0 * w * z_n;
    const double d_omega = -cfg.gamma * sign(state.eta1) * (z_n - state.eta2);

    state.eta1 += dt * d_eta1;
    state.eta2 += dt * d_eta2;
    if (input_valid) {
        state.omega_tilde = std::max(w + dt * d_omega, cfg.omega_floor);
    }
    // Data loss: the filter keeps integrating the held input, the estimate is frozen.
    return true;
}

double average_estimate(double wa, double wb, double wc) { return (wa + wb + wc) / 3.0; }

double convergence_bound(double gamma, double amplitude, double omega, double delta) {
    if (!(omega > 0.0)) {
        throw std::invalid_argument("convergence_bound: omega must be > 0");
    }
    return 0.5 * gamma * amplitude / omega + delta;
}

}  // namespace srfpll
