#pragma once

namespace srfpll {

struct EstimatorConfig {
    double gamma = 4000.0;      // adaptation gain, > 0
    double omega_init = 120.0;  // rad/s; initialization above the expected omega is recommended
    double omega_floor = 1.0;   // rad/s; keeps the internal filter well-posed
};

// Per-channel state of the model-free frequency estimator: a second-order
// filter (eta1, eta2) tuned at the running estimate omega_tilde.
struct EstimatorState {
    double eta1 = 0.0;
    double eta2 = 0.0;
    double omega_tilde = 0.0;
};

EstimatorState make_estimator_state(const EstimatorConfig& cfg);

// One explicit Euler step:
//   eta1' = eta2
//   eta2' = -w^2*eta1 - 2*w*eta2 + 2*w*z
//   w'    = -gamma * sign(eta1) * (z - eta2),  sign(0) = 0
// with w clamped to >= omega_floor. When input_valid is false (data loss) the
// filter states integrate with the held input but omega_tilde stays frozen.
// Returns false and leaves the state untouched for non-finite input.
bool estimator_step(EstimatorState& state, double z_n, bool input_valid, double dt,
                    const EstimatorConfig& cfg);

// Three-channel average entering the loop as the feed-forward frequency.
double average_estimate(double wa, double wb, double wc);

// Theoretical upper bound on the exponential convergence rate,
// beta = gamma*amplitude/(2*omega) + delta [1/s]. Throws for omega <= 0.
double convergence_bound(double gamma, double amplitude, double omega, double delta = 0.0);

}  // namespace srfpll
