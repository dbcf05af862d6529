#pragma once

#include "srfpll/signals.hpp"

namespace srfpll {

struct PiGains {
    double kp = 0.0;  // rad/s per unit zq
    double ki = 0.0;  // rad/s^2 per unit zq
};

struct TunerInput {
    double alpha = 40.0;   // crossover scale-down factor, > 1
    double tau = 0.00025;  // sampling delay [s]
    double plant_gain = kNormalizedAmplitude;  // U, the loop input amplitude
};

struct TunerResult {
    PiGains gains;
    double omega_c = 0.0;  // design crossover 1/(alpha*tau) [rad/s]
};

// Symmetrical-optimum tuning: kp = 1/(U*alpha*tau), ki = 1/(U*alpha^3*tau^2).
// Places the PI zero and the delay pole geometrically symmetric about the
// crossover, which maximizes the phase margin there.
// Throws ConfigError when the TunerInput invariants are violated.
TunerResult tune_symmetrical_optimum(const TunerInput& in);

struct PllState {
    double theta_star = 0.0;  // rad, wrapped to [0, 2*pi)
    double omega_star = 0.0;  // rad/s, PI output plus feed-forward
    double integrator = 0.0;  // PI integrator state [rad/s]
};

// One loop update. zq is the q-axis output of the normalized input at the
// current theta_star; the regulation target is zq -> 0, so the PI error is
// e = -zq (negative feedback). omega_ff is 0 for the plain loop, the averaged
// estimate for the feed-forward variant.
//   integrator += ki*e*dt
//   omega_star  = kp*e + integrator + omega_ff
//   theta_star += omega_star*dt, wrapped to [0, 2*pi)
// Returns false and leaves the state untouched for non-finite zq.
bool pll_step(PllState& state, double zq, double omega_ff, const PiGains& gains, double dt);

struct LoopResponse {
    double magnitude_db = 0.0;
    double phase_deg = 0.0;
};

// Open-loop H(jw) = U*(kp*jw + ki)/(jw)^2 * 1/(tau*jw + 1).
LoopResponse open_loop_response(const PiGains& gains, double tau, double plant_gain, double omega);

struct PhaseMarginResult {
    double phi_m_deg = 0.0;
    double omega_c = 0.0;  // 0 dB crossover located by the search [rad/s]
};

// Locates the 0 dB crossing by bisection over [ki/kp/100, 100/tau] and returns
// phi_m = 180 + arg H(j*omega_c). Throws AnalysisError when the magnitude does
// not cross 0 dB inside the scan range.
PhaseMarginResult phase_margin(const PiGains& gains, double tau, double plant_gain);

// Steady-state tracking deficit under a frequency ramp of inclination kappa:
// kappa/(plant_gain*ki). With plant_gain = sqrt(2/3) this is sqrt(3/2)*kappa/ki.
double steady_state_ramp_error(double kappa, double ki, double plant_gain);

// Wraps an angle into [0, 2*pi).
double wrap_two_pi(double angle);

// Wraps an angle difference into (-pi, pi].
double wrap_pi(double angle);

}  // namespace srfpll
