#pragma once

// Test-only utilities shared by the unit and acceptance suites: a tiny
// deterministic PRNG for property cases, the inverse dq transform, the
// frequency error-function evaluator, and an exponential-envelope fit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "srfpll/pll.hpp"
#include "srfpll/signals.hpp"
#include "srfpll/transforms.hpp"

namespace testutil {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

// Balanced three-phase sample of amplitude z at phase theta (cos convention).
inline srfpll::ThreePhaseSample balanced_sample(double z, double theta, double t = 0.0) {
    constexpr double third = 2.0 * std::numbers::pi / 3.0;
    return {t, z * std::cos(theta), z * std::cos(theta - third), z * std::cos(theta - 2.0 * third),
            true};
}

// Inverse rotating-frame transform for zero-homopolar signals.
inline srfpll::ThreePhaseSample dq_to_abc(const srfpll::DqFrame& f, double t = 0.0) {
    constexpr double third = 2.0 * std::numbers::pi / 3.0;
    srfpll::ThreePhaseSample s;
    s.t = t;
    s.za = f.zd * std::cos(f.theta_star) + f.zq * std::sin(f.theta_star);
    s.zb = f.zd * std::cos(f.theta_star - third) + f.zq * std::sin(f.theta_star - third);
    s.zc = f.zd * std::cos(f.theta_star - 2.0 * third) + f.zq * std::sin(f.theta_star - 2.0 * third);
    return s;
}

// Frequency error function E_w(jw) = 1/(1 + U*(kp*jw + ki)/(jw*(tau*jw + 1))).
inline std::complex<double> frequency_error_function(const srfpll::PiGains& gains, double tau,
                                                     double plant_gain, double omega) {
    const std::complex<double> jw(0.0, omega);
    const auto h_w = plant_gain * (gains.kp * jw + gains.ki) / (jw * (tau * jw + 1.0));
    return 1.0 / (1.0 + h_w);
}

// Least-squares decay rate of the error envelope between the 90% and 2%
// levels of the initial error. Positive result = decaying.
inline double fitted_decay_rate(const std::vector<double>& t, const std::vector<double>& err) {
    const std::size_t n = err.size();
    std::vector<double> env(n);
    double running = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        running = std::max(running, std::abs(err[i]));
        env[i] = running;
    }
    const double e0 = env.front();
    std::size_t a = 0;
    while (a < n && env[a] > 0.9 * e0) {
        ++a;
    }
    std::size_t b = a;
    while (b < n && env[b] > 0.02 * e0) {
        ++b;
    }
    if (b <= a + 10 || b >= n) {
        return 0.0;
    }
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    const auto m = static_cast<double>(b - a);
    for (std::size_t i = a; i < b; ++i) {
        const double y = std::log(env[i]);
        st += t[i];
        sy += y;
        stt += t[i] * t[i];
        sty += t[i] * y;
    }
    const double slope = (m * sty - st * sy) / (m * stt - st * st);
    return -slope;
}

// Mean of x over the half-open time window [start, end).
inline double window_mean(const std::vector<double>& t, const std::vector<double>& x,
                          double start, double end) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= start && t[i] < end) {
            sum += x[i];
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

// Mean absolute wrapped phase error over [start, end).
inline double window_mean_abs_phase_error(const std::vector<double>& t,
                                          const std::vector<double>& theta_star,
                                          const std::vector<double>& theta_true, double start,
                                          double end) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= start && t[i] < end) {
            sum += std::abs(srfpll::wrap_pi(theta_star[i] - theta_true[i]));
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace testutil
