#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace srfpll {

// Peak channel amplitude of a normalized balanced three-phase signal, sqrt(2/3).
inline constexpr double kNormalizedAmplitude = 0.81649658092772603;

// Division floor for the normalization factor; inputs with a smaller Euclidean
// norm are passed through flagged invalid instead of being divided.
inline constexpr double kDefaultNormFloor = 1e-9;

struct FrequencySegment {
    enum class Kind {
        Constant,  // hold omega [rad/s]
        Ramp,      // omega grows from the previous segment's end value with slope kappa [rad/s^2]
        Step,      // jump to omega [rad/s] and hold (explicit discontinuity)
    };

    Kind kind = Kind::Constant;
    double value = 0.0;  // omega for Constant/Step, kappa for Ramp
    double duration = 0.0;
};

// Piecewise frequency profile. The instantaneous phase is the running integral
// of omega(t) and stays continuous across segment boundaries; a Ramp segment
// continues from wherever the previous segment ended (0 rad/s if first).
struct FrequencyProfile {
    std::vector<FrequencySegment> segments;

    double total_duration() const;
    // Instantaneous omega at time t; holds the final value past the profile end.
    double omega_at(double t) const;

    static FrequencyProfile constant(double omega, double duration);
};

struct AmplitudeSegment {
    double start = 0.0;      // seconds
    double amplitude = 1.0;  // signal units, > 0
};

// Piecewise-constant amplitude; segments sorted by start time, first at t = 0.
struct AmplitudeProfile {
    std::vector<AmplitudeSegment> segments;

    double amplitude_at(double t) const;

    static AmplitudeProfile constant(double amplitude);
};

struct LossWindow {
    double start = 0.0;
    double duration = 0.0;
};

struct DisturbanceConfig {
    double noise_std = 0.0;        // stationary std of the band-limited noise, signal units
    double noise_corner = 0.0;     // low-pass corner [rad/s]; 0 selects the default 1/(10*dt)
    double harmonic3_ratio = 0.0;  // additive 3-omega component, relative to the fundamental, [0, 0.5]
    double notch_rate = 0.0;       // Poisson rate of single-sample spikes [events/s]
    double notch_amplitude = 0.0;  // spike magnitude, signal units (alternating sign)
    std::vector<LossWindow> data_loss;
    std::uint64_t seed = 0;
};

struct ThreePhaseSample {
    double t = 0.0;
    double za = 0.0;
    double zb = 0.0;
    double zc = 0.0;
    bool valid = true;  // false inside a data-loss window
};

// Samples plus the generating ground truth, index-aligned.
struct GeneratedSignal {
    std::vector<ThreePhaseSample> samples;
    std::vector<double> omega_true;  // rad/s
    std::vector<double> theta_true;  // rad, wrapped to [0, 2*pi)
};

// Collects every constraint violated by the generator inputs; empty means valid.
std::vector<std::string> validate_signal_config(const FrequencyProfile& profile,
                                                const AmplitudeProfile& amplitude,
                                                const DisturbanceConfig& disturbance, double dt,
                                                double t_end);

// Synthesizes samples at t = 0, dt, 2*dt, ... < t_end. The phase integrates with
// the same first-order Euler step the loop simulator uses. During a data-loss
// window all three channels hold the last valid (disturbed) values and valid is
// false. Identical inputs produce bit-identical output.
// Throws ConfigError when validate_signal_config reports violations.
GeneratedSignal generate(const FrequencyProfile& profile, const AmplitudeProfile& amplitude,
                         const DisturbanceConfig& disturbance, double dt, double t_end,
                         double theta0 = 0.0);

// Divides each channel by N = sqrt(za^2 + zb^2 + zc^2). When N < floor the
// sample is returned unchanged with valid = false.
ThreePhaseSample normalize(const ThreePhaseSample& s, double floor = kDefaultNormFloor);

// Trace CSV: header t,za,zb,zc,valid,omega_true,theta_true, one row per sample,
// full-precision floats with '.' decimal separator.
void write_signal_csv(const GeneratedSignal& signal, std::ostream& out);

}  // namespace srfpll
