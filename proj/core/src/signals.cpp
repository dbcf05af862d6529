#include "srfpll/signals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "srfpll/errors.hpp"
#include "srfpll/pll.hpp"

namespace srfpll {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Self-contained PRNG so that traces are bit-identical across platforms and
// standard libraries (std distributions are implementation-defined).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Box-Muller on top of SplitMix64.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - rng_.uniform();  // (0, 1], keeps log() finite
        const double u2 = rng_.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = kTwoPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// White Gaussian noise through a single-pole low-pass, rescaled so the
// stationary output std equals `std`.
class BandLimitedNoise {
public:
    BandLimitedNoise(std::uint64_t seed, double std, double corner, double dt)
        : gauss_(seed), pole_(std::exp(-corner * dt)) {
        const double stationary = std::sqrt((1.0 - pole_) / (1.0 + pole_));
        scale_ = stationary > 0.0 ? std / stationary : 0.0;
    }

    double next() {
        state_ = pole_ * state_ + (1.0 - pole_) * gauss_.next();
        return scale_ * state_;
    }

private:
    GaussianStream gauss_;
    double pole_;
    double scale_;
    double state_ = 0.0;
};

// Single-sample spikes of alternating sign at Poisson-distributed instants.
class NotchStream {
public:
    NotchStream(std::uint64_t seed, double rate, double amplitude)
        : rng_(seed), rate_(rate), amplitude_(amplitude) {
        if (rate_ > 0.0) {
            next_event_ = exponential();
        }
    }

    double next(double t) {
        if (rate_ <= 0.0 || amplitude_ == 0.0) {
            return 0.0;
        }
        double spike = 0.0;
        while (t >= next_event_) {
            spike += positive_ ? amplitude_ : -amplitude_;
            positive_ = !positive_;
            next_event_ += exponential();
        }
        return spike;
    }

private:
    double exponential() { return -std::log(1.0 - rng_.uniform()) / rate_; }

    SplitMix64 rng_;
    double rate_;
    double amplitude_;
    double next_event_ = 0.0;
    bool positive_ = true;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

double FrequencyProfile::total_duration() const {
    double total = 0.0;
    for (const auto& seg : segments) {
        total += seg.duration;
    }
    return total;
}

double FrequencyProfile::omega_at(double t) const {
    double seg_start = 0.0;
    double omega = 0.0;
    for (const auto& seg : segments) {
        const double seg_end = seg_start + seg.duration;
        switch (seg.kind) {
            case FrequencySegment::Kind::Constant:
            case FrequencySegment::Kind::Step:
                omega = seg.value;
                break;
            case FrequencySegment::Kind::Ramp:
                omega += seg.value * (std::min(t, seg_end) - seg_start);
                break;
        }
        if (t < seg_end) {
            return omega;
        }
        if (seg.kind == FrequencySegment::Kind::Ramp) {
            // omega already advanced to the segment end value
        }
        seg_start = seg_end;
    }
    return omega;  // hold the final value past the profile end
}

FrequencyProfile FrequencyProfile::constant(double omega, double duration) {
    return {{{FrequencySegment::Kind::Constant, omega, duration}}};
}

double AmplitudeProfile::amplitude_at(double t) const {
    double amp = segments.empty() ? 1.0 : segments.front().amplitude;
    for (const auto& seg : segments) {
        if (t >= seg.start) {
            amp = seg.amplitude;
        } else {
            break;
        }
    }
    return amp;
}

AmplitudeProfile AmplitudeProfile::constant(double amplitude) {
    return {{{0.0, amplitude}}};
}

std::vector<std::string> validate_signal_config(const FrequencyProfile& profile,
                                                const AmplitudeProfile& amplitude,
                                                const DisturbanceConfig& disturbance, double dt,
                                                double t_end) {
    std::vector<std::string> v;
    if (!(dt > 0.0)) {
        v.push_back("dt must be > 0");
    }
    if (!(t_end > dt)) {
        v.push_back("t_end must be > dt");
    }
    if (profile.segments.empty()) {
        v.push_back("frequency profile has no segments");
    }
    for (std::size_t i = 0; i < profile.segments.size(); ++i) {
        if (!(profile.segments[i].duration > 0.0)) {
            v.push_back("frequency segment " + std::to_string(i) + " duration must be > 0");
        }
        if (!std::isfinite(profile.segments[i].value)) {
            v.push_back("frequency segment " + std::to_string(i) + " value must be finite");
        }
    }
    if (amplitude.segments.empty()) {
        v.push_back("amplitude profile has no segments");
    } else if (amplitude.segments.front().start != 0.0) {
        v.push_back("first amplitude segment must start at t = 0");
    }
    for (std::size_t i = 0; i < amplitude.segments.size(); ++i) {
        if (!(amplitude.segments[i].amplitude > 0.0)) {
            v.push_back("amplitude segment " + std::to_string(i) + " must be > 0");
        }
        if (i > 0 && !(amplitude.segments[i].start > amplitude.segments[i - 1].start)) {
            v.push_back("amplitude segment starts must be strictly increasing");
        }
    }
    if (!(disturbance.noise_std >= 0.0)) {
        v.push_back("noise_std must be >= 0");
    }
    if (!(disturbance.noise_corner >= 0.0)) {
        v.push_back("noise_corner must be >= 0");
    }
    if (!(disturbance.harmonic3_ratio >= 0.0 && disturbance.harmonic3_ratio <= 0.5)) {
        v.push_back("harmonic3_ratio must lie in [0, 0.5]");
    }
    if (!(disturbance.notch_rate >= 0.0)) {
        v.push_back("notch_rate must be >= 0");
    }
    if (!(disturbance.notch_amplitude >= 0.0)) {
        v.push_back("notch_amplitude must be >= 0");
    }
    auto windows = disturbance.data_loss;
    std::sort(windows.begin(), windows.end(),
              [](const LossWindow& a, const LossWindow& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (!(windows[i].duration > 0.0)) {
            v.push_back("data-loss window " + std::to_string(i) + " duration must be > 0");
        }
        if (windows[i].start < 0.0 || windows[i].start + windows[i].duration > t_end) {
            v.push_back("data-loss window " + std::to_string(i) + " must lie within the run length");
        }
        if (i > 0 && windows[i].start < windows[i - 1].start + windows[i - 1].duration) {
            v.push_back("data-loss windows overlap");
        }
    }
    return v;
}

GeneratedSignal generate(const FrequencyProfile& profile, const AmplitudeProfile& amplitude,
                         const DisturbanceConfig& disturbance, double dt, double t_end,
                         double theta0) {
    auto violations = validate_signal_config(profile, amplitude, disturbance, dt, t_end);
    if (!violations.empty()) {
        throw ConfigError(std::move(violations));
    }

    const auto count = static_cast<std::size_t>(std::llround(t_end / dt));
    GeneratedSignal out;
    out.samples.reserve(count);
    out.omega_true.reserve(count);
    out.theta_true.reserve(count);

    // Independent per-channel substreams derived from the one seed.
    SplitMix64 seeder(disturbance.seed);
    const double corner =
        disturbance.noise_corner > 0.0 ? disturbance.noise_corner : 1.0 / (10.0 * dt);
    BandLimitedNoise noise[3] = {
        {seeder.next(), disturbance.noise_std, corner, dt},
        {seeder.next(), disturbance.noise_std, corner, dt},
        {seeder.next(), disturbance.noise_std, corner, dt},
    };
    NotchStream notch[3] = {
        {seeder.next(), disturbance.notch_rate, disturbance.notch_amplitude},
        {seeder.next(), disturbance.notch_rate, disturbance.notch_amplitude},
        {seeder.next(), disturbance.notch_rate, disturbance.notch_amplitude},
    };

    auto windows = disturbance.data_loss;
    std::sort(windows.begin(), windows.end(),
              [](const LossWindow& a, const LossWindow& b) { return a.start < b.start; });
    std::size_t window_idx = 0;

    double theta = wrap_two_pi(theta0);
    double held[3] = {0.0, 0.0, 0.0};
    bool have_held = false;

    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double omega = profile.omega_at(t);
        const double z = amplitude.amplitude_at(t);

        double ch[3];
        for (int n = 0; n < 3; ++n) {
            const double phase = theta - static_cast<double>(n) * kTwoPi / 3.0;
            double value = z * std::cos(phase);
            if (disturbance.harmonic3_ratio > 0.0) {
                value += z * disturbance.harmonic3_ratio * std::cos(3.0 * phase);
            }
            if (disturbance.noise_std > 0.0) {
                value += noise[n].next();
            }
            value += notch[n].next(t);
            ch[n] = value;
        }

        while (window_idx < windows.size() &&
               t >= windows[window_idx].start + windows[window_idx].duration) {
            ++window_idx;
        }
        const bool in_loss = window_idx < windows.size() && t >= windows[window_idx].start;

        ThreePhaseSample s;
        s.t = t;
        if (in_loss && have_held) {
            s.za = held[0];
            s.zb = held[1];
            s.zc = held[2];
            s.valid = false;
        } else {
            s.za = ch[0];
            s.zb = ch[1];
            s.zc = ch[2];
            s.valid = !in_loss;  // a window covering t = 0 has nothing to hold
            if (s.valid) {
                held[0] = ch[0];
                held[1] = ch[1];
                held[2] = ch[2];
                have_held = true;
            }
        }

        out.samples.push_back(s);
        out.omega_true.push_back(omega);
        out.theta_true.push_back(theta);

        theta = wrap_two_pi(theta + omega * dt);
    }
    return out;
}

ThreePhaseSample normalize(const ThreePhaseSample& s, double floor) {
    const double n = std::sqrt(s.za * s.za + s.zb * s.zb + s.zc * s.zc);
    if (!(n >= floor)) {
        ThreePhaseSample out = s;
        out.valid = false;
        return out;
    }
    return {s.t, s.za / n, s.zb / n, s.zc / n, s.valid};
}

void write_signal_csv(const GeneratedSignal& signal, std::ostream& out) {
    out << "t,za,zb,zc,valid,omega_true,theta_true\n";
    for (std::size_t k = 0; k < signal.samples.size(); ++k) {
        const auto& s = signal.samples[k];
        out << fmt(s.t) << ',' << fmt(s.za) << ',' << fmt(s.zb) << ',' << fmt(s.zc) << ','
            << (s.valid ? '1' : '0') << ',' << fmt(signal.omega_true[k]) << ','
            << fmt(signal.theta_true[k]) << '\n';
    }
}

}  // namespace srfpll
