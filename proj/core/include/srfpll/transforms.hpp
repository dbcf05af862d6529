#pragma once

#include "srfpll/signals.hpp"

namespace srfpll {

// Rotating-reference-frame pair evaluated at frame angle theta_star. For a
// clean balanced input of amplitude Z: zd = Z*cos(theta_star - theta),
// zq = Z*sin(theta_star - theta), so zd^2 + zq^2 = Z^2.
struct DqFrame {
    double zd = 0.0;
    double zq = 0.0;
    double theta_star = 0.0;
};

// Amplitude-invariant (2/3-scaled) abc->dq transform. The q row carries the
// sign that makes the matrix form reduce exactly to the closed form above for
// balanced cos-phase inputs. Total function, no failure modes.
DqFrame abc_to_dq(const ThreePhaseSample& s, double theta_star);

}  // namespace srfpll
