#include "srfpll/transforms.hpp"

#include <cmath>
#include <numbers>

namespace srfpll {

namespace {
constexpr double kThird = 2.0 * std::numbers::pi / 3.0;
}

DqFrame abc_to_dq(const ThreePhaseSample& s, double theta_star) {
    const double c0 = std::cos(theta_star);
    const double c1 = std::cos(theta_star - kThird);
    const double c2 = std::cos(theta_star - 2.0 * kThird);
    const double s0 = std::sin(theta_star);
    const double s1 = std::sin(theta_star - kThird);
    const double s2 = std::sin(theta_star - 2.0 * kThird);

    DqFrame out;
    out.zd = (2.0 / 3.0) * (c0 * s.za + c1 * s.zb + c2 * s.zc);
    out.zq = (2.0 / 3.0) * (s0 * s.za + s1 * s.zb + s2 * s.zc);
    out.theta_star = theta_star;
    return out;
}

}  // namespace srfpll
