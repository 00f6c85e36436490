#include "psd/curve_distance.hpp"

#include <cmath>

namespace psd {

double sphere_distance(const Vec3& a, const Vec3& b) {
    return 0.5 * std::atan2(a.cross(b).norm(), a.dot(b));
}

namespace {

/// Great-circle distance (unit-sphere angle) from point a to the minor arc
/// b1 -> b2.
double point_to_arc_angle(const Vec3& a, const Vec3& b1, const Vec3& b2) {
    const Vec3 m = b1.cross(b2);
    const double mn = m.norm();
    const double d1 = std::atan2(a.cross(b1).norm(), a.dot(b1));
    const double d2 = std::atan2(a.cross(b2).norm(), a.dot(b2));
    if (mn < 1e-15) return std::min(d1, d2);
    const Vec3 mh = m / mn;
    // foot of a on the great circle through b1, b2
    Vec3 c = a - a.dot(mh) * mh;
    const double cn = c.norm();
    if (cn < 1e-15) return std::min(d1, d2);
    c /= cn;
    const bool inside = (b1.cross(c).dot(mh) >= 0.0) && (c.cross(b2).dot(mh) >= 0.0);
    if (!inside) return std::min(d1, d2);
    return std::atan2(a.cross(c).norm(), a.dot(c));
}

}  // namespace

double one_sided_hausdorff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.empty() || b.empty())
        throw DegenerateInput("hausdorff: empty curve");
    if (b.size() == 1) {
        double worst = 0.0;
        for (const auto& p : a) worst = std::max(worst, sphere_distance(p, b.front()));
        return worst;
    }

    Eigen::Matrix3Xd B(3, static_cast<long>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i) B.col(static_cast<long>(i)) = b[i];
    double max_seg = 0.0;
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
        max_seg = std::max(max_seg, std::atan2(b[i].cross(b[i + 1]).norm(), b[i].dot(b[i + 1])));

    double worst = 0.0;
    Eigen::VectorXd dots(static_cast<long>(b.size()));
    for (const auto& p : a) {
        dots.noalias() = B.transpose() * p;
        long ibest = 0;
        const double best_dot = dots.maxCoeff(&ibest);
        double best = std::atan2(std::sqrt(std::max(0.0, 1.0 - best_dot * best_dot)), best_dot);
        // a segment can only beat the best point if one endpoint is within
        // best + its own length
        const double cutoff = std::cos(std::min(M_PI, best + max_seg));
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
            if (dots[static_cast<long>(i)] < cutoff && dots[static_cast<long>(i + 1)] < cutoff)
                continue;
            best = std::min(best, point_to_arc_angle(p, b[i], b[i + 1]));
        }
        worst = std::max(worst, best);
    }
    return 0.5 * worst;  // kinematic radius 1/2
}

}  // namespace psd
