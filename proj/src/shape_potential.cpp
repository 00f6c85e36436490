#include "psd/shape_potential.hpp"

#include <cmath>

namespace psd {

namespace {

struct PairTerm {
    int i, j;
};
constexpr std::array<PairTerm, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

void check_collision(const std::array<double, 3>& r2, const PotentialSpec& spec) {
    if (spec.softening > 0.0) return;
    for (double v : r2)
        if (v < collision_tol * collision_tol)
            throw CollisionSingularity("unsoftened shape potential at a two-body collision");
}

}  // namespace

double shape_potential(const ShapePoint& q, const MassProfile& mu, const PotentialSpec& spec) {
    if (q.chart() == Chart::General)
        return shape_potential_cartesian(
            Configuration(q.representative(), mu), spec);
    const Vec3& n = q.sphere_coords();
    const auto r2 = pair_separations(mu).value(n);
    check_collision(r2, spec);
    const double s2 = spec.softening * spec.softening;  // L = 1 on the chart
    double c = 0.0;
    for (std::size_t t = 0; t < kPairs.size(); ++t)
        c -= mu[kPairs[t].i] * mu[kPairs[t].j] * std::pow(r2[t] + s2, 0.5 * spec.k);
    return c;
}

Vec3 shape_potential_gradient(const ShapePoint& q, const MassProfile& mu,
                              const PotentialSpec& spec) {
    const Vec3& n = q.sphere_coords();
    const PairSeparations ps = pair_separations(mu);
    const auto r2 = ps.value(n);
    check_collision(r2, spec);
    const double s2 = spec.softening * spec.softening;
    Vec3 g = Vec3::Zero();
    for (std::size_t t = 0; t < kPairs.size(); ++t)
        g -= mu[kPairs[t].i] * mu[kPairs[t].j] * (0.5 * spec.k) *
             std::pow(r2[t] + s2, 0.5 * spec.k - 1.0) * ps.b[t];
    return g - n * g.dot(n);  // tangential part; C lives on the quotient
}

double shape_potential_cartesian(const Configuration& config, const PotentialSpec& spec) {
    const double L = config.scale();
    const double s2L2 = spec.softening * spec.softening * L * L;
    const int nb = config.count();
    if (spec.softening == 0.0 && config.min_pair_distance() < collision_tol * L)
        throw CollisionSingularity("unsoftened shape potential at a two-body collision");
    double sum = 0.0;
    for (int i = 0; i < nb; ++i)
        for (int j = i + 1; j < nb; ++j) {
            const double r2 = (config.position(i) - config.position(j)).squaredNorm() + s2L2;
            sum -= config.masses()[i] * config.masses()[j] * std::pow(r2, 0.5 * spec.k);
        }
    return sum / std::pow(L, spec.k);
}

std::vector<Eigen::VectorXd> shape_potential_cartesian_gradient(const Configuration& config,
                                                                const PotentialSpec& spec) {
    const double L = config.scale();
    const double s2 = spec.softening * spec.softening;
    const int nb = config.count();
    const int d = config.dim();
    const auto& mu = config.masses();
    if (spec.softening == 0.0 && config.min_pair_distance() < collision_tol * L)
        throw CollisionSingularity("unsoftened shape potential at a two-body collision");

    // C = S(r) L^{-k} with S = -sum mu_i mu_j (r_ij^2 + soft^2 L^2)^{k/2};
    // both S's softening term and the L^{-k} factor depend on every body.
    double S = 0.0;
    std::vector<Eigen::VectorXd> grad(static_cast<std::size_t>(nb), Eigen::VectorXd::Zero(d));
    for (int i = 0; i < nb; ++i)
        for (int j = i + 1; j < nb; ++j) {
            const Eigen::VectorXd dij = config.position(i) - config.position(j);
            const double r2 = dij.squaredNorm() + s2 * L * L;
            const double f = std::pow(r2, 0.5 * spec.k);
            S -= mu[i] * mu[j] * f;
            const double df = mu[i] * mu[j] * (0.5 * spec.k) * f / r2;
            grad[static_cast<std::size_t>(i)] -= df * 2.0 * dij;
            grad[static_cast<std::size_t>(j)] += df * 2.0 * dij;
            if (s2 > 0.0)
                for (int b = 0; b < nb; ++b)
                    grad[static_cast<std::size_t>(b)] -=
                        df * 2.0 * s2 * mu[b] * config.position(b);
        }
    const double Lk = std::pow(L, spec.k);
    for (int b = 0; b < nb; ++b)
        grad[static_cast<std::size_t>(b)] =
            grad[static_cast<std::size_t>(b)] / Lk -
            S / Lk * spec.k * mu[b] * config.position(b) / (L * L);
    return grad;
}

double potential_energy(const Configuration& config, const PotentialSpec& spec) {
    return spec.beta * std::pow(config.scale(), spec.k) *
           shape_potential_cartesian(config, spec);
}

}  // namespace psd
