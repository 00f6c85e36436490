#pragma once

#include <random>

#include "psd/newtonian.hpp"
#include "psd/shape_potential.hpp"

namespace psd::test {

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 v(gauss(rng), gauss(rng), gauss(rng));
    return v.normalized();
}

inline std::vector<Eigen::VectorXd> random_planar(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd r(2);
        r << unif(rng), unif(rng);
        out.push_back(std::move(r));
    }
    return out;
}

/// Independent pushforward oracle for the kinematic metric on the 3-body
/// sphere chart: finite-difference the representative map in (theta, phi),
/// project out the similarity-gauge directions with the mass-weighted
/// inner product, and return the Gram matrix.
inline Eigen::Matrix2d pushforward_metric(double theta, double phi, const MassProfile& mu,
                                          double h = 1e-6) {
    auto rep = [&](double th, double ph) {
        const ShapePoint q = ShapePoint::sphere(sphere_from_angles(th, ph));
        return representative_configuration(q, mu).positions();
    };
    auto minus = [](std::vector<Eigen::VectorXd> a, const std::vector<Eigen::VectorXd>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
        return a;
    };
    auto scale = [](std::vector<Eigen::VectorXd> a, double f) {
        for (auto& v : a) v *= f;
        return a;
    };
    const auto v_th = scale(minus(rep(theta + h, phi), rep(theta - h, phi)), 0.5 / h);
    const auto v_ph = scale(minus(rep(theta, phi + h), rep(theta, phi - h)), 0.5 / h);
    const auto base = rep(theta, phi);

    auto ip = [&](const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += mu[static_cast<int>(i)] * a[i].dot(b[i]);
        return s;
    };
    // similarity-gauge generators at the representative
    std::vector<std::vector<Eigen::VectorXd>> gens;
    for (int axis = 0; axis < 2; ++axis) {
        std::vector<Eigen::VectorXd> g;
        for (int i = 0; i < 3; ++i) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
            v[axis] = 1.0;
            g.push_back(v);
        }
        gens.push_back(std::move(g));
    }
    {
        std::vector<Eigen::VectorXd> rot, dil;
        for (int i = 0; i < 3; ++i) {
            Eigen::VectorXd r(2), d(2);
            r << -base[static_cast<std::size_t>(i)][1], base[static_cast<std::size_t>(i)][0];
            d << base[static_cast<std::size_t>(i)][0], base[static_cast<std::size_t>(i)][1];
            rot.push_back(r);
            dil.push_back(d);
        }
        gens.push_back(std::move(rot));
        gens.push_back(std::move(dil));
    }
    // orthonormalize the gauge space, then project the chart velocities
    std::vector<std::vector<Eigen::VectorXd>> ortho;
    for (auto g : gens) {
        for (const auto& o : ortho) {
            const double c = ip(g, o);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= c * o[i];
        }
        const double n = std::sqrt(ip(g, g));
        if (n > 1e-12) {
            for (auto& v : g) v /= n;
            ortho.push_back(std::move(g));
        }
    }
    auto project = [&](std::vector<Eigen::VectorXd> v) {
        for (const auto& o : ortho) {
            const double c = ip(v, o);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * o[i];
        }
        return v;
    };
    const auto h_th = project(v_th);
    const auto h_ph = project(v_ph);
    Eigen::Matrix2d g;
    g << ip(h_th, h_th), ip(h_th, h_ph), ip(h_ph, h_th), ip(h_ph, h_ph);
    return g;
}

/// Deterministic planar 3-body E = 0, P = 0, J = 0 fixture from a seed.
inline ZeroEnergyData seeded_zero_energy(uint64_t seed, const MassProfile& mu,
                                         const PotentialSpec& spec, bool contracting = true) {
    std::mt19937_64 rng(seed);
    for (int attempt = 0;; ++attempt) {
        if (attempt > 64) throw std::runtime_error("no usable seed configuration");
        auto pos = random_planar(rng, mu.count());
        auto vel = random_planar(rng, mu.count());
        try {
            Configuration config(pos, mu);
            if (config.min_pair_distance() < 0.2 * config.scale()) continue;
            return prepare_zero_energy(config, vel, spec, 0.0, contracting);
        } catch (const DegenerateInput&) {
            continue;
        }
    }
}

}  // namespace psd::test
