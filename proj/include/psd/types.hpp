#pragma once

#include <Eigen/Dense>
#include <vector>

#include "psd/errors.hpp"

namespace psd {

using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;

/// Dimensionless mass ratios mu_i = m_i / M, where M is the mean mass.
/// By construction sum(mu_i) == N.
class MassProfile {
  public:
    /// Builds the profile from raw masses (any positive unit).
    static MassProfile from_masses(const std::vector<double>& masses);

    /// N equal bodies, each mu_i = 1.
    static MassProfile equal(int n);

    const std::vector<double>& ratios() const { return mu_; }
    int count() const { return static_cast<int>(mu_.size()); }
    double operator[](int i) const { return mu_[static_cast<std::size_t>(i)]; }

  private:
    explicit MassProfile(std::vector<double> mu) : mu_(std::move(mu)) {}
    std::vector<double> mu_;
};

/// Homogeneous potential V(L, q) = beta * L^k * C(q).
/// Newtonian gravity: k = -1, beta = 1. softening replaces r_ij by
/// sqrt(r_ij^2 + softening^2 L^2) inside V, keeping C scale-free.
struct PotentialSpec {
    double beta = 1.0;
    int k = -1;
    double softening = 0.0;

    void validate() const {
        if (beta <= 0.0) throw ConfigError("potential.beta: must be > 0");
        if (softening < 0.0) throw ConfigError("potential.softening: must be >= 0");
    }
};

/// An N-body configuration in d = 2 or 3 Euclidean dimensions, stored in
/// the center-of-mass frame (mass-weighted centroid at the origin).
class Configuration {
  public:
    /// Centers the positions; rejects N < 3 and total collisions.
    Configuration(std::vector<Eigen::VectorXd> positions, MassProfile masses);

    int count() const { return static_cast<int>(pos_.size()); }
    int dim() const { return static_cast<int>(pos_.front().size()); }
    const MassProfile& masses() const { return masses_; }
    const Eigen::VectorXd& position(int i) const { return pos_[static_cast<std::size_t>(i)]; }
    const std::vector<Eigen::VectorXd>& positions() const { return pos_; }

    /// Total scale L, mass-weighted: L^2 = sum_i mu_i |r_i|^2.
    double scale() const;

    /// Unweighted variant L^2 = sum_i |r_i|^2, for diagnostics only; the
    /// kinematic metric and all charts use the mass-weighted convention.
    double scale_unweighted() const;

    double min_pair_distance() const;

  private:
    std::vector<Eigen::VectorXd> pos_;
    MassProfile masses_;
};

}  // namespace psd
