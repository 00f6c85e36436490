#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "psd/types.hpp"

namespace psd {

/// Gauss-Legendre latitude x uniform longitude grid on the shape sphere
/// (radius 1/2), with spherical-harmonic analysis/synthesis, spectral
/// derivatives and off-grid evaluation. Fields are real, stored flat with
/// index i * n_phi + j (latitude-major); latitudes exclude the poles.
///
/// Band limit: analysis is exact for fields band-limited to
/// lmax = min(n_theta - 1, n_phi/2 - 1).
class SphereGrid {
  public:
    SphereGrid(int n_theta, int n_phi);
    ~SphereGrid();
    SphereGrid(const SphereGrid&) = delete;
    SphereGrid& operator=(const SphereGrid&) = delete;

    int n_theta() const { return n_theta_; }
    int n_phi() const { return n_phi_; }
    int lmax() const { return lmax_; }
    int nodes() const { return n_theta_ * n_phi_; }
    static constexpr double radius = 0.5;

    double theta(int i) const { return theta_[static_cast<std::size_t>(i)]; }
    double phi(int j) const { return 2.0 * M_PI * j / n_phi_; }
    Vec3 node(int i, int j) const { return sphere_node(theta(i), phi(j)); }
    static Vec3 sphere_node(double theta, double phi);

    /// Surface-area quadrature weight of node (i, j); weights sum to
    /// 4 pi radius^2 = pi.
    double area_weight(int i) const { return w_area_[static_cast<std::size_t>(i)]; }

    /// integral of f over the sphere (with the radius-1/2 area element).
    double integral(const Eigen::VectorXd& f) const;

    /// Number of (l, m >= 0) coefficients for a real field.
    int coeff_count() const { return (lmax_ + 1) * (lmax_ + 2) / 2; }
    int coeff_index(int l, int m) const;  // m >= 0

    using Coeffs = Eigen::VectorXcd;

    /// Grid -> spherical-harmonic coefficients (orthonormal basis, m >= 0
    /// half for real fields).
    Coeffs analyze(const Eigen::VectorXd& f) const;

    /// Coefficients -> grid. Throws ResolutionExceeded if the coefficient
    /// band exceeds this grid's Nyquist limit.
    Eigen::VectorXd synthesize(const Coeffs& c) const;

    /// Laplace-Beltrami multiplier: c_lm -> -l(l+1)/radius^2 c_lm.
    Coeffs laplacian(const Coeffs& c) const;

    /// Colatitude/longitude derivative grids of a coefficient field:
    /// df/dtheta and (1/sin theta) df/dphi.
    Eigen::VectorXd synthesize_dtheta(const Coeffs& c) const;
    Eigen::VectorXd synthesize_dphi_over_sin(const Coeffs& c) const;

    /// Off-grid evaluation of the harmonic series and of the
    /// Euclidean-tangential surface gradient on the unit-sphere chart
    /// (the kinematic-metric gradient is 4x the latter).
    double eval(const Coeffs& c, const Vec3& n) const;
    Vec3 eval_gradient(const Coeffs& c, const Vec3& n) const;

    /// Single orthonormal real harmonic sampled on the grid (test helper):
    /// m = 0 gives Y_l0, m > 0 the cosine combination, m < 0 the sine one.
    Eigen::VectorXd harmonic(int l, int m) const;

  private:
    struct Fft;
    int n_theta_, n_phi_, lmax_;
    std::vector<double> x_, theta_, sin_theta_, w_gl_, w_area_;
    // Legendre tables: for each m, values P_lm(x_i) and dP_lm/dtheta(x_i),
    // packed (l - m) major then latitude.
    std::vector<Eigen::MatrixXd> plm_, dplm_;
    std::unique_ptr<Fft> fft_;

    void legendre_column(double x, std::vector<double>& p, std::vector<double>* dp_dtheta) const;
};

}  // namespace psd
