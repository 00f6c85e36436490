#include "psd/sphere_harmonics.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "psd/shape_space.hpp"

namespace psd {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Gauss-Legendre nodes (ascending x) and weights by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(static_cast<std::size_t>(n));
    w.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));  // ascending guess
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = xi;
            for (int l = 2; l <= n; ++l) {
                const double p2 = ((2 * l - 1) * xi * p1 - (l - 1) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (xi * p1 - p0) / (xi * xi - 1.0);
            const double dx = p1 / pp;
            xi -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        x[static_cast<std::size_t>(i)] = xi;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - xi * xi) * pp * pp);
    }
}

}  // namespace

struct SphereGrid::Fft {
    int n_theta, n_phi;
    double* real_buf = nullptr;
    fftw_complex* cplx_buf = nullptr;
    fftw_plan fwd{}, bwd{};

    Fft(int nt, int np) : n_theta(nt), n_phi(np) {
        std::lock_guard lock(fftw_planner_mutex());
        real_buf = fftw_alloc_real(static_cast<std::size_t>(nt) * np);
        cplx_buf = fftw_alloc_complex(static_cast<std::size_t>(nt) * (np / 2 + 1));
        const int n[] = {np};
        fwd = fftw_plan_many_dft_r2c(1, n, nt, real_buf, nullptr, 1, np, cplx_buf, nullptr, 1,
                                     np / 2 + 1, FFTW_ESTIMATE);
        bwd = fftw_plan_many_dft_c2r(1, n, nt, cplx_buf, nullptr, 1, np / 2 + 1, real_buf,
                                     nullptr, 1, np, FFTW_ESTIMATE);
    }
    ~Fft() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real_buf);
        fftw_free(cplx_buf);
    }
};

SphereGrid::SphereGrid(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
    if (n_theta < 2 || n_phi < 4 || n_phi % 2 != 0)
        throw ConfigError("quantum.grid: need n_theta >= 2 and even n_phi >= 4");
    lmax_ = std::min(n_theta - 1, n_phi / 2 - 1);
    gauss_legendre(n_theta, x_, w_gl_);
    theta_.resize(static_cast<std::size_t>(n_theta));
    sin_theta_.resize(static_cast<std::size_t>(n_theta));
    w_area_.resize(static_cast<std::size_t>(n_theta));
    for (int i = 0; i < n_theta; ++i) {
        theta_[static_cast<std::size_t>(i)] = std::acos(x_[static_cast<std::size_t>(i)]);
        sin_theta_[static_cast<std::size_t>(i)] =
            std::sqrt(1.0 - x_[static_cast<std::size_t>(i)] * x_[static_cast<std::size_t>(i)]);
        w_area_[static_cast<std::size_t>(i)] =
            radius * radius * w_gl_[static_cast<std::size_t>(i)] * (2.0 * M_PI / n_phi);
    }

    // Legendre tables per order m: rows l - m, cols latitude
    plm_.resize(static_cast<std::size_t>(lmax_) + 1);
    dplm_.resize(static_cast<std::size_t>(lmax_) + 1);
    std::vector<double> col((static_cast<std::size_t>(lmax_) + 1) * (lmax_ + 2) / 2);
    std::vector<double> dcol(col.size());
    for (int m = 0; m <= lmax_; ++m) {
        plm_[static_cast<std::size_t>(m)].resize(lmax_ - m + 1, n_theta);
        dplm_[static_cast<std::size_t>(m)].resize(lmax_ - m + 1, n_theta);
    }
    for (int i = 0; i < n_theta; ++i) {
        legendre_column(x_[static_cast<std::size_t>(i)], col, &dcol);
        std::size_t idx = 0;
        for (int m = 0; m <= lmax_; ++m)
            for (int l = m; l <= lmax_; ++l, ++idx) {
                plm_[static_cast<std::size_t>(m)](l - m, i) = col[idx];
                dplm_[static_cast<std::size_t>(m)](l - m, i) = dcol[idx];
            }
    }
    fft_ = std::make_unique<Fft>(n_theta, n_phi);
}

SphereGrid::~SphereGrid() = default;

/// Orthonormal P~_lm(x) (including the 1/sqrt(2pi) longitude factor, so
/// Y_lm = P~_lm e^{i m phi} has unit L2 norm on the unit sphere) and the
/// theta-derivative, packed m-major then l.
void SphereGrid::legendre_column(double x, std::vector<double>& p,
                                 std::vector<double>* dp_dtheta) const {
    const double sint = std::sqrt(std::max(1e-300, 1.0 - x * x));
    std::size_t idx = 0;
    double pmm = std::sqrt(1.0 / (4.0 * M_PI));
    std::vector<double> diag(static_cast<std::size_t>(lmax_) + 1);
    diag[0] = pmm;
    for (int m = 1; m <= lmax_; ++m) {
        pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sint;
        diag[static_cast<std::size_t>(m)] = pmm;
    }
    for (int m = 0; m <= lmax_; ++m) {
        double pl2 = 0.0;                               // P_{l-2,m}
        double pl1 = diag[static_cast<std::size_t>(m)]; // P_{l-1,m}, seeded at l = m
        for (int l = m; l <= lmax_; ++l, ++idx) {
            double pl;
            if (l == m) {
                pl = pl1;
            } else if (l == m + 1) {
                pl = x * std::sqrt(2.0 * m + 3.0) * pl1;
            } else {
                const double a = std::sqrt((4.0 * l * l - 1.0) / (l * l - m * m));
                const double b =
                    std::sqrt(((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
                pl = a * (x * pl1 - b * pl2);
            }
            p[idx] = pl;
            if (dp_dtheta) {
                const double c =
                    l == m ? 0.0 : std::sqrt((l * l - m * m) * (2.0 * l + 1.0) / (2.0 * l - 1.0));
                (*dp_dtheta)[idx] = (l * x * pl - c * pl1) / sint;
            }
            if (l > m) pl2 = pl1, pl1 = pl;
            else pl2 = 0.0;
        }
    }
}

int SphereGrid::coeff_index(int l, int m) const {
    // m-major packing: block m starts at sum_{m'<m} (lmax - m' + 1)
    return m * (lmax_ + 1) - m * (m - 1) / 2 + (l - m);
}

double SphereGrid::integral(const Eigen::VectorXd& f) const {
    double s = 0.0;
    for (int i = 0; i < n_theta_; ++i)
        s += w_area_[static_cast<std::size_t>(i)] * f.segment(i * n_phi_, n_phi_).sum();
    return s;
}

SphereGrid::Coeffs SphereGrid::analyze(const Eigen::VectorXd& f) const {
    if (f.size() != nodes()) throw ResolutionExceeded("analyze: field size mismatch");
    std::copy(f.data(), f.data() + f.size(), fft_->real_buf);
    fftw_execute(fft_->fwd);

    Coeffs c = Coeffs::Zero(coeff_count());
    const int nc = n_phi_ / 2 + 1;
    for (int m = 0; m <= lmax_; ++m) {
        const auto& P = plm_[static_cast<std::size_t>(m)];
        for (int i = 0; i < n_theta_; ++i) {
            const auto* fm = fft_->cplx_buf + i * nc + m;
            const std::complex<double> val{(*fm)[0], (*fm)[1]};
            const std::complex<double> wv =
                val * (w_gl_[static_cast<std::size_t>(i)] * 2.0 * M_PI / n_phi_);
            for (int l = m; l <= lmax_; ++l)
                c[coeff_index(l, m)] += P(l - m, i) * wv;
        }
    }
    return c;
}

namespace {
void check_band(int have, int want) {
    if (want > have)
        throw ResolutionExceeded("band limit " + std::to_string(want) +
                                 " exceeds grid Nyquist " + std::to_string(have));
}
}  // namespace

Eigen::VectorXd SphereGrid::synthesize(const Coeffs& c) const {
    if (c.size() != coeff_count()) throw ResolutionExceeded("synthesize: coefficient size mismatch");
    const int nc = n_phi_ / 2 + 1;
    std::fill(reinterpret_cast<double*>(fft_->cplx_buf),
              reinterpret_cast<double*>(fft_->cplx_buf) + 2 * n_theta_ * nc, 0.0);
    for (int m = 0; m <= lmax_; ++m) {
        const auto& P = plm_[static_cast<std::size_t>(m)];
        for (int i = 0; i < n_theta_; ++i) {
            std::complex<double> g{0.0, 0.0};
            for (int l = m; l <= lmax_; ++l) g += c[coeff_index(l, m)] * P(l - m, i);
            auto* out = fft_->cplx_buf + i * nc + m;
            (*out)[0] = g.real();
            (*out)[1] = g.imag();
        }
    }
    fftw_execute(fft_->bwd);
    return Eigen::Map<Eigen::VectorXd>(fft_->real_buf, nodes());
}

SphereGrid::Coeffs SphereGrid::laplacian(const Coeffs& c) const {
    Coeffs out = c;
    const double inv_r2 = 1.0 / (radius * radius);
    for (int m = 0; m <= lmax_; ++m)
        for (int l = m; l <= lmax_; ++l)
            out[coeff_index(l, m)] *= -static_cast<double>(l) * (l + 1.0) * inv_r2;
    return out;
}

Eigen::VectorXd SphereGrid::synthesize_dtheta(const Coeffs& c) const {
    const int nc = n_phi_ / 2 + 1;
    std::fill(reinterpret_cast<double*>(fft_->cplx_buf),
              reinterpret_cast<double*>(fft_->cplx_buf) + 2 * n_theta_ * nc, 0.0);
    for (int m = 0; m <= lmax_; ++m) {
        const auto& dP = dplm_[static_cast<std::size_t>(m)];
        for (int i = 0; i < n_theta_; ++i) {
            std::complex<double> g{0.0, 0.0};
            for (int l = m; l <= lmax_; ++l) g += c[coeff_index(l, m)] * dP(l - m, i);
            auto* out = fft_->cplx_buf + i * nc + m;
            (*out)[0] = g.real();
            (*out)[1] = g.imag();
        }
    }
    fftw_execute(fft_->bwd);
    return Eigen::Map<Eigen::VectorXd>(fft_->real_buf, nodes());
}

Eigen::VectorXd SphereGrid::synthesize_dphi_over_sin(const Coeffs& c) const {
    const int nc = n_phi_ / 2 + 1;
    std::fill(reinterpret_cast<double*>(fft_->cplx_buf),
              reinterpret_cast<double*>(fft_->cplx_buf) + 2 * n_theta_ * nc, 0.0);
    for (int m = 1; m <= lmax_; ++m) {
        const auto& P = plm_[static_cast<std::size_t>(m)];
        for (int i = 0; i < n_theta_; ++i) {
            std::complex<double> g{0.0, 0.0};
            for (int l = m; l <= lmax_; ++l) g += c[coeff_index(l, m)] * P(l - m, i);
            g *= std::complex<double>(0.0, static_cast<double>(m));
            auto* out = fft_->cplx_buf + i * nc + m;
            (*out)[0] = g.real();
            (*out)[1] = g.imag();
        }
    }
    fftw_execute(fft_->bwd);
    Eigen::VectorXd out = Eigen::Map<Eigen::VectorXd>(fft_->real_buf, nodes());
    for (int i = 0; i < n_theta_; ++i)
        out.segment(i * n_phi_, n_phi_) /= sin_theta_[static_cast<std::size_t>(i)];
    return out;
}

Vec3 SphereGrid::sphere_node(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

double SphereGrid::eval(const Coeffs& c, const Vec3& n) const {
    const double x = std::clamp(n[2], -1.0, 1.0);
    const double phi = std::atan2(n[1], n[0]);
    std::vector<double> p(static_cast<std::size_t>(coeff_count()));
    legendre_column(x, p, nullptr);
    double val = 0.0;
    std::size_t idx = 0;
    for (int m = 0; m <= lmax_; ++m) {
        std::complex<double> g{0.0, 0.0};
        for (int l = m; l <= lmax_; ++l, ++idx) g += c[coeff_index(l, m)] * p[idx];
        if (m == 0)
            val += g.real();
        else
            val += 2.0 * (g * std::exp(std::complex<double>(0.0, m * phi))).real();
    }
    return val;
}

Vec3 SphereGrid::eval_gradient(const Coeffs& c, const Vec3& n) const {
    const double x = std::clamp(n[2], -1.0, 1.0);
    const double sint = std::sqrt(std::max(1e-24, 1.0 - x * x));
    const double phi = std::atan2(n[1], n[0]);
    std::vector<double> p(static_cast<std::size_t>(coeff_count()));
    std::vector<double> dp(p.size());
    legendre_column(x, p, &dp);
    double f_theta = 0.0, f_phi = 0.0;
    std::size_t idx = 0;
    for (int m = 0; m <= lmax_; ++m) {
        std::complex<double> g{0.0, 0.0}, dg{0.0, 0.0};
        for (int l = m; l <= lmax_; ++l, ++idx) {
            g += c[coeff_index(l, m)] * p[idx];
            dg += c[coeff_index(l, m)] * dp[idx];
        }
        const auto e = std::exp(std::complex<double>(0.0, m * phi));
        if (m == 0) {
            f_theta += dg.real();
        } else {
            f_theta += 2.0 * (dg * e).real();
            f_phi += 2.0 * (std::complex<double>(0.0, m) * g * e).real();
        }
    }
    const auto [etheta, ephi] = tangent_frame(n);
    return etheta * f_theta + ephi * (f_phi / sint);
}

Eigen::VectorXd SphereGrid::harmonic(int l, int m) const {
    check_band(lmax_, l);
    Coeffs c = Coeffs::Zero(coeff_count());
    if (m == 0) {
        c[coeff_index(l, 0)] = 1.0;
    } else if (m > 0) {
        c[coeff_index(l, m)] = 1.0 / std::sqrt(2.0);
    } else {
        c[coeff_index(l, -m)] = std::complex<double>(0.0, -1.0 / std::sqrt(2.0));
    }
    return synthesize(c);
}

}  // namespace psd
