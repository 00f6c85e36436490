#include "psd/born.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <cmath>
#include <mutex>
#include <random>

#include "psd/ode.hpp"

namespace psd {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

/// Periodic spectral differentiation on the circle.
class CircleSpectral {
  public:
    explicit CircleSpectral(int n) : n_(n) {
        std::lock_guard lock(planner_mutex());
        real_ = fftw_alloc_real(static_cast<std::size_t>(n));
        cplx_ = fftw_alloc_complex(static_cast<std::size_t>(n) / 2 + 1);
        fwd_ = fftw_plan_dft_r2c_1d(n, real_, cplx_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(n, cplx_, real_, FFTW_ESTIMATE);
    }
    ~CircleSpectral() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(cplx_);
    }
    CircleSpectral(const CircleSpectral&) = delete;
    CircleSpectral& operator=(const CircleSpectral&) = delete;

    /// order 1 or 2 derivative of a periodic field
    Eigen::VectorXd derivative(const Eigen::VectorXd& f, int order) const {
        std::copy(f.data(), f.data() + n_, real_);
        fftw_execute(fwd_);
        for (int k = 0; k <= n_ / 2; ++k) {
            std::complex<double> c{cplx_[k][0], cplx_[k][1]};
            if (order == 1)
                c *= std::complex<double>(0.0, k);
            else
                c *= -static_cast<double>(k) * k;
            // drop the unpaired Nyquist mode for odd derivatives
            if (order == 1 && k == n_ / 2) c = 0.0;
            cplx_[k][0] = c.real() / n_;
            cplx_[k][1] = c.imag() / n_;
        }
        fftw_execute(bwd_);
        return Eigen::Map<Eigen::VectorXd>(real_, n_);
    }

  private:
    int n_;
    double* real_;
    fftw_complex* cplx_;
    fftw_plan fwd_{}, bwd_{};
};

struct FieldSnapshot {
    double t;
    Eigen::VectorXd vtp;   // dV_T/dx on the grid
    Eigen::VectorXd dens;  // R^2 on the grid
};

struct FieldRun {
    std::vector<FieldSnapshot> snaps;
    Eigen::VectorXd dens0;
    Eigen::VectorXd dens_end;
    Eigen::VectorXd sprime0;  // dS/dx at t = 0
};

Eigen::VectorXd classical_part(const BornConfig& cfg) {
    Eigen::VectorXd c(cfg.grid_n);
    for (int j = 0; j < cfg.grid_n; ++j)
        c[j] = cfg.potential_cos * (std::cos(2.0 * M_PI * j / cfg.grid_n) - 1.0);
    return c;
}

/// Madelung evolution of the effective wave function in subsystem time:
///   dR/dt = -(R' S' + R S''/2),  dsigma/dt = -(S'^2/2 + V_T),
/// with S = winding x + sigma and V_T = C + k (-R''/2R). The members'
/// arc-length dynamics shares this field exactly because kappa only
/// reparametrizes s against t.
FieldRun evolve_field(const BornConfig& cfg) {
    const int n = cfg.grid_n;
    const double m = cfg.winding;
    CircleSpectral spec(n);
    const Eigen::VectorXd cgrid = classical_part(cfg);

    Eigen::VectorXd y(2 * n);
    for (int j = 0; j < n; ++j) {
        const double x = 2.0 * M_PI * j / n;
        y[j] = std::sqrt((1.0 + cfg.amp_mod * std::cos(x - cfg.x0)) / (2.0 * M_PI));
        y[n + j] = cfg.phase_mod * std::sin(x);
    }

    Eigen::VectorXd vtp_buf(n);
    auto vt_prime = [&](const Eigen::VectorXd& R) {
        const Eigen::VectorXd rpp = spec.derivative(R, 2);
        Eigen::VectorXd vt = cgrid;
        for (int j = 0; j < n; ++j)
            vt[j] += cfg.k_coupling * (-rpp[j] / (2.0 * std::max(R[j], 1e-12)));
        return spec.derivative(vt, 1);
    };

    auto rhs = [&](double, const Eigen::VectorXd& yy, Eigen::VectorXd& dy) {
        const Eigen::VectorXd R = yy.head(n);
        const Eigen::VectorXd sigma = yy.tail(n);
        const Eigen::VectorXd rp = spec.derivative(R, 1);
        const Eigen::VectorXd rpp = spec.derivative(R, 2);
        const Eigen::VectorXd sp0 = spec.derivative(sigma, 1);
        const Eigen::VectorXd spp = spec.derivative(sigma, 2);
        for (int j = 0; j < n; ++j) {
            const double sp = m + sp0[j];
            const double vt =
                cgrid[j] + cfg.k_coupling * (-rpp[j] / (2.0 * std::max(R[j], 1e-12)));
            dy[j] = -(rp[j] * sp + 0.5 * R[j] * spp[j]);
            dy[n + j] = -(0.5 * sp * sp + vt);
        }
    };

    FieldRun run;
    run.dens0 = y.head(n).cwiseProduct(y.head(n));
    run.sprime0 = spec.derivative(y.tail(n), 1).array() + m;
    run.snaps.push_back({0.0, vt_prime(y.head(n)), run.dens0});
    auto observer = [&](double, double t_now, Eigen::VectorXd& ynow,
                        const DenseStep&) -> StepControl {
        run.snaps.push_back(
            {t_now, vt_prime(ynow.head(n)), ynow.head(n).cwiseProduct(ynow.head(n))});
        return StepControl::cont();
    };
    OdeControls ode;
    ode.rel_tol = 1e-9;
    ode.abs_tol = 1e-11;
    ode.max_step = cfg.t_end / 64.0;  // keep snapshots dense for interpolation
    rk45_integrate(rhs, y, 0.0, cfg.t_end, ode, observer);
    run.dens_end = y.head(n).cwiseProduct(y.head(n));
    return run;
}

double catmull_rom_periodic(const Eigen::VectorXd& f, double x) {
    const int n = static_cast<int>(f.size());
    const double u = x / (2.0 * M_PI) * n;
    int i = static_cast<int>(std::floor(u));
    const double t = u - i;
    auto at = [&](int k) { return f[((k % n) + n) % n]; };
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}

/// V_T'(x, t): cubic in x on the grid, linear in t between snapshots.
class FieldInterp {
  public:
    explicit FieldInterp(const std::vector<FieldSnapshot>& snaps) : snaps_(snaps) {}

    double vt_prime(double x, double t) const {
        while (hi_ + 1 < snaps_.size() && snaps_[hi_].t < t) ++hi_;
        while (hi_ > 1 && snaps_[hi_ - 1].t > t) --hi_;
        const auto& a = snaps_[hi_ - 1];
        const auto& b = snaps_[hi_];
        const double w = b.t > a.t ? std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0) : 0.0;
        return (1.0 - w) * catmull_rom_periodic(a.vtp, x) + w * catmull_rom_periodic(b.vtp, x);
    }

    void rewind() const { hi_ = 1; }

  private:
    const std::vector<FieldSnapshot>& snaps_;
    mutable std::size_t hi_ = 1;
};

std::vector<double> bin_density(const Eigen::VectorXd& dens, int bins) {
    // bin-averaged probabilities of a grid density (trapezoid inside bins)
    const int n = static_cast<int>(dens.size());
    std::vector<double> q(static_cast<std::size_t>(bins), 0.0);
    const int oversample = 16;
    double total = 0.0;
    for (int b = 0; b < bins; ++b) {
        for (int k = 0; k < oversample; ++k) {
            const double x = 2.0 * M_PI * (b + (k + 0.5) / oversample) / bins;
            q[static_cast<std::size_t>(b)] += catmull_rom_periodic(dens, x);
        }
        total += q[static_cast<std::size_t>(b)];
    }
    (void)n;
    for (double& v : q) v /= total;
    return q;
}

}  // namespace

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    double tv = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
    return 0.5 * tv;
}

std::vector<CircleFieldState> evolve_circle_field(const BornConfig& cfg, int snapshots) {
    // re-run the field integration, decimating to the requested count
    FieldRun run = evolve_field(cfg);
    std::vector<CircleFieldState> out;
    const std::size_t stride = std::max<std::size_t>(1, run.snaps.size() / static_cast<std::size_t>(std::max(1, snapshots)));
    for (std::size_t i = 0; i < run.snaps.size(); i += stride) {
        CircleFieldState st;
        st.t = run.snaps[i].t;
        st.density.assign(run.snaps[i].dens.data(),
                          run.snaps[i].dens.data() + run.snaps[i].dens.size());
        out.push_back(std::move(st));
    }
    if (out.back().t != run.snaps.back().t) {
        CircleFieldState st;
        st.t = run.snaps.back().t;
        st.density.assign(run.snaps.back().dens.data(),
                          run.snaps.back().dens.data() + run.snaps.back().dens.size());
        out.push_back(std::move(st));
    }
    return out;
}

BornReport born_test(const BornConfig& cfg) {
    if (!cfg.tilde_k_zero)
        throw RegimeViolation(
            "born test: the decoupled-subsystem regime requires tilde-K = 0");
    if (cfg.ensemble < 1 || cfg.bins < 2) throw ConfigError("born: bad ensemble/bins");

    FieldRun run = evolve_field(cfg);
    const int n = cfg.grid_n;

    // inverse-CDF sampling from |psi0|^2 (or uniform for the negative control)
    std::vector<double> cdf(static_cast<std::size_t>(n) + 1, 0.0);
    const double dx = 2.0 * M_PI / n;
    for (int j = 0; j < n; ++j) {
        const double next = run.dens0[(j + 1) % n];
        cdf[static_cast<std::size_t>(j) + 1] =
            cdf[static_cast<std::size_t>(j)] + 0.5 * (run.dens0[j] + next) * dx;
    }
    const double cdf_total = cdf.back();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> members(static_cast<std::size_t>(cfg.ensemble));
    for (double& xm : members) {
        if (cfg.negative_control) {
            xm = 2.0 * M_PI * unif(rng);
        } else {
            const double target = unif(rng) * cdf_total;
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
            const std::size_t j = static_cast<std::size_t>(
                std::max<std::ptrdiff_t>(1, it - cdf.begin()) - 1);
            const double seg = cdf[j + 1] - cdf[j];
            const double frac = seg > 0.0 ? (target - cdf[j]) / seg : 0.5;
            xm = dx * (static_cast<double>(j) + frac);
        }
    }

    BornReport rep;
    rep.bins = cfg.bins;
    rep.ensemble = cfg.ensemble;

    auto histogram = [&](const std::vector<double>& xs) {
        std::vector<double> h(static_cast<std::size_t>(cfg.bins), 0.0);
        for (double x : xs) {
            double xf = std::fmod(x, 2.0 * M_PI);
            if (xf < 0.0) xf += 2.0 * M_PI;
            const int b = std::min(cfg.bins - 1, static_cast<int>(xf / (2.0 * M_PI) * cfg.bins));
            h[static_cast<std::size_t>(b)] += 1.0 / cfg.ensemble;
        }
        return h;
    };
    rep.tv_initial = total_variation(histogram(members), bin_density(run.dens0, cfg.bins));

    // member equation of state in the subsystem-time gauge:
    //   dX/dt = u sqrt(kappa),  dkappa/dt = -2 u sqrt(kappa) V_T'(X, t)
    // seeded from the phase, so sqrt(kappa) u = S'(X) at t = 0.
    FieldInterp interp(run.snaps);
    const int nsteps = 2000;
    const double dt = cfg.t_end / nsteps;
    for (double& xm : members) {
        interp.rewind();
        const double sp = catmull_rom_periodic(run.sprime0, xm);
        double u = sp >= 0.0 ? 1.0 : -1.0;
        double kap = sp * sp;
        double x = xm, t = 0.0;
        auto f = [&](double tt, double xx, double kk, double& dxdt, double& dkdt) {
            const double rk = std::sqrt(std::max(kk, 1e-12));
            dxdt = u * rk;
            dkdt = -2.0 * u * rk * interp.vt_prime(xx, tt);
        };
        for (int step = 0; step < nsteps; ++step) {
            double k1x, k1k, k2x, k2k, k3x, k3k, k4x, k4k;
            f(t, x, kap, k1x, k1k);
            f(t + 0.5 * dt, x + 0.5 * dt * k1x, kap + 0.5 * dt * k1k, k2x, k2k);
            f(t + 0.5 * dt, x + 0.5 * dt * k2x, kap + 0.5 * dt * k2k, k3x, k3k);
            f(t + dt, x + dt * k3x, kap + dt * k3k, k4x, k4k);
            x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            kap += dt / 6.0 * (k1k + 2.0 * k2k + 2.0 * k3k + k4k);
            t += dt;
        }
        xm = x;
    }

    rep.endpoints = members;
    rep.hist_empirical = histogram(members);
    rep.hist_model = bin_density(run.dens_end, cfg.bins);
    rep.tv_final = total_variation(rep.hist_empirical, rep.hist_model);
    return rep;
}

}  // namespace psd
