#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "psd/errors.hpp"

namespace psd {

struct OdeControls {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 0.0;  // 0 = choose automatically
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 1e-14;
    long max_steps = 20'000'000;
};

/// Quartic dense-output interpolant of one accepted Dormand-Prince step.
struct DenseStep {
    double s0 = 0.0;
    double h = 0.0;
    Eigen::VectorXd r1, r2, r3, r4, r5;

    Eigen::VectorXd eval(double s) const {
        const double th = (s - s0) / h;
        const double th1 = 1.0 - th;
        return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
    }
};

enum class StepAction { Continue, Stop, Restart };

/// Observer verdict after an accepted step. The observer may mutate the
/// state in place (renormalization); Restart resumes integration from
/// (restart_s, restart_y) instead of the accepted endpoint.
struct StepControl {
    StepAction action = StepAction::Continue;
    double restart_s = 0.0;
    Eigen::VectorXd restart_y;

    static StepControl cont() { return {}; }
    static StepControl stop() { return {StepAction::Stop, 0.0, {}}; }
    static StepControl restart(double s, Eigen::VectorXd y) {
        return {StepAction::Restart, s, std::move(y)};
    }
};

/// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) driver.
///
/// rhs(s, y, dy) fills dy; observer(s_prev, s_now, y, dense) runs after
/// every accepted step and may mutate y. Integrates from s0 to s1 (either
/// direction), hitting s1 exactly. Throws StepSizeUnderflow when the
/// controller cannot proceed at min_step.
template <class Rhs, class Observer>
void rk45_integrate(Rhs&& rhs, Eigen::VectorXd& y, double s0, double s1,
                    const OdeControls& c, Observer&& observer) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0,
                            d7 = 69997945.0 / 29380423.0;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    if (s1 == s0) return;
    const double dir = (s1 > s0) ? 1.0 : -1.0;
    const long n = y.size();
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), ynew(n);

    double s = s0;
    double h;
    if (c.initial_step > 0.0) {
        h = c.initial_step;
    } else {
        rhs(s, y, k1);
        const double d0 = y.norm() + c.abs_tol;
        const double dv = k1.norm() + 1e-300;
        h = std::clamp(0.01 * d0 / dv, 1e-8, 1e-2);
    }
    h = std::min({h, c.max_step, std::abs(s1 - s0)});

    long steps = 0;
    bool rejected = false;
    while (dir * (s1 - s) > 0.0) {
        if (++steps > c.max_steps)
            throw Error("ode: step budget exceeded");
        h = std::min(h, std::abs(s1 - s));
        if (h < c.min_step)
            throw StepSizeUnderflow("ode: step size underflow at s = " + std::to_string(s));
        const double hd = dir * h;

        rhs(s, y, k1);
        yt = y + hd * (a21 * k1);
        rhs(s + c2 * hd, yt, k2);
        yt = y + hd * (a31 * k1 + a32 * k2);
        rhs(s + c3 * hd, yt, k3);
        yt = y + hd * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(s + c4 * hd, yt, k4);
        yt = y + hd * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(s + c5 * hd, yt, k5);
        yt = y + hd * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(s + hd, yt, k6);
        ynew = y + hd * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(s + hd, ynew, k7);

        double err = 0.0;
        for (long i = 0; i < n; ++i) {
            const double ei =
                hd * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = c.abs_tol + c.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (ei / sc) * (ei / sc);
        }
        err = std::sqrt(err / static_cast<double>(n));

        if (err <= 1.0) {
            DenseStep dense;
            dense.s0 = s;
            dense.h = hd;
            dense.r1 = y;
            dense.r2 = ynew - y;
            dense.r3 = hd * k1 - dense.r2;
            dense.r4 = dense.r2 - hd * k7 - dense.r3;
            dense.r5 = hd * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

            const double s_prev = s;
            s += hd;
            y = ynew;
            StepControl ctl = observer(s_prev, s, y, dense);
            if (ctl.action == StepAction::Stop) return;
            if (ctl.action == StepAction::Restart) {
                s = ctl.restart_s;
                y = std::move(ctl.restart_y);
            }
            const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            h = h * std::min(rejected ? 1.0 : 10.0, std::max(0.2, fac));
            h = std::min(h, c.max_step);
            rejected = false;
        } else {
            h = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
            rejected = true;
        }
    }
}

}  // namespace psd
