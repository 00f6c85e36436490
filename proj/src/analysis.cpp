#include "psd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace psd {

ComplexityTrace complexity(const std::vector<CurveSample>& curve) {
    ComplexityTrace tr;
    tr.s.reserve(curve.size());
    tr.com.reserve(curve.size());
    for (const auto& smp : curve) {
        tr.s.push_back(smp.s);
        tr.com.push_back(-smp.C);
    }
    return tr;
}

namespace {

double regression_slope(const std::vector<double>& x, const std::vector<double>& y,
                        std::size_t begin, std::size_t end) {
    const double n = static_cast<double>(end - begin);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

}  // namespace

ArrowReport arrow_of_time(const ComplexityTrace& trace) {
    ArrowReport rep;
    if (trace.com.empty()) return rep;
    const auto it = std::min_element(trace.com.begin(), trace.com.end());
    rep.janus_index = static_cast<std::size_t>(std::distance(trace.com.begin(), it));
    rep.janus_s = trace.s[rep.janus_index];
    const std::size_t before = rep.janus_index;
    const std::size_t after = trace.com.size() - rep.janus_index - 1;
    if (before < 10 || after < 10) {
        rep.status = ArrowStatus::Inconclusive;
        return rep;
    }
    rep.status = ArrowStatus::Ok;
    rep.slope_before = regression_slope(trace.s, trace.com, 0, rep.janus_index);
    rep.slope_after = regression_slope(trace.s, trace.com, rep.janus_index + 1, trace.com.size());
    rep.both_outward = rep.slope_before < 0.0 && rep.slope_after > 0.0;
    return rep;
}

namespace {

/// Single-linkage partition of bodies at linking threshold theta_c,
/// applied to window-averaged separations normalized per frame by L.
std::vector<std::vector<int>> single_linkage(const Eigen::MatrixXd& dist, double threshold) {
    const int n = static_cast<int>(dist.rows());
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
        return a;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (dist(i, j) < threshold) parent[static_cast<std::size_t>(find(j))] = find(i);
    std::vector<std::vector<int>> clusters;
    for (int root = 0; root < n; ++root) {
        if (find(root) != root) continue;
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (find(i) == root) members.push_back(i);
        clusters.push_back(std::move(members));
    }
    return clusters;
}

double weighted_scale(const std::vector<Eigen::VectorXd>& pos, const MassProfile& mu,
                      const std::vector<int>& members) {
    Eigen::VectorXd cm = Eigen::VectorXd::Zero(pos.front().size());
    double msum = 0.0;
    for (int i : members) {
        cm += mu[i] * pos[static_cast<std::size_t>(i)];
        msum += mu[i];
    }
    cm /= msum;
    double l2 = 0.0;
    for (int i : members) l2 += mu[i] * (pos[static_cast<std::size_t>(i)] - cm).squaredNorm();
    return std::sqrt(l2);
}

}  // namespace

SubsystemReport detect_subsystems(const std::vector<TrajectoryFrame>& window,
                                  const MassProfile& mu, const PotentialSpec& spec,
                                  const SubsystemThresholds& th,
                                  const std::vector<double>& vq_at_q) {
    if (window.empty()) throw DegenerateInput("detect_subsystems: empty window");
    const int n = static_cast<int>(window.front().positions.size());

    Eigen::MatrixXd mean_sep = Eigen::MatrixXd::Zero(n, n);
    for (const auto& frame : window) {
        double l2 = 0.0;
        for (int i = 0; i < n; ++i) l2 += mu[i] * frame.positions[static_cast<std::size_t>(i)].squaredNorm();
        const double L = std::sqrt(l2);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double d =
                    (frame.positions[static_cast<std::size_t>(i)] - frame.positions[static_cast<std::size_t>(j)]).norm() / L;
                mean_sep(i, j) += d;
                mean_sep(j, i) += d;
            }
    }
    mean_sep /= static_cast<double>(window.size());

    SubsystemReport report;
    for (auto& members : single_linkage(mean_sep, th.theta_c)) {
        ClusterReport cl;
        cl.members = std::move(members);
        cl.whole_system = static_cast<int>(cl.members.size()) == n;
        std::vector<char> in_cluster(static_cast<std::size_t>(n), 0);
        for (int i : cl.members) in_cluster[static_cast<std::size_t>(i)] = 1;

        if (cl.members.size() >= 2 && !cl.whole_system) {
            double intra = 0.0, external = 0.0, quantum = 0.0;
            for (std::size_t f = 0; f < window.size(); ++f) {
                const auto& pos = window[f].positions;
                double l2 = 0.0;
                for (int i = 0; i < n; ++i) l2 += mu[i] * pos[static_cast<std::size_t>(i)].squaredNorm();
                const double L = std::sqrt(l2);
                const double s2L2 = spec.softening * spec.softening * l2;
                double vi = 0.0, ve = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j) {
                        const double r2 =
                            (pos[static_cast<std::size_t>(i)] - pos[static_cast<std::size_t>(j)]).squaredNorm() + s2L2;
                        // scale-free pair contribution, as in the shape potential
                        const double term =
                            mu[i] * mu[j] * std::pow(r2, 0.5 * spec.k) / std::pow(L, spec.k);
                        const bool ci = in_cluster[static_cast<std::size_t>(i)];
                        const bool cj = in_cluster[static_cast<std::size_t>(j)];
                        if (ci && cj) vi += term;
                        else if (ci || cj) ve += term;
                    }
                intra += vi;
                external += ve;
                if (!vq_at_q.empty()) quantum += std::abs(vq_at_q[std::min(f, vq_at_q.size() - 1)]);
                cl.scale_trace.push_back(weighted_scale(pos, mu, cl.members));
            }
            intra /= static_cast<double>(window.size());
            external /= static_cast<double>(window.size());
            quantum /= static_cast<double>(window.size());

            cl.dominance_ratio = external > 0.0 ? intra / external
                                                : std::numeric_limits<double>::infinity();
            cl.quantum_ratio = intra > 0.0 ? quantum / intra : 0.0;
            const double lmax = *std::max_element(cl.scale_trace.begin(), cl.scale_trace.end());
            const double lmin = *std::min_element(cl.scale_trace.begin(), cl.scale_trace.end());
            const double lmean =
                std::accumulate(cl.scale_trace.begin(), cl.scale_trace.end(), 0.0) /
                static_cast<double>(cl.scale_trace.size());
            cl.size_drift = lmean > 0.0 ? (lmax - lmin) / lmean : 0.0;

            cl.cond_dominance = cl.dominance_ratio >= th.dominance;
            cl.cond_quantum = cl.quantum_ratio <= 1.0 / th.dominance;
            cl.cond_stable_size = cl.size_drift <= th.theta_L;
            cl.effective_subsystem = cl.cond_dominance && cl.cond_quantum && cl.cond_stable_size;
        }
        report.clusters.push_back(std::move(cl));
    }
    // canonical order: by first member index, so reports are stable under
    // relabeling-invariance checks
    std::sort(report.clusters.begin(), report.clusters.end(),
              [](const ClusterReport& a, const ClusterReport& b) {
                  return a.members.front() < b.members.front();
              });
    return report;
}

}  // namespace psd
