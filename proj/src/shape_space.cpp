#include "psd/shape_space.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <array>
#include <cmath>

namespace psd {

namespace {

constexpr double kTinyScale = 1e-300;

std::complex<double> as_complex(const Eigen::VectorXd& v) {
    return {v[0], v[1]};
}

}  // namespace

// ---------------------------------------------------------------- masses

MassProfile MassProfile::from_masses(const std::vector<double>& masses) {
    if (masses.empty()) throw DegenerateInput("masses: empty");
    double sum = 0.0;
    for (double m : masses) {
        if (!(m > 0.0)) throw DegenerateInput("masses: every mass must be > 0");
        sum += m;
    }
    const double mean = sum / static_cast<double>(masses.size());
    std::vector<double> mu(masses.size());
    for (std::size_t i = 0; i < masses.size(); ++i) mu[i] = masses[i] / mean;
    return MassProfile(std::move(mu));
}

MassProfile MassProfile::equal(int n) {
    if (n < 1) throw DegenerateInput("masses: count must be >= 1");
    return MassProfile(std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

// ---------------------------------------------------------------- configuration

Configuration::Configuration(std::vector<Eigen::VectorXd> positions, MassProfile masses)
    : pos_(std::move(positions)), masses_(std::move(masses)) {
    if (pos_.size() < 3) throw DegenerateInput("configuration: need at least 3 bodies");
    if (static_cast<int>(pos_.size()) != masses_.count())
        throw DegenerateInput("configuration: positions and masses disagree in count");
    const int d = static_cast<int>(pos_.front().size());
    if (d != 2 && d != 3) throw DegenerateInput("configuration: dimension must be 2 or 3");
    for (const auto& r : pos_)
        if (static_cast<int>(r.size()) != d)
            throw DegenerateInput("configuration: mixed dimensions");

    Eigen::VectorXd com = Eigen::VectorXd::Zero(d);
    double mu_sum = 0.0;
    for (int i = 0; i < count(); ++i) {
        com += masses_[i] * pos_[static_cast<std::size_t>(i)];
        mu_sum += masses_[i];
    }
    com /= mu_sum;
    for (auto& r : pos_) r -= com;
    if (scale() < kTinyScale) throw TotalCollision();
}

double Configuration::scale() const {
    double s = 0.0;
    for (int i = 0; i < count(); ++i) s += masses_[i] * pos_[static_cast<std::size_t>(i)].squaredNorm();
    return std::sqrt(s);
}

double Configuration::scale_unweighted() const {
    double s = 0.0;
    for (const auto& r : pos_) s += r.squaredNorm();
    return std::sqrt(s);
}

double Configuration::min_pair_distance() const {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < count(); ++i)
        for (int j = i + 1; j < count(); ++j)
            best = std::min(best, (pos_[static_cast<std::size_t>(i)] - pos_[static_cast<std::size_t>(j)]).norm());
    return best;
}

// ---------------------------------------------------------------- shape point

ShapePoint ShapePoint::sphere(const Vec3& n) {
    ShapePoint q;
    q.chart_ = Chart::Sphere3Body;
    q.n_ = n.normalized();
    q.dim_ = 2;
    return q;
}

ShapePoint ShapePoint::general(std::vector<Eigen::VectorXd> rep, int dim) {
    ShapePoint q;
    q.chart_ = Chart::General;
    q.rep_ = std::move(rep);
    q.dim_ = dim;
    return q;
}

const Vec3& ShapePoint::sphere_coords() const {
    if (chart_ != Chart::Sphere3Body)
        throw IncompatibleCharts("shape point is not on the sphere chart");
    return n_;
}

const std::vector<Eigen::VectorXd>& ShapePoint::representative() const {
    if (chart_ != Chart::General)
        throw IncompatibleCharts("shape point is not on the general chart");
    return rep_;
}

// ---------------------------------------------------------------- jacobi / hopf

JacobiPair jacobi_coordinates(const MassProfile& mu,
                              const std::vector<Eigen::VectorXd>& v) {
    if (mu.count() != 3 || v.size() != 3 || v.front().size() != 2)
        throw IncompatibleCharts("jacobi coordinates need a planar 3-body input");
    const double m12 = mu[0] + mu[1];
    const double mt1 = mu[0] * mu[1] / m12;
    const double mt2 = mu[2] * m12 / (m12 + mu[2]);
    const auto r1 = as_complex(v[0]), r2 = as_complex(v[1]), r3 = as_complex(v[2]);
    JacobiPair z;
    z.z1 = std::sqrt(mt1) * (r2 - r1);
    z.z2 = std::sqrt(mt2) * (r3 - (mu[0] * r1 + mu[1] * r2) / m12);
    return z;
}

JacobiPair jacobi_coordinates(const Configuration& config) {
    return jacobi_coordinates(config.masses(), config.positions());
}

Vec3 hopf_point(const JacobiPair& z) {
    const double a1 = std::norm(z.z1), a2 = std::norm(z.z2);
    const double den = a1 + a2;
    if (den < kTinyScale) throw TotalCollision();
    const std::complex<double> w = z.z1 * std::conj(z.z2);
    return Vec3(2.0 * w.real(), a1 - a2, 2.0 * w.imag()) / den;
}

Vec3 hopf_velocity(const JacobiPair& z, const JacobiPair& zdot) {
    const double a1 = std::norm(z.z1), a2 = std::norm(z.z2);
    const double den = a1 + a2;
    const std::complex<double> w = z.z1 * std::conj(z.z2);
    const std::complex<double> dw = zdot.z1 * std::conj(z.z2) + z.z1 * std::conj(zdot.z2);
    const double da1 = 2.0 * (std::conj(z.z1) * zdot.z1).real();
    const double da2 = 2.0 * (std::conj(z.z2) * zdot.z2).real();
    const Vec3 wv(2.0 * w.real(), a1 - a2, 2.0 * w.imag());
    const Vec3 dwv(2.0 * dw.real(), da1 - da2, 2.0 * dw.imag());
    return dwv / den - wv * (da1 + da2) / (den * den);
}

// ---------------------------------------------------------------- projection

namespace {

/// Deterministic rotation gauge: dominant principal axis along e1, signs
/// fixed by lexicographic maximization of the mass-weighted odd moments
/// over the proper two-axis flips. Generic configurations only; exactly
/// symmetric ones keep the unflipped frame.
void gauge_fix_rotation(std::vector<Eigen::VectorXd>& rep, const MassProfile& mu) {
    const int d = static_cast<int>(rep.front().size());
    Eigen::MatrixXd inertia = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < static_cast<int>(rep.size()); ++i)
        inertia += mu[i] * rep[static_cast<std::size_t>(i)] * rep[static_cast<std::size_t>(i)].transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inertia);
    Eigen::MatrixXd rot(d, d);
    for (int a = 0; a < d; ++a) rot.row(a) = es.eigenvectors().col(d - 1 - a).transpose();
    if (rot.determinant() < 0.0) rot.row(d - 1) *= -1.0;
    for (auto& r : rep) r = rot * r;

    auto moments = [&](const Eigen::VectorXd& flip) {
        Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < static_cast<int>(rep.size()); ++i)
            for (int a = 0; a < d; ++a) {
                const double x = flip[a] * rep[static_cast<std::size_t>(i)][a];
                m[a] += mu[i] * x * x * x;
            }
        return m;
    };
    // proper flips: identity and all two-axis sign changes
    std::vector<Eigen::VectorXd> flips{Eigen::VectorXd::Ones(d)};
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            Eigen::VectorXd f = Eigen::VectorXd::Ones(d);
            f[a] = -1.0;
            f[b] = -1.0;
            flips.push_back(f);
        }
    const Eigen::VectorXd* best = &flips.front();
    Eigen::VectorXd best_m = moments(flips.front());
    for (const auto& f : flips) {
        Eigen::VectorXd m = moments(f);
        for (int a = 0; a < d; ++a) {
            if (m[a] > best_m[a] + 1e-14) {
                best = &f;
                best_m = m;
                break;
            }
            if (m[a] < best_m[a] - 1e-14) break;
        }
    }
    for (auto& r : rep)
        for (int a = 0; a < d; ++a) r[a] *= (*best)[a];
}

}  // namespace

ShapePoint project_to_shape(const Configuration& config) {
    if (config.count() == 3 && config.dim() == 2)
        return ShapePoint::sphere(hopf_point(jacobi_coordinates(config)));
    std::vector<Eigen::VectorXd> rep = config.positions();
    const double L = config.scale();
    for (auto& r : rep) r /= L;
    gauge_fix_rotation(rep, config.masses());
    return ShapePoint::general(std::move(rep), config.dim());
}

Configuration representative_configuration(const ShapePoint& q, const MassProfile& mu) {
    const Vec3& n = q.sphere_coords();
    if (mu.count() != 3) throw IncompatibleCharts("sphere chart needs 3 bodies");
    const double m12 = mu[0] + mu[1];
    const double mt1 = mu[0] * mu[1] / m12;
    const double mt2 = mu[2] * m12 / (m12 + mu[2]);

    // section of the Hopf bundle: the larger Jacobi coordinate is taken
    // real nonnegative, the other follows from z1 conj(z2) = (n1 - i n3)/2
    std::complex<double> z1, z2;
    if (n[1] > -0.5) {
        z1 = std::sqrt((1.0 + n[1]) / 2.0);
        z2 = std::complex<double>(n[0], -n[2]) / (2.0 * z1);
    } else {
        z2 = std::sqrt((1.0 - n[1]) / 2.0);
        z1 = std::complex<double>(n[0], n[2]) / (2.0 * z2);
    }
    const std::complex<double> w1 = z1 / std::sqrt(mt1);
    const std::complex<double> w2 = z2 / std::sqrt(mt2);
    const double mu_sum = mu[0] + mu[1] + mu[2];
    const std::complex<double> cm12 = -mu[2] * w2 / mu_sum;
    const std::complex<double> r1 = cm12 - mu[1] * w1 / m12;
    const std::complex<double> r2 = cm12 + mu[0] * w1 / m12;
    const std::complex<double> r3 = cm12 + w2;
    std::vector<Eigen::VectorXd> pos(3, Eigen::VectorXd(2));
    pos[0] << r1.real(), r1.imag();
    pos[1] << r2.real(), r2.imag();
    pos[2] << r3.real(), r3.imag();
    return Configuration(std::move(pos), mu);
}

// ---------------------------------------------------------------- distances

double shape_distance(const ShapePoint& a, const ShapePoint& b, const MassProfile& mu) {
    auto to_sphere = [&](const ShapePoint& q) -> std::optional<Vec3> {
        if (q.chart() == Chart::Sphere3Body) return q.sphere_coords();
        if (q.representative().size() == 3 && q.dim() == 2) {
            std::vector<Eigen::VectorXd> rep = q.representative();
            return hopf_point(jacobi_coordinates(mu, rep));
        }
        return std::nullopt;
    };
    const auto na = to_sphere(a);
    const auto nb = to_sphere(b);
    if (na && nb) {
        const Vec3 cr = na->cross(*nb);
        return 0.5 * std::atan2(cr.norm(), na->dot(*nb));
    }
    if (a.chart() != Chart::General || b.chart() != Chart::General ||
        a.dim() != b.dim() || a.representative().size() != b.representative().size())
        throw IncompatibleCharts("shape distance: charts do not match");

    // optimal proper rotation (Kabsch) between the L = 1 representatives
    const int d = a.dim();
    const auto& ra = a.representative();
    const auto& rb = b.representative();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < ra.size(); ++i)
        cov += mu[static_cast<int>(i)] * rb[i] * ra[i].transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    double trace = svd.singularValues().head(d - 1).sum();
    const double det = (svd.matrixU() * svd.matrixV().transpose()).determinant();
    trace += (det < 0.0 ? -1.0 : 1.0) * svd.singularValues()[d - 1];
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * trace));
}

// ---------------------------------------------------------------- metric

Eigen::Vector2d sphere_angles(const Vec3& n) {
    const double theta = std::acos(std::clamp(n[2], -1.0, 1.0));
    const double phi = std::atan2(n[1], n[0]);
    return {theta, phi};
}

Vec3 sphere_from_angles(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

std::pair<Vec3, Vec3> tangent_frame(const Vec3& n) {
    Vec3 ez = Vec3::UnitZ();
    Vec3 ephi = ez.cross(n);
    if (ephi.norm() < 1e-12) {
        // polar fallback
        ephi = Vec3::UnitY();
    } else {
        ephi.normalize();
    }
    const Vec3 etheta = ephi.cross(n).normalized();
    return {etheta, ephi};
}

PairSeparations pair_separations(const MassProfile& mu) {
    if (mu.count() != 3) throw IncompatibleCharts("pair separations need 3 bodies");
    const double m12 = mu[0] + mu[1];
    const double mt1 = mu[0] * mu[1] / m12;
    const double mt2 = mu[2] * m12 / (m12 + mu[2]);
    const double cross = 1.0 / (m12 * std::sqrt(mt1 * mt2));

    PairSeparations ps;
    ps.a[0] = 1.0 / (2.0 * mt1);
    ps.b[0] = Vec3(0.0, 1.0 / (2.0 * mt1), 0.0);
    ps.a[1] = 1.0 / (2.0 * mt2) + (mu[1] / m12) * (mu[1] / m12) / (2.0 * mt1);
    ps.b[1] = Vec3(mu[1] * cross,
                   (mu[1] / m12) * (mu[1] / m12) / (2.0 * mt1) - 1.0 / (2.0 * mt2), 0.0);
    ps.a[2] = 1.0 / (2.0 * mt2) + (mu[0] / m12) * (mu[0] / m12) / (2.0 * mt1);
    ps.b[2] = Vec3(-mu[0] * cross,
                   (mu[0] / m12) * (mu[0] / m12) / (2.0 * mt1) - 1.0 / (2.0 * mt2), 0.0);
    return ps;
}

std::array<Vec3, 3> collision_points(const MassProfile& mu) {
    const PairSeparations ps = pair_separations(mu);
    std::array<Vec3, 3> out;
    for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] = -ps.b[static_cast<std::size_t>(i)].normalized();
    return out;
}

KinematicMetric kinematic_metric_at(const ShapePoint& q, const MassProfile& mu,
                                    const PotentialSpec& spec) {
    if (q.chart() == Chart::Sphere3Body) {
        const Vec3& n = q.sphere_coords();
        if (spec.softening == 0.0) {
            const auto r2 = pair_separations(mu).value(n);
            for (double v : r2)
                if (v < 1e-18)
                    throw CollisionSingularity("kinematic metric at an unsoftened collision shape");
        }
        const double theta = sphere_angles(n)[0];
        KinematicMetric m;
        m.g = Eigen::Matrix2d::Zero();
        m.g(0, 0) = 0.25;
        m.g(1, 1) = 0.25 * std::sin(theta) * std::sin(theta);
        m.g_inv = Eigen::Matrix2d::Zero();
        m.g_inv(0, 0) = 4.0;
        m.g_inv(1, 1) = 4.0 / (std::sin(theta) * std::sin(theta));
        return m;
    }
    // General chart: components in an orthonormal horizontal frame of the
    // mass-weighted pre-shape sphere, where the quotient metric is the
    // identity of the chart dimension. The sphere chart carries the
    // nontrivial coordinate expression.
    const auto& rep = q.representative();
    const int nbody = static_cast<int>(rep.size());
    const int d = q.dim();
    if (spec.softening == 0.0) {
        double rmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < nbody; ++i)
            for (int j = i + 1; j < nbody; ++j)
                rmin = std::min(rmin, (rep[static_cast<std::size_t>(i)] - rep[static_cast<std::size_t>(j)]).norm());
        if (rmin < 1e-9)
            throw CollisionSingularity("kinematic metric at an unsoftened collision shape");
    }
    const int gauge = d + d * (d - 1) / 2 + 1;
    const int dim = nbody * d - gauge;
    KinematicMetric m;
    m.g = Eigen::MatrixXd::Identity(dim, dim);
    m.g_inv = Eigen::MatrixXd::Identity(dim, dim);
    return m;
}

}  // namespace psd
