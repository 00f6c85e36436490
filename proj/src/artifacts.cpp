#include "psd/artifacts.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace psd {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& cols,
                 const std::vector<std::vector<double>>& rows) {
    std::ofstream out = open_out(path);
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << format_double(row[c]);
        out << "\n";
    }
}

}  // namespace

int CurveTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    throw Error("curve table: missing column " + name);
}

std::vector<Vec3> CurveTable::sphere_points() const {
    const int c1 = column("q1"), c2 = column("q2"), c3 = column("q3");
    std::vector<Vec3> pts;
    pts.reserve(rows.size());
    for (const auto& row : rows)
        pts.emplace_back(row[static_cast<std::size_t>(c1)], row[static_cast<std::size_t>(c2)],
                         row[static_cast<std::size_t>(c3)]);
    return pts;
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveSample>& samples) {
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (const auto& smp : samples) {
        const double phi = Direction(smp.n, smp.u).angle(smp.n);
        rows.push_back({smp.s, smp.n[0], smp.n[1], smp.n[2], phi, smp.kappa, smp.epsilon, smp.C,
                        smp.residual});
    }
    write_table(path, {"s", "q1", "q2", "q3", "phi", "kappa", "epsilon", "C", "residual"}, rows);
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<QuantumSample>& samples) {
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (const auto& smp : samples) {
        const double phi = Direction(smp.Q, smp.u).angle(smp.Q);
        rows.push_back({smp.s, smp.Q[0], smp.Q[1], smp.Q[2], phi, smp.kappa, smp.epsilon_t, smp.C,
                        smp.residual, smp.norm, smp.guidance_residual});
    }
    write_table(path,
                {"s", "q1", "q2", "q3", "phi", "kappa", "epsilon", "C", "residual", "norm",
                 "guidance_residual"},
                rows);
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<NewtonianSample>& samples,
                     const MassProfile& masses, const PotentialSpec& spec) {
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (const auto& smp : samples) {
        const Configuration cfg(smp.positions, masses);
        const double C = shape_potential_cartesian(cfg, spec);
        const double kappa =
            smp.p * smp.p / (spec.beta * std::pow(smp.L, spec.k + 2.0));
        const double eps = smp.p > 0.0 ? smp.D / smp.p : 0.0;
        const double residual = std::abs(1.0 + eps * eps + 2.0 * C / kappa);
        const JacobiPair z = jacobi_coordinates(masses, smp.positions);
        const JacobiPair zd = jacobi_coordinates(masses, smp.velocities);
        const Vec3 ndot = hopf_velocity(z, zd);
        const double phi = Direction(smp.n, ndot).angle(smp.n);
        rows.push_back({smp.s, smp.n[0], smp.n[1], smp.n[2], phi, kappa, eps, C, residual});
    }
    write_table(path, {"s", "q1", "q2", "q3", "phi", "kappa", "epsilon", "C", "residual"}, rows);
}

void write_curve_jsonl(const std::filesystem::path& path, const CurveTable& table) {
    std::ofstream out = open_out(path);
    for (const auto& row : table.rows) {
        out << "{";
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            out << (c ? "," : "") << "\"" << table.columns[c]
                << "\":" << format_double(row[c]);
        out << "}\n";
    }
}

CurveTable read_curve_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    CurveTable table;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty curve file " + path.string());
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream rs(line);
        std::vector<double> row;
        while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_oracle_csv(const std::filesystem::path& path,
                      const std::vector<NewtonianSample>& samples) {
    if (samples.empty()) throw Error("oracle: nothing to write");
    const int nb = static_cast<int>(samples.front().positions.size());
    const int d = static_cast<int>(samples.front().positions.front().size());
    std::vector<std::string> cols{"t", "s", "L", "D", "p", "E"};
    for (int i = 0; i < nb; ++i)
        for (int a = 0; a < d; ++a)
            cols.push_back("r" + std::to_string(i + 1) + static_cast<char>('x' + a));
    for (int i = 0; i < nb; ++i)
        for (int a = 0; a < d; ++a)
            cols.push_back("v" + std::to_string(i + 1) + static_cast<char>('x' + a));
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (const auto& smp : samples) {
        std::vector<double> row{smp.t, smp.s, smp.L, smp.D, smp.p, smp.E};
        for (const auto& r : smp.positions)
            for (int a = 0; a < d; ++a) row.push_back(r[a]);
        for (const auto& v : smp.velocities)
            for (int a = 0; a < d; ++a) row.push_back(v[a]);
        rows.push_back(std::move(row));
    }
    write_table(path, cols, rows);
}

void write_ephemeris_csv(const std::filesystem::path& path, const EphemerisSeries& series) {
    std::vector<std::vector<double>> rows;
    rows.reserve(series.records.size());
    for (const auto& rec : series.records) rows.push_back({rec.s, rec.logL, rec.logp, rec.t});
    write_table(path, {"s", "logL", "logp", "t"}, rows);
}

EphemerisSeries read_ephemeris_csv(const std::filesystem::path& path) {
    const CurveTable table = read_curve_csv(path);
    const int cs = table.column("s"), cl = table.column("logL"), cp = table.column("logp"),
              ct = table.column("t");
    EphemerisSeries series;
    for (const auto& row : table.rows)
        series.records.push_back({row[static_cast<std::size_t>(cs)],
                                  row[static_cast<std::size_t>(cl)],
                                  row[static_cast<std::size_t>(cp)],
                                  row[static_cast<std::size_t>(ct)]});
    return series;
}

void write_reconstruction_csv(const std::filesystem::path& path,
                              const std::vector<ReconstructedSample>& samples) {
    if (samples.empty()) throw Error("reconstruction: nothing to write");
    const int nb = static_cast<int>(samples.front().positions.size());
    const int d = static_cast<int>(samples.front().positions.front().size());
    std::vector<std::string> cols{"t", "L"};
    for (int i = 0; i < nb; ++i)
        for (int a = 0; a < d; ++a)
            cols.push_back("r" + std::to_string(i + 1) + static_cast<char>('x' + a));
    std::vector<std::vector<double>> rows;
    for (const auto& smp : samples) {
        std::vector<double> row{smp.t, smp.L};
        for (const auto& r : smp.positions)
            for (int a = 0; a < d; ++a) row.push_back(r[a]);
        rows.push_back(std::move(row));
    }
    write_table(path, cols, rows);
}

std::vector<TrajectoryFrame> read_trajectory_csv(const std::filesystem::path& path) {
    const CurveTable table = read_curve_csv(path);
    // any table with t and r<i><axis> columns qualifies (oracle or reconstruction)
    const int ct = table.column("t");
    std::vector<std::pair<int, int>> body_cols;  // (body, first column), 2-D
    int nb = 0;
    while (true) {
        const std::string name = "r" + std::to_string(nb + 1) + "x";
        bool found = false;
        for (std::size_t i = 0; i < table.columns.size(); ++i)
            if (table.columns[i] == name) {
                body_cols.emplace_back(nb, static_cast<int>(i));
                found = true;
                break;
            }
        if (!found) break;
        ++nb;
    }
    if (nb == 0) throw Error("trajectory file has no position columns: " + path.string());
    std::vector<TrajectoryFrame> frames;
    for (const auto& row : table.rows) {
        TrajectoryFrame frame;
        frame.t = row[static_cast<std::size_t>(ct)];
        for (const auto& [body, col] : body_cols) {
            Eigen::VectorXd r(2);
            r << row[static_cast<std::size_t>(col)], row[static_cast<std::size_t>(col) + 1];
            frame.positions.push_back(std::move(r));
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

void write_sphere_svg(const std::filesystem::path& path, const std::vector<Vec3>& points) {
    std::ofstream out = open_out(path);
    const int size = 480;
    const double cx = size / 2.0, cy = size / 2.0, rad = size / 2.0 - 20.0;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << size << "' height='" << size
        << "'>\n";
    out << "<circle cx='" << cx << "' cy='" << cy << "' r='" << rad
        << "' fill='none' stroke='#888' stroke-width='1'/>\n";
    auto emit = [&](bool front) {
        out << "<polyline fill='none' stroke='" << (front ? "#1f4e9c" : "#a8c0e8")
            << "' stroke-width='1.2' points='";
        bool pen_down = false;
        for (const auto& n : points) {
            const bool here = (n[2] >= 0.0) == front;
            if (here) {
                out << cx + rad * n[0] << "," << cy - rad * n[1] << " ";
                pen_down = true;
            } else if (pen_down) {
                out << "'/>\n<polyline fill='none' stroke='" << (front ? "#1f4e9c" : "#a8c0e8")
                    << "' stroke-width='1.2' points='";
                pen_down = false;
            }
        }
        out << "'/>\n";
    };
    emit(false);
    emit(true);
    if (!points.empty()) {
        out << "<circle cx='" << cx + rad * points.front()[0] << "' cy='"
            << cy - rad * points.front()[1] << "' r='4' fill='#0a0'/>\n";
        out << "<circle cx='" << cx + rad * points.back()[0] << "' cy='"
            << cy - rad * points.back()[1] << "' r='4' fill='#a00'/>\n";
    }
    out << "</svg>\n";
}

void write_xy_svg(const std::filesystem::path& path, const std::vector<double>& x,
                  const std::vector<double>& y, const std::string& x_label,
                  const std::string& y_label) {
    std::ofstream out = open_out(path);
    const int w = 640, h = 400, m = 50;
    double xmin = x.empty() ? 0.0 : x.front(), xmax = xmin, ymin = y.empty() ? 0.0 : y.front(),
           ymax = ymin;
    for (double v : x) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
    }
    for (double v : y) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    auto px = [&](double v) { return m + (v - xmin) / (xmax - xmin) * (w - 2 * m); };
    auto py = [&](double v) { return h - m - (v - ymin) / (ymax - ymin) * (h - 2 * m); };
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    out << "<line x1='" << m << "' y1='" << h - m << "' x2='" << w - m << "' y2='" << h - m
        << "' stroke='#444'/>\n";
    out << "<line x1='" << m << "' y1='" << h - m << "' x2='" << m << "' y2='" << m
        << "' stroke='#444'/>\n";
    out << "<text x='" << w / 2 << "' y='" << h - 12 << "' font-size='13'>" << x_label
        << "</text>\n";
    out << "<text x='14' y='" << h / 2 << "' font-size='13' transform='rotate(-90 14 " << h / 2
        << ")'>" << y_label << "</text>\n";
    out << "<polyline fill='none' stroke='#1f4e9c' stroke-width='1.4' points='";
    for (std::size_t i = 0; i < x.size(); ++i) out << px(x[i]) << "," << py(y[i]) << " ";
    out << "'/>\n</svg>\n";
}

}  // namespace psd
