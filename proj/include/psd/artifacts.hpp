#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "psd/analysis.hpp"
#include "psd/config.hpp"
#include "psd/newtonian.hpp"
#include "psd/quantum.hpp"

namespace psd {

/// Stable shortest-roundtrip decimal formatting; the basis of the
/// byte-identical-output guarantee.
std::string format_double(double v);

struct CurveTable {
    // column-major storage of the curve CSV (classical or quantum)
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const;
    std::vector<Vec3> sphere_points() const;  // q1..q3 columns
};

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveSample>& samples);
void write_curve_csv(const std::filesystem::path& path, const std::vector<QuantumSample>& samples);
/// Oracle runs projected to the same classical schema.
void write_curve_csv(const std::filesystem::path& path, const std::vector<NewtonianSample>& samples,
                     const MassProfile& masses, const PotentialSpec& spec);
void write_curve_jsonl(const std::filesystem::path& path, const CurveTable& table);

CurveTable read_curve_csv(const std::filesystem::path& path);

void write_oracle_csv(const std::filesystem::path& path,
                      const std::vector<NewtonianSample>& samples);

void write_ephemeris_csv(const std::filesystem::path& path, const EphemerisSeries& series);
EphemerisSeries read_ephemeris_csv(const std::filesystem::path& path);

void write_reconstruction_csv(const std::filesystem::path& path,
                              const std::vector<ReconstructedSample>& samples);
std::vector<TrajectoryFrame> read_trajectory_csv(const std::filesystem::path& path);

/// Orthographic projection of a shape-sphere trajectory (view down +n3;
/// the far hemisphere is drawn lighter).
void write_sphere_svg(const std::filesystem::path& path, const std::vector<Vec3>& points);
void write_xy_svg(const std::filesystem::path& path, const std::vector<double>& x,
                  const std::vector<double>& y, const std::string& x_label,
                  const std::string& y_label);

}  // namespace psd
