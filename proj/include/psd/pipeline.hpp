#pragma once

#include <filesystem>
#include <optional>

#include "psd/artifacts.hpp"
#include "psd/born.hpp"

namespace psd {

struct RunOutcome {
    int exit_code = 0;
    std::filesystem::path run_dir;
    std::filesystem::path manifest;
    std::string error;
};

/// Executes one configured run: build initial data, integrate, write the
/// curve/ephemeris/analysis artifacts and the manifest.
/// Exit codes: 0 success, 2 invalid configuration, 3 numerical failure
/// (a diagnostic JSON is written in the run directory).
RunOutcome run_simulation(KeyValueConfig cfg,
                          const std::optional<std::filesystem::path>& out_override = {});

struct CompareTolerances {
    double curve = 1e-5;
    double ephemeris = 1e-4;
};

struct CompareReport {
    double hausdorff_ab = 0.0;
    double hausdorff_ba = 0.0;
    double ephemeris_scale_rel = 0.0;
    double ephemeris_time_rel = 0.0;
    bool has_ephemeris = false;
    bool pass = false;
};

/// Parametrization-free comparison of two finished runs.
/// Throws IncompatibleCharts when the runs live on different charts
/// (different mass profiles or non-sphere models).
CompareReport compare_runs(const std::filesystem::path& manifest_a,
                           const std::filesystem::path& manifest_b,
                           const CompareTolerances& tol = {},
                           const std::optional<std::filesystem::path>& report_out = {});

/// Recomputes the ephemeris series of a finished classical run.
int ephemeris_command(const std::filesystem::path& manifest, long anchor, long pair_a,
                      long pair_b);

/// Post-hoc analyses over a finished run (arrow of time, subsystems).
int analyze_command(const std::filesystem::path& manifest, bool arrow, bool subsystems);

/// Born equivariance test; writes born.json into the output directory.
RunOutcome run_born(const KeyValueConfig& cfg,
                    const std::optional<std::filesystem::path>& out_override = {});

/// Fans out independent runs with deterministic per-member seeds.
int run_ensemble(const KeyValueConfig& cfg, int size, int threads,
                 const std::optional<std::filesystem::path>& out_override = {});

/// Rebuilds CurveSamples from a stored curve table (dlogp/ds and the
/// tangent are reconstructed from the stored columns).
std::vector<CurveSample> curve_samples_from_table(const CurveTable& table,
                                                  const MassProfile& masses,
                                                  const PotentialSpec& spec);

MassProfile masses_from_config(const KeyValueConfig& cfg);
PotentialSpec potential_from_config(const KeyValueConfig& cfg);

uint64_t splitmix64(uint64_t x);

}  // namespace psd
