#include "psd/pipeline.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

namespace psd {

namespace fs = std::filesystem;
using nlohmann::json;

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

MassProfile masses_from_config(const KeyValueConfig& cfg) {
    if (cfg.has("masses.values")) return MassProfile::from_masses(cfg.get_doubles("masses.values"));
    if (cfg.has("masses.equal")) return MassProfile::equal(static_cast<int>(cfg.get_long("masses.equal", 3)));
    throw ConfigError("masses.values: required (or masses.equal)");
}

PotentialSpec potential_from_config(const KeyValueConfig& cfg) {
    PotentialSpec spec;
    spec.beta = cfg.get_double("potential.beta", 1.0);
    spec.k = static_cast<int>(cfg.get_long("potential.k", -1));
    spec.softening = cfg.get_double("potential.softening", 0.0);
    spec.validate();
    return spec;
}

namespace {

fs::path resolve_out_dir(const KeyValueConfig& cfg,
                         const std::optional<fs::path>& out_override) {
    fs::path dir;
    if (out_override) {
        dir = *out_override;
    } else if (const char* env = std::getenv("PSD_OUTPUT_DIR"); env && *env) {
        dir = fs::path(env) / cfg.get_string("output.dir", "run-" + cfg.hash().substr(0, 8));
    } else {
        dir = cfg.get_string("output.dir", "run-" + cfg.hash().substr(0, 8));
    }
    fs::create_directories(dir);
    return dir;
}

struct InitialData {
    Configuration config;
    std::vector<Eigen::VectorXd> velocities;
};

std::vector<Eigen::VectorXd> parse_vectors(const KeyValueConfig& cfg, const std::string& key) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& rec : cfg.get_records(key)) {
        Eigen::VectorXd v(static_cast<long>(rec.size()));
        for (std::size_t i = 0; i < rec.size(); ++i) v[static_cast<long>(i)] = rec[i];
        out.push_back(std::move(v));
    }
    return out;
}

InitialData random_zero_energy(const KeyValueConfig& cfg, const MassProfile& masses,
                               const PotentialSpec& spec) {
    const auto seed = static_cast<uint64_t>(cfg.get_long("init.seed", cfg.get_long("seed", 42)));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int nb = masses.count();
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<Eigen::VectorXd> pos, vel;
        for (int i = 0; i < nb; ++i) {
            Eigen::VectorXd r(2), v(2);
            r << unif(rng), unif(rng);
            v << unif(rng), unif(rng);
            pos.push_back(std::move(r));
            vel.push_back(std::move(v));
        }
        try {
            Configuration config(pos, masses);
            if (config.min_pair_distance() < 0.2 * config.scale()) continue;
            ZeroEnergyData zd = prepare_zero_energy(
                config, vel, spec, cfg.get_double("init.angular_momentum", 0.0),
                cfg.get_bool("init.contracting", true));
            return InitialData{zd.config, zd.velocities};
        } catch (const DegenerateInput&) {
            continue;
        }
    }
    throw ConfigError("init.seed: no usable random configuration found");
}

InitialData cartesian_init(const KeyValueConfig& cfg, const MassProfile& mu,
                           const PotentialSpec& spec) {
    Configuration config(parse_vectors(cfg, "init.positions"), mu);
    auto vel = parse_vectors(cfg, "init.velocities");
    if (vel.size() != static_cast<std::size_t>(mu.count()))
        throw ConfigError("init.velocities: count mismatch");
    if (cfg.get_bool("init.prepare", true)) {
        ZeroEnergyData zd =
            prepare_zero_energy(config, vel, spec, cfg.get_double("init.angular_momentum", 0.0),
                                cfg.get_bool("init.contracting", false));
        return InitialData{zd.config, zd.velocities};
    }
    return InitialData{config, std::move(vel)};
}

InitialData build_initial_data(const KeyValueConfig& cfg, const MassProfile& mu,
                               const PotentialSpec& spec) {
    const std::string kind = cfg.get_string("init.kind", "random_zero_e");
    if (kind == "cartesian") return cartesian_init(cfg, mu, spec);
    if (kind == "random_zero_e") return random_zero_energy(cfg, mu, spec);
    if (kind == "kepler_pair") {
        ZeroEnergyData zd =
            kepler_pair_fixture(mu, spec, cfg.get_double("init.kepler.separation", 0.1),
                                cfg.get_double("init.kepler.distance", 4.0));
        return InitialData{std::move(zd.config), std::move(zd.velocities)};
    }
    if (kind == "homothetic") {
        ZeroEnergyData zd = homothetic_fixture(mu, spec, cfg.get_double("init.homothetic.size", 1.0));
        return InitialData{std::move(zd.config), std::move(zd.velocities)};
    }
    throw ConfigError("init.kind: unknown '" + kind + "'");
}

IntegrationControls integration_controls(const KeyValueConfig& cfg) {
    IntegrationControls c;
    c.ode.rel_tol = cfg.get_double("integrate.rel_tol", 1e-10);
    c.ode.abs_tol = cfg.get_double("integrate.abs_tol", 1e-12);
    c.ode.max_steps = cfg.get_long("integrate.max_steps", 20'000'000L);
    c.tol_constraint = cfg.get_double("integrate.tol_constraint", 1e-6);
    return c;
}

json manifest_header(const KeyValueConfig& cfg) {
    json m;
    m["format"] = kManifestFormat;
    m["config_hash"] = cfg.hash();
    m["versions"] = {{"pureshape", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"fftw", "3"}};
    json c;
    for (const auto& [k, v] : cfg.entries()) c[k] = v;
    m["config"] = c;
    return m;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    json j;
    in >> j;
    return j;
}

std::pair<std::size_t, std::size_t> anchor_pair_from(const KeyValueConfig& cfg,
                                                     std::size_t n_samples) {
    long a = cfg.get_long("ephemeris.anchor_pair.first", 0);
    long b = cfg.get_long("ephemeris.anchor_pair.second", -1);
    if (cfg.has("ephemeris.anchor_pair")) {
        const auto v = cfg.get_doubles("ephemeris.anchor_pair");
        if (v.size() != 2) throw ConfigError("ephemeris.anchor_pair: need two indices");
        a = static_cast<long>(v[0]);
        b = static_cast<long>(v[1]);
    }
    auto resolve = [&](long i) -> std::size_t {
        const long n = static_cast<long>(n_samples);
        if (i < 0) i += n;
        if (i < 0 || i >= n) throw ConfigError("ephemeris.anchor_pair: index out of range");
        return static_cast<std::size_t>(i);
    };
    return {resolve(a), resolve(b)};
}

// ----------------------------------------------------------------- quantum init

QuantumState quantum_initial_state(const KeyValueConfig& cfg, const SphereGrid& grid) {
    const int lmax_init = static_cast<int>(cfg.get_long("quantum.init.lmax", 24));
    if (lmax_init > grid.lmax())
        throw ResolutionExceeded("quantum.init.lmax " + std::to_string(lmax_init) +
                                 " exceeds grid Nyquist " + std::to_string(grid.lmax()));
    QuantumState psi;
    const std::string rkind = cfg.get_string("quantum.init.r", "gaussian");
    if (rkind == "uniform") {
        psi.R = Eigen::VectorXd::Ones(grid.nodes());
    } else if (rkind == "gaussian") {
        const auto center = cfg.has("quantum.init.r.center")
                                ? cfg.get_doubles("quantum.init.r.center")
                                : std::vector<double>{1.2, 0.8};
        if (center.size() != 2) throw ConfigError("quantum.init.r.center: need theta, phi");
        const double sigma = cfg.get_double("quantum.init.r.sigma", 0.6);
        const double offset = cfg.get_double("quantum.init.r.offset", 0.05);
        const Vec3 c = SphereGrid::sphere_node(center[0], center[1]);
        Eigen::VectorXd raw(grid.nodes());
        for (int i = 0; i < grid.n_theta(); ++i)
            for (int j = 0; j < grid.n_phi(); ++j)
                raw[i * grid.n_phi() + j] =
                    offset + std::exp(-(1.0 - grid.node(i, j).dot(c)) / (sigma * sigma));
        psi.R = band_limit(raw, grid, lmax_init);
    } else {
        throw ConfigError("quantum.init.r: unknown '" + rkind + "'");
    }

    psi.S = Eigen::VectorXd::Zero(grid.nodes());
    if (cfg.has("quantum.init.s")) {
        for (const auto& term : cfg.get_records("quantum.init.s")) {
            if (term.size() != 3) throw ConfigError("quantum.init.s: records are l,m,amp");
            const int l = static_cast<int>(term[0]);
            const int m = static_cast<int>(term[1]);
            if (l > lmax_init || std::abs(m) > l)
                throw ResolutionExceeded("quantum.init.s: harmonic beyond the band limit");
            psi.S += term[2] * grid.harmonic(l, m);
        }
    } else {
        psi.S = 0.8 * grid.harmonic(1, 1) + 0.3 * grid.harmonic(2, -1);
    }
    normalize_amplitude(psi, grid);
    return psi;
}

QuantumCurveState quantum_initial_curve(const KeyValueConfig& cfg, const SphereGrid& grid,
                                        const QuantumParams& params) {
    QuantumState psi = quantum_initial_state(cfg, grid);
    const auto qpos = cfg.has("quantum.position") ? cfg.get_doubles("quantum.position")
                                                  : std::vector<double>{1.2, 2.1};
    if (qpos.size() != 2) throw ConfigError("quantum.position: need theta, phi");
    const Vec3 Q = SphereGrid::sphere_node(qpos[0], qpos[1]);
    const int sign = cfg.get_long("quantum.sign", 1) >= 0 ? +1 : -1;
    const std::string seed_kind = cfg.get_string("quantum.seed", "guided");
    if (seed_kind == "guided")
        return seed_guided(Q, std::move(psi), grid, params, sign,
                           cfg.get_double("quantum.scale", 1.0));
    if (seed_kind == "explicit") {
        QuantumCurveState st;
        st.Q = Q;
        st.u = Direction::from_angle(Q, cfg.get_double("quantum.angle", 0.0)).embedded();
        st.kappa = cfg.get_double("quantum.kappa", 4.0);
        st.eps_sign = sign;
        st.psi = std::move(psi);
        return st;
    }
    throw ConfigError("quantum.seed: unknown '" + seed_kind + "'");
}

}  // namespace

std::vector<CurveSample> curve_samples_from_table(const CurveTable& table,
                                                  const MassProfile& masses,
                                                  const PotentialSpec& spec) {
    const int cs = table.column("s"), c1 = table.column("q1"), c2 = table.column("q2"),
              c3 = table.column("q3"), cphi = table.column("phi"), ck = table.column("kappa"),
              ce = table.column("epsilon"), cc = table.column("C"),
              cr = table.column("residual");
    std::vector<CurveSample> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        CurveSample smp;
        smp.s = row[static_cast<std::size_t>(cs)];
        smp.n = Vec3(row[static_cast<std::size_t>(c1)], row[static_cast<std::size_t>(c2)],
                     row[static_cast<std::size_t>(c3)])
                    .normalized();
        smp.u = Direction::from_angle(smp.n, row[static_cast<std::size_t>(cphi)]).embedded();
        smp.kappa = row[static_cast<std::size_t>(ck)];
        smp.epsilon = row[static_cast<std::size_t>(ce)];
        smp.C = row[static_cast<std::size_t>(cc)];
        smp.residual = row[static_cast<std::size_t>(cr)];
        if (std::isfinite(smp.kappa)) {
            const Vec3 gC =
                shape_potential_gradient(ShapePoint::sphere(smp.n), masses, spec);
            smp.dlogp_ds = -smp.u.dot(gC) / smp.kappa;
        }
        out.push_back(std::move(smp));
    }
    return out;
}

RunOutcome run_simulation(KeyValueConfig cfg, const std::optional<fs::path>& out_override) {
    RunOutcome outcome;
    fs::path dir;
    try {
        const std::string fmt = cfg.get_string("format", kConfigFormat);
        if (fmt != kConfigFormat) throw ConfigError("format: unsupported '" + fmt + "'");
        const std::string model = cfg.require_string("model.kind");
        if (model != "geodesic" && model != "classical" && model != "quantum")
            throw ConfigError("model.kind: unknown '" + model + "'");
        const MassProfile masses = masses_from_config(cfg);
        const PotentialSpec spec = potential_from_config(cfg);
        dir = resolve_out_dir(cfg, out_override);
        outcome.run_dir = dir;

        json manifest = manifest_header(cfg);
        manifest["model"] = model;
        json artifacts;
        json diagnostics;
        const std::string out_format = cfg.get_string("output.format", "csv");
        const bool want_jsonl = out_format == "jsonl" || out_format == "both";

        std::vector<CurveSample> curve;  // classical/geodesic path

        if (model == "quantum") {
            const std::string gspec = cfg.get_string("quantum.grid", "32x64");
            const auto xpos = gspec.find('x');
            if (xpos == std::string::npos) throw ConfigError("quantum.grid: expected NxM");
            const SphereGrid grid(std::stoi(gspec.substr(0, xpos)),
                                  std::stoi(gspec.substr(xpos + 1)));
            QuantumParams params;
            params.k_coupling = cfg.get_double("quantum.k_coupling", 1.0);
            params.alpha = cfg.get_double("quantum.alpha", spec.k + 2.0);
            params.amplitude_floor = cfg.get_double("quantum.floor", 1e-10);
            params.force_tilde_k_zero = cfg.get_bool("quantum.tilde_k_zero", false);
            params.validate();
            QuantumCurveState initial = quantum_initial_curve(cfg, grid, params);
            QuantumIntegrationControls controls;
            controls.ode.rel_tol = cfg.get_double("integrate.rel_tol", 1e-9);
            controls.ode.abs_tol = cfg.get_double("integrate.abs_tol", 1e-11);
            controls.tol_constraint = cfg.get_double("integrate.tol_constraint", 1e-6);
            const double span = cfg.get_double("integrate.span", 1.0);
            QuantumCurveResult result =
                integrate_quantum_curve(initial, span, grid, masses, spec, params, controls);
            write_curve_csv(dir / "curve.csv", result.samples);
            artifacts["curve_csv"] = "curve.csv";
            diagnostics["accepted_steps"] = result.accepted_steps;
            diagnostics["max_norm_drift"] = result.max_norm_drift;
            diagnostics["final_guidance_residual"] = result.samples.back().guidance_residual;
            if (cfg.get_bool("output.svg", false)) {
                std::vector<Vec3> pts;
                for (const auto& smp : result.samples) pts.push_back(smp.Q);
                write_sphere_svg(dir / "trajectory.svg", pts);
                artifacts["trajectory_svg"] = "trajectory.svg";
            }
        } else if (cfg.get_string("model.engine", "eos") == "newtonian") {
            if (model != "classical")
                throw ConfigError("model.engine: newtonian engine is for model.kind = classical");
            InitialData init = build_initial_data(cfg, masses, spec);
            OracleControls controls;
            controls.ode.rel_tol = cfg.get_double("integrate.rel_tol", 1e-12);
            controls.ode.abs_tol = cfg.get_double("integrate.abs_tol", 1e-14);
            controls.arc_length_span = cfg.get_double("integrate.span", 0.0);
            const double duration = cfg.get_double("integrate.duration", 100.0);
            NewtonianResult result =
                newtonian_oracle(init.config, init.velocities, spec, duration, controls);
            write_curve_csv(dir / "curve.csv", result.samples, masses, spec);
            write_oracle_csv(dir / "oracle.csv", result.samples);
            artifacts["curve_csv"] = "curve.csv";
            artifacts["oracle_csv"] = "oracle.csv";
            diagnostics["max_energy_drift"] = result.max_energy_drift;
            diagnostics["samples"] = result.samples.size();
            curve = curve_samples_from_table(read_curve_csv(dir / "curve.csv"), masses, spec);
        } else {
            // equation-of-state integration (geodesic or classical)
            ClassicalCurveState initial;
            const std::string init_kind = cfg.get_string("init.kind", "random_zero_e");
            if (init_kind == "shape") {
                const auto nv = cfg.get_doubles("init.shape.point");
                if (nv.size() != 3) throw ConfigError("init.shape.point: need three components");
                const ShapePoint q = ShapePoint::sphere(Vec3(nv[0], nv[1], nv[2]));
                const Direction direction =
                    Direction::from_angle(q.sphere_coords(), cfg.get_double("init.shape.angle", 0.0));
                if (model == "classical") {
                    initial = seed_from_shape(
                        q, direction, cfg.get_double("init.shape.kappa", 1.0),
                        cfg.get_long("init.shape.sign", 1) >= 0 ? +1 : -1, masses, spec,
                        cfg.get_double("integrate.tol_constraint", 1e-6));
                } else {
                    initial = ClassicalCurveState{q, direction, 1.0, +1};
                }
            } else {
                InitialData init = build_initial_data(cfg, masses, spec);
                initial = seed_from_cartesian(init.config, init.velocities, spec);
            }
            const IntegrationControls controls = integration_controls(cfg);
            const double span = cfg.get_double("integrate.span", 10.0);
            const CurveModel cm = model == "geodesic" ? CurveModel::Geodesic : CurveModel::Nbody;
            CurveResult result = integrate_curve(initial, span, masses, spec, controls, cm);
            curve = result.samples;
            write_curve_csv(dir / "curve.csv", result.samples);
            artifacts["curve_csv"] = "curve.csv";
            diagnostics["accepted_steps"] = result.accepted_steps;
            diagnostics["max_residual"] = result.max_residual;
            diagnostics["branch_crossings"] = result.crossings;

            if (model == "classical" && cfg.get_bool("ephemeris.enabled", true)) {
                const auto pair = anchor_pair_from(cfg, curve.size());
                const long anchor_raw = cfg.get_long("ephemeris.anchor", 0);
                const std::size_t anchor =
                    anchor_raw < 0 ? curve.size() + static_cast<std::size_t>(anchor_raw)
                                   : static_cast<std::size_t>(anchor_raw);
                EphemerisSeries series = ephemeris_duration(curve, anchor, pair);
                write_ephemeris_csv(dir / "ephemeris.csv", series);
                artifacts["ephemeris_csv"] = "ephemeris.csv";
                if (cfg.get_bool("output.reconstruction", false) ||
                    cfg.get_bool("analysis.subsystems", false)) {
                    const auto rec = reconstruct_newtonian(curve, series, masses);
                    write_reconstruction_csv(dir / "reconstruction.csv", rec);
                    artifacts["reconstruction_csv"] = "reconstruction.csv";
                }
            }
            if (cfg.get_bool("output.svg", false)) {
                std::vector<Vec3> pts;
                for (const auto& smp : result.samples) pts.push_back(smp.n);
                write_sphere_svg(dir / "trajectory.svg", pts);
                artifacts["trajectory_svg"] = "trajectory.svg";
                if (model == "classical") {
                    const ComplexityTrace tr = complexity(result.samples);
                    write_xy_svg(dir / "complexity.svg", tr.s, tr.com, "s", "complexity");
                    artifacts["complexity_svg"] = "complexity.svg";
                }
            }
        }

        if (want_jsonl && artifacts.contains("curve_csv")) {
            const CurveTable table = read_curve_csv(dir / "curve.csv");
            write_curve_jsonl(dir / "curve.jsonl", table);
            artifacts["curve_jsonl"] = "curve.jsonl";
        }

        // in-run analyses
        if (!curve.empty() && cfg.get_bool("analysis.arrow", false)) {
            const ComplexityTrace tr = complexity(curve);
            const ArrowReport arrow = arrow_of_time(tr);
            json a;
            a["status"] = arrow.status == ArrowStatus::Ok ? "ok" : "inconclusive";
            a["janus_index"] = arrow.janus_index;
            a["janus_s"] = arrow.janus_s;
            a["slope_before"] = arrow.slope_before;
            a["slope_after"] = arrow.slope_after;
            a["both_outward"] = arrow.both_outward;
            manifest["arrow"] = a;
        }
        if (cfg.get_bool("analysis.subsystems", false)) {
            fs::path traj;
            if (artifacts.contains("reconstruction_csv")) traj = dir / "reconstruction.csv";
            else if (artifacts.contains("oracle_csv")) traj = dir / "oracle.csv";
            if (!traj.empty()) {
                SubsystemThresholds th;
                th.theta_c = cfg.get_double("analysis.theta_c", 0.2);
                th.theta_L = cfg.get_double("analysis.theta_l", 0.05);
                th.dominance = cfg.get_double("analysis.dominance", 10.0);
                const auto frames = read_trajectory_csv(traj);
                const SubsystemReport rep = detect_subsystems(frames, masses, spec, th);
                json clusters = json::array();
                for (const auto& cl : rep.clusters) {
                    json c;
                    c["members"] = cl.members;
                    c["whole_system"] = cl.whole_system;
                    c["dominance_ratio"] = cl.dominance_ratio;
                    c["quantum_ratio"] = cl.quantum_ratio;
                    c["size_drift"] = cl.size_drift;
                    c["effective_subsystem"] = cl.effective_subsystem;
                    clusters.push_back(c);
                }
                manifest["subsystems"] = clusters;
            }
        }

        manifest["artifacts"] = artifacts;
        manifest["diagnostics"] = diagnostics;
        manifest["status"] = "ok";
        outcome.manifest = dir / "manifest.json";
        write_json(outcome.manifest, manifest);
        outcome.exit_code = 0;
        return outcome;
    } catch (const ConfigError& e) {
        outcome.exit_code = 2;
        outcome.error = e.what();
        std::cerr << "config error: " << e.what() << "\n";
        return outcome;
    } catch (const Error& e) {
        outcome.exit_code = 3;
        outcome.error = e.what();
        std::cerr << "numerical failure: " << e.what() << "\n";
        if (!dir.empty()) {
            json diag;
            diag["status"] = "failed";
            diag["error"] = e.what();
            write_json(dir / "diagnostic.json", diag);
        }
        return outcome;
    }
}

namespace {

MassProfile masses_from_manifest(const json& manifest) {
    KeyValueConfig cfg;
    for (const auto& [k, v] : manifest.at("config").items()) cfg.set(k, v.get<std::string>());
    return masses_from_config(cfg);
}

}  // namespace

CompareReport compare_runs(const fs::path& manifest_a, const fs::path& manifest_b,
                           const CompareTolerances& tol,
                           const std::optional<fs::path>& report_out) {
    const json ma = read_json(manifest_a);
    const json mb = read_json(manifest_b);
    const MassProfile mua = masses_from_manifest(ma);
    const MassProfile mub = masses_from_manifest(mb);
    if (mua.count() != mub.count())
        throw IncompatibleCharts("compare: different body counts");
    for (int i = 0; i < mua.count(); ++i)
        if (std::abs(mua[i] - mub[i]) > 1e-12)
            throw IncompatibleCharts("compare: different mass profiles");

    const CurveTable ta = read_curve_csv(manifest_a.parent_path() /
                                         ma.at("artifacts").at("curve_csv").get<std::string>());
    const CurveTable tb = read_curve_csv(manifest_b.parent_path() /
                                         mb.at("artifacts").at("curve_csv").get<std::string>());
    CompareReport rep;
    const auto pa = ta.sphere_points();
    const auto pb = tb.sphere_points();
    rep.hausdorff_ab = one_sided_hausdorff(pa, pb);
    rep.hausdorff_ba = one_sided_hausdorff(pb, pa);

    const bool ea = ma.at("artifacts").contains("ephemeris_csv");
    const bool eb = mb.at("artifacts").contains("ephemeris_csv");
    if (ea && eb) {
        rep.has_ephemeris = true;
        const EphemerisSeries sa = read_ephemeris_csv(
            manifest_a.parent_path() / ma["artifacts"]["ephemeris_csv"].get<std::string>());
        const EphemerisSeries sb = read_ephemeris_csv(
            manifest_b.parent_path() / mb["artifacts"]["ephemeris_csv"].get<std::string>());
        // interpolate b at a's arc lengths over the common range
        auto interp = [](const std::vector<EphemerisRecord>& recs, double s,
                         double EphemerisRecord::*field) {
            std::size_t hi = 1;
            while (hi + 1 < recs.size() && recs[hi].s < s) ++hi;
            const auto& r0 = recs[hi - 1];
            const auto& r1 = recs[hi];
            const double w = r1.s > r0.s ? std::clamp((s - r0.s) / (r1.s - r0.s), 0.0, 1.0) : 0.0;
            return (1.0 - w) * r0.*field + w * r1.*field;
        };
        double max_l = 0.0, max_t = 0.0, t_scale = 0.0;
        for (const auto& rec : sa.records) t_scale = std::max(t_scale, std::abs(rec.t));
        for (const auto& rec : sa.records) {
            if (rec.s < sb.records.front().s || rec.s > sb.records.back().s) continue;
            const double lb = interp(sb.records, rec.s, &EphemerisRecord::logL);
            const double tb_v = interp(sb.records, rec.s, &EphemerisRecord::t);
            max_l = std::max(max_l, std::abs(std::exp(rec.logL) - std::exp(lb)) /
                                        std::exp(std::max(rec.logL, lb)));
            max_t = std::max(max_t, std::abs(rec.t - tb_v) / std::max(1.0, t_scale));
        }
        rep.ephemeris_scale_rel = max_l;
        rep.ephemeris_time_rel = max_t;
    }
    rep.pass = std::max(rep.hausdorff_ab, rep.hausdorff_ba) < tol.curve &&
               (!rep.has_ephemeris || (rep.ephemeris_scale_rel < tol.ephemeris &&
                                       rep.ephemeris_time_rel < tol.ephemeris));
    if (report_out) {
        json j;
        j["hausdorff_ab"] = rep.hausdorff_ab;
        j["hausdorff_ba"] = rep.hausdorff_ba;
        j["ephemeris_scale_rel"] = rep.ephemeris_scale_rel;
        j["ephemeris_time_rel"] = rep.ephemeris_time_rel;
        j["pass"] = rep.pass;
        write_json(*report_out, j);
    }
    return rep;
}

int ephemeris_command(const fs::path& manifest_path, long anchor, long pair_a, long pair_b) {
    try {
        const json manifest = read_json(manifest_path);
        KeyValueConfig cfg;
        for (const auto& [k, v] : manifest.at("config").items()) cfg.set(k, v.get<std::string>());
        const MassProfile masses = masses_from_config(cfg);
        const PotentialSpec spec = potential_from_config(cfg);
        const fs::path dir = manifest_path.parent_path();
        const CurveTable table = read_curve_csv(
            dir / manifest.at("artifacts").at("curve_csv").get<std::string>());
        const auto curve = curve_samples_from_table(table, masses, spec);
        auto resolve = [&](long i) -> std::size_t {
            const long n = static_cast<long>(curve.size());
            if (i < 0) i += n;
            if (i < 0 || i >= n) throw ConfigError("anchor index out of range");
            return static_cast<std::size_t>(i);
        };
        const EphemerisSeries series =
            ephemeris_duration(curve, resolve(anchor), {resolve(pair_a), resolve(pair_b)});
        write_ephemeris_csv(dir / "ephemeris.csv", series);
        const auto rec = reconstruct_newtonian(curve, series, masses);
        write_reconstruction_csv(dir / "reconstruction.csv", rec);
        std::cout << "ephemeris: " << series.records.size() << " records\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

int analyze_command(const fs::path& manifest_path, bool arrow, bool subsystems) {
    try {
        const json manifest = read_json(manifest_path);
        KeyValueConfig cfg;
        for (const auto& [k, v] : manifest.at("config").items()) cfg.set(k, v.get<std::string>());
        const MassProfile masses = masses_from_config(cfg);
        const PotentialSpec spec = potential_from_config(cfg);
        const fs::path dir = manifest_path.parent_path();
        json out;
        if (arrow) {
            const CurveTable table = read_curve_csv(
                dir / manifest.at("artifacts").at("curve_csv").get<std::string>());
            const auto curve = curve_samples_from_table(table, masses, spec);
            const ArrowReport rep = arrow_of_time(complexity(curve));
            out["arrow"] = {{"status", rep.status == ArrowStatus::Ok ? "ok" : "inconclusive"},
                            {"janus_index", rep.janus_index},
                            {"janus_s", rep.janus_s},
                            {"slope_before", rep.slope_before},
                            {"slope_after", rep.slope_after},
                            {"both_outward", rep.both_outward}};
        }
        if (subsystems) {
            fs::path traj;
            if (manifest.at("artifacts").contains("reconstruction_csv"))
                traj = dir / manifest["artifacts"]["reconstruction_csv"].get<std::string>();
            else if (manifest.at("artifacts").contains("oracle_csv"))
                traj = dir / manifest["artifacts"]["oracle_csv"].get<std::string>();
            else
                throw ConfigError("analyze: run has no trajectory artifact for subsystems");
            SubsystemThresholds th;
            th.theta_c = cfg.get_double("analysis.theta_c", 0.2);
            th.theta_L = cfg.get_double("analysis.theta_l", 0.05);
            th.dominance = cfg.get_double("analysis.dominance", 10.0);
            const SubsystemReport rep = detect_subsystems(read_trajectory_csv(traj), masses, spec, th);
            json clusters = json::array();
            for (const auto& cl : rep.clusters) {
                json c;
                c["members"] = cl.members;
                c["whole_system"] = cl.whole_system;
                c["dominance_ratio"] = cl.dominance_ratio;
                c["quantum_ratio"] = cl.quantum_ratio;
                c["size_drift"] = cl.size_drift;
                c["effective_subsystem"] = cl.effective_subsystem;
                clusters.push_back(c);
            }
            out["subsystems"] = clusters;
        }
        write_json(dir / "analysis.json", out);
        std::cout << "analysis written to " << (dir / "analysis.json").string() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

RunOutcome run_born(const KeyValueConfig& cfg, const std::optional<fs::path>& out_override) {
    RunOutcome outcome;
    try {
        BornConfig bc;
        bc.grid_n = static_cast<int>(cfg.get_long("born.grid", 256));
        bc.winding = static_cast<int>(cfg.get_long("born.winding", 1));
        bc.amp_mod = cfg.get_double("born.amp_mod", 0.8);
        bc.phase_mod = cfg.get_double("born.phase_mod", 0.4);
        bc.potential_cos = cfg.get_double("born.potential_cos", 0.3);
        bc.k_coupling = cfg.get_double("born.k_coupling", 1.0);
        bc.t_end = cfg.get_double("born.t_end", 1.0);
        bc.ensemble = static_cast<int>(cfg.get_long("born.ensemble", 10000));
        bc.bins = static_cast<int>(cfg.get_long("born.bins", 64));
        bc.seed = static_cast<unsigned long long>(cfg.get_long("born.seed", cfg.get_long("seed", 12345)));
        bc.tilde_k_zero = cfg.get_bool("born.tilde_k_zero", true);
        bc.negative_control = cfg.get_bool("born.negative_control", false);

        const fs::path dir = resolve_out_dir(cfg, out_override);
        outcome.run_dir = dir;
        const BornReport rep = born_test(bc);
        json manifest = manifest_header(cfg);
        manifest["born"] = {{"bins", rep.bins},        {"ensemble", rep.ensemble},
                            {"seed", bc.seed},         {"tv_initial", rep.tv_initial},
                            {"tv_final", rep.tv_final}, {"negative_control", bc.negative_control}};
        manifest["born"]["hist_empirical"] = rep.hist_empirical;
        manifest["born"]["hist_model"] = rep.hist_model;
        manifest["status"] = "ok";
        outcome.manifest = dir / "born.json";
        write_json(outcome.manifest, manifest);
        std::cout << "born: tv_initial = " << rep.tv_initial << ", tv_final = " << rep.tv_final
                  << "\n";
        outcome.exit_code = 0;
        return outcome;
    } catch (const ConfigError& e) {
        outcome.exit_code = 2;
        outcome.error = e.what();
        std::cerr << "config error: " << e.what() << "\n";
        return outcome;
    } catch (const Error& e) {
        outcome.exit_code = 3;
        outcome.error = e.what();
        std::cerr << "numerical failure: " << e.what() << "\n";
        return outcome;
    }
}

int run_ensemble(const KeyValueConfig& cfg, int size, int threads,
                 const std::optional<fs::path>& out_override) {
    try {
        if (size < 1) throw ConfigError("ensemble: size must be >= 1");
        const fs::path base = resolve_out_dir(cfg, out_override);
        if (threads <= 0) {
            if (const char* env = std::getenv("PSD_THREADS"); env && *env) threads = std::atoi(env);
            if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
            if (threads <= 0) threads = 1;
        }
        const auto base_seed = static_cast<uint64_t>(cfg.get_long("seed", 42));
        std::vector<int> codes(static_cast<std::size_t>(size), -1);
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= size) return;
                KeyValueConfig member = cfg;
                const uint64_t seed = splitmix64(base_seed + static_cast<uint64_t>(i));
                member.set("seed", std::to_string(seed));
                member.set("init.seed", std::to_string(seed));
                char name[32];
                std::snprintf(name, sizeof(name), "member_%04d", i);
                const RunOutcome out = run_simulation(member, base / name);
                codes[static_cast<std::size_t>(i)] = out.exit_code;
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min(threads, size); ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();

        json manifest = manifest_header(cfg);
        manifest["ensemble_size"] = size;
        manifest["exit_codes"] = codes;
        write_json(base / "ensemble.json", manifest);
        for (int c : codes)
            if (c != 0) return 3;
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace psd
