#include <CLI11.hpp>

#include <iostream>

#include "psd/pipeline.hpp"

namespace {

psd::KeyValueConfig load_config(const std::string& path,
                                const std::vector<std::string>& overrides) {
    psd::KeyValueConfig cfg = psd::KeyValueConfig::parse_file(path);
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw psd::ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

struct SimArgs {
    std::string config_path;
    std::string output;
    std::vector<std::string> overrides;
    std::string grid;
    double span = std::nan("");
};

void add_sim_options(CLI::App* cmd, SimArgs& args, bool quantum) {
    cmd->add_option("--config", args.config_path, "run configuration file")->required();
    cmd->add_option("--output", args.output, "output directory (overrides output.dir)");
    cmd->add_option("--set", args.overrides, "override a config key, key=value");
    if (quantum) {
        cmd->add_option("--grid", args.grid, "grid as NxM (overrides quantum.grid)");
        cmd->add_option("--span", args.span, "arc-length span (overrides integrate.span)");
    }
}

int dispatch_sim(const SimArgs& args, const std::string& kind) {
    try {
        psd::KeyValueConfig cfg = load_config(args.config_path, args.overrides);
        cfg.set("model.kind", kind);
        if (!args.grid.empty()) cfg.set("quantum.grid", args.grid);
        if (!std::isnan(args.span)) cfg.set("integrate.span", psd::format_double(args.span));
        std::optional<std::filesystem::path> out;
        if (!args.output.empty()) out = args.output;
        const psd::RunOutcome outcome = psd::run_simulation(cfg, out);
        if (outcome.exit_code == 0)
            std::cout << "run complete: " << outcome.manifest.string() << "\n";
        return outcome.exit_code;
    } catch (const psd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pure shape dynamics simulator"};
    app.require_subcommand(1);

    SimArgs geo, cls, qtm;
    auto* sim_geo = app.add_subcommand("simulate-geodesic", "integrate the geodesic equation of state");
    add_sim_options(sim_geo, geo, false);
    auto* sim_cls = app.add_subcommand("simulate-classical", "integrate the N-body equation of state");
    add_sim_options(sim_cls, cls, false);
    auto* sim_qtm = app.add_subcommand("simulate-quantum", "integrate the de Broglie-Bohm equation of state");
    add_sim_options(sim_qtm, qtm, true);

    std::string eph_manifest;
    long eph_anchor = 0;
    std::vector<long> eph_pair{0, -1};
    auto* eph = app.add_subcommand("ephemeris", "recompute emergent scale and duration for a run");
    eph->add_option("--run", eph_manifest, "manifest.json of a finished classical run")->required();
    eph->add_option("--anchor", eph_anchor, "sample index fixing log L = 0");
    eph->add_option("--anchor-pair", eph_pair, "two sample indices fixing the time unit")
        ->expected(2);

    std::string ana_manifest;
    bool ana_arrow = false, ana_subsystems = false;
    auto* ana = app.add_subcommand("analyze", "arrow-of-time and subsystem analyses for a run");
    ana->add_option("--run", ana_manifest, "manifest.json of a finished run")->required();
    ana->add_flag("--arrow", ana_arrow, "complexity arrow of time");
    ana->add_flag("--subsystems", ana_subsystems, "subsystem detection");

    std::string born_config, born_output;
    std::vector<std::string> born_overrides;
    auto* born = app.add_subcommand("born-test", "Born-rule equivariance test on the reduced chart");
    born->add_option("--config", born_config, "configuration file")->required();
    born->add_option("--output", born_output, "output directory");
    born->add_option("--set", born_overrides, "override a config key, key=value");

    std::string cmp_a, cmp_b, cmp_report;
    psd::CompareTolerances cmp_tol;
    auto* cmp = app.add_subcommand("compare", "parametrization-free comparison of two runs");
    cmp->add_option("--a", cmp_a, "first manifest.json")->required();
    cmp->add_option("--b", cmp_b, "second manifest.json")->required();
    cmp->add_option("--tol-curve", cmp_tol.curve, "curve Hausdorff tolerance");
    cmp->add_option("--tol-ephemeris", cmp_tol.ephemeris, "ephemeris relative tolerance");
    cmp->add_option("--report", cmp_report, "write the comparison report JSON here");

    std::string ens_config, ens_output;
    std::vector<std::string> ens_overrides;
    int ens_size = 0, ens_threads = 0;
    auto* ens = app.add_subcommand("ensemble", "fan out independent runs with per-member seeds");
    ens->add_option("--config", ens_config, "configuration file")->required();
    ens->add_option("--size", ens_size, "number of members")->required();
    ens->add_option("--threads", ens_threads, "worker threads (default PSD_THREADS or hardware)");
    ens->add_option("--output", ens_output, "output directory");
    ens->add_option("--set", ens_overrides, "override a config key, key=value");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_geo->parsed()) return dispatch_sim(geo, "geodesic");
        if (sim_cls->parsed()) return dispatch_sim(cls, "classical");
        if (sim_qtm->parsed()) return dispatch_sim(qtm, "quantum");
        if (eph->parsed())
            return psd::ephemeris_command(eph_manifest, eph_anchor, eph_pair[0], eph_pair[1]);
        if (ana->parsed()) return psd::analyze_command(ana_manifest, ana_arrow, ana_subsystems);
        if (born->parsed()) {
            psd::KeyValueConfig cfg = load_config(born_config, born_overrides);
            std::optional<std::filesystem::path> out;
            if (!born_output.empty()) out = born_output;
            return psd::run_born(cfg, out).exit_code;
        }
        if (cmp->parsed()) {
            std::optional<std::filesystem::path> report;
            if (!cmp_report.empty()) report = cmp_report;
            const psd::CompareReport rep = psd::compare_runs(cmp_a, cmp_b, cmp_tol, report);
            std::cout << "hausdorff a->b = " << rep.hausdorff_ab
                      << ", b->a = " << rep.hausdorff_ba;
            if (rep.has_ephemeris)
                std::cout << ", ephemeris scale rel = " << rep.ephemeris_scale_rel
                          << ", time rel = " << rep.ephemeris_time_rel;
            std::cout << (rep.pass ? " [pass]" : " [fail]") << "\n";
            return rep.pass ? 0 : 1;
        }
        if (ens->parsed()) {
            psd::KeyValueConfig cfg = load_config(ens_config, ens_overrides);
            std::optional<std::filesystem::path> out;
            if (!ens_output.empty()) out = ens_output;
            return psd::run_ensemble(cfg, ens_size, ens_threads, out);
        }
    } catch (const psd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const psd::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
