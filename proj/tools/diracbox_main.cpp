// Command-line front end: run scenarios, inspect presets, validate configs
// and cross-check the spectral evolution against the grid stepper.

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "diracbox/diracbox.hpp"
#include "diracbox/grid_oracle.hpp"

namespace {

using namespace diracbox;

RunConfig resolve_config(const std::string& config_path, const std::string& preset_name,
                         std::string& used_preset) {
    if (config_path.empty() == preset_name.empty())
        throw ConfigError("exactly one of --config or --preset is required");
    if (!config_path.empty()) return parse_config_file(config_path);
    const ScenarioPreset* p = find_preset(preset_name);
    if (!p) throw ConfigError("unknown preset '" + preset_name + "' (see list-presets)");
    used_preset = p->name;
    return p->cfg;
}

void apply_overrides(RunConfig& cfg, int nmax, long long kicks) {
    if (nmax > 0) cfg.n_max = nmax;
    if (kicks > 0) cfg.n_kicks = kicks;
    if (cfg.n_kicks % cfg.stride != 0) cfg.stride = 1; // keep the reporting grid valid
    if (!cfg.initial_packet && cfg.initial_mode > cfg.n_max) cfg.initial_mode = 1;
    for (auto it = cfg.density_times.begin(); it != cfg.density_times.end();)
        it = (*it > cfg.n_kicks * cfg.T) ? cfg.density_times.erase(it) : it + 1;
}

int cmd_simulate(const std::string& config_path, const std::string& preset_name,
                 const std::string& out_dir, int nmax, long long kicks,
                 const std::string& kick_cache) {
    RunOptions opts;
    RunConfig cfg = resolve_config(config_path, preset_name, opts.preset_name);
    apply_overrides(cfg, nmax, kicks);
    opts.out_dir = out_dir;
    opts.kick_cache = kick_cache;

    RunResult res = run_scenario(cfg, opts);
    for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("wrote %s/series.csv (%zu rows)\n", res.out_dir.c_str(), res.series.size());
    std::printf("final: t=%.6g  E_kin=%.10g  E_total=%.10g  norm=%.12g\n", res.series.time.back(),
                res.series.e_kin.back(), res.series.e_total.back(), res.series.norm.back());
    std::printf("max per-kick leakage: %.3e\n", res.max_step_leakage);
    if (res.regime)
        std::printf("regime: %s (slope=%.3e, residual_ratio=%.3f, autocorr_peak=%.3f)\n",
                    regime_name(res.regime->tag), res.regime->slope, res.regime->residual_ratio,
                    res.regime->autocorr_peak);
    return 0;
}

int cmd_list_presets() {
    std::printf("%-14s %-9s %-8s %-8s %-7s %-6s %-9s %s\n", "name", "epsilon", "lambda", "T",
                "kicks", "n_max", "initial", "expected");
    for (const auto& p : preset_table()) {
        std::string initial = p.cfg.initial_packet
                                  ? "packet"
                                  : "mode:" + std::to_string(p.cfg.initial_mode);
        std::printf("%-14s %-9g %-8g %-8g %-7lld %-6d %-9s %s\n", p.name.c_str(), p.cfg.epsilon,
                    p.cfg.lambda, p.cfg.T, p.cfg.n_kicks, p.cfg.n_max, initial.c_str(),
                    p.tag.c_str());
    }
    return 0;
}

int cmd_validate(const std::string& config_path) {
    RunConfig cfg = parse_config_file(config_path);
    std::printf("OK: %s\n# resolved configuration\n%s", config_path.c_str(),
                serialize_config(cfg).c_str());
    return 0;
}

int cmd_oracle_check(const std::string& preset_name, long long kicks, int nmax, int grid,
                     int substeps, const std::string& out_dir) {
    const ScenarioPreset* p = find_preset(preset_name);
    if (!p) throw ConfigError("unknown preset '" + preset_name + "' (see list-presets)");
    RunConfig cfg = p->cfg;
    apply_overrides(cfg, nmax, kicks);

    BoxBasis basis = build_basis(cfg.L, cfg.n_max);
    KickParams kp{cfg.epsilon, cfg.lambda, cfg.T, cfg.kick_phase, cfg.bessel_tol};
    KickOperator op = build_kick_matrix_bessel(basis, kp);
    SpinorState initial = initial_state_from_config(basis, cfg);

    DualTrajectoryOptions dopts;
    dopts.n_grid = grid;
    dopts.substeps = substeps;
    dopts.order = cfg.order;
    DualTrajectoryResult res = run_dual_trajectory(basis, op, initial, cfg.n_kicks, dopts);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
    detail::write_text_file(out_dir + "/oracle.csv", [&](std::ofstream& out) {
        out << "time,l2_distance,grid_norm,spectral_norm\n";
        char buf[160];
        for (const auto& r : res.rows) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.time, r.l2_distance,
                          r.grid_norm, r.spectral_norm);
            out << buf;
        }
    });

    const auto& last = res.rows.back();
    double max_l2 = 0.0, max_oos = 0.0;
    for (const auto& r : res.rows) {
        max_l2 = std::max(max_l2, r.l2_distance);
        max_oos = std::max(max_oos, r.out_of_span);
    }
    std::printf("wrote %s/oracle.csv (%zu rows)\n", out_dir.c_str(), res.rows.size());
    std::printf("n_max=%d  n_grid=%d  substeps=%d  kicks=%lld\n", cfg.n_max,
                dopts.n_grid > 0 ? dopts.n_grid : 8 * cfg.n_max, substeps, cfg.n_kicks);
    std::printf("final: l2_distance=%.3e  grid_norm=%.12g  spectral_norm=%.12g\n",
                last.l2_distance, last.grid_norm, last.spectral_norm);
    std::printf("max l2_distance=%.3e  max out-of-span grid weight=%.3e  spectral leakage=%.3e\n",
                max_l2, max_oos, 1.0 - last.spectral_norm * last.spectral_norm);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral simulator for a kicked relativistic particle in a box"};
    app.set_version_flag("--version", DIRACBOX_VERSION);
    app.require_subcommand(1);

    std::string config_path, preset_name, out_dir, kick_cache;
    int nmax = 0, grid = 0, substeps = 32;
    long long kicks = 0;

    CLI::App* sim = app.add_subcommand("simulate", "run a scenario and write CSV outputs");
    sim->add_option("--config", config_path, "config file (key = value lines)");
    sim->add_option("--preset", preset_name, "preset name from list-presets");
    sim->add_option("--out", out_dir, "output directory (overrides config)");
    sim->add_option("--nmax", nmax, "override the mode count");
    sim->add_option("--kicks", kicks, "override the kick count");
    sim->add_option("--kick-cache", kick_cache, "binary kick-matrix cache file");

    app.add_subcommand("list-presets", "print the preset table");

    CLI::App* val = app.add_subcommand("validate", "parse a config and print the resolved form");
    val->add_option("--config", config_path, "config file to validate")->required();

    CLI::App* ora = app.add_subcommand("oracle-check",
                                       "compare spectral evolution against the grid stepper");
    ora->add_option("--preset", preset_name, "preset supplying the scenario")->required();
    ora->add_option("--kicks", kicks, "number of kicks to cross-check")->required();
    ora->add_option("--nmax", nmax, "mode count for the comparison")->default_val(256);
    ora->add_option("--grid", grid, "grid nodes (default 8 * nmax)");
    ora->add_option("--substeps", substeps, "implicit-midpoint substeps per period");
    ora->add_option("--out", out_dir, "output directory")->default_val("oracle_out");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("simulate"))
            return cmd_simulate(config_path, preset_name, out_dir, nmax, kicks, kick_cache);
        if (app.got_subcommand("list-presets")) return cmd_list_presets();
        if (app.got_subcommand("validate")) return cmd_validate(config_path);
        if (app.got_subcommand("oracle-check"))
            return cmd_oracle_check(preset_name, kicks, nmax, grid, substeps, out_dir);
    } catch (const diracbox::NormFloorError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const diracbox::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const diracbox::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
