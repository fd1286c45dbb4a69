#include "aircal/config.hpp"
#include "aircal/csv.hpp"
#include "aircal/errors.hpp"
#include "aircal/eval.hpp"
#include "aircal/grid.hpp"
#include "aircal/ingest.hpp"
#include "aircal/preprocess.hpp"
#include "aircal/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

using namespace aircal;

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    std::string panel_path;
    std::string sites_path;
    std::string model_sel = "all";
    std::string kernel_override;
    double bandwidth_override = 0.0;
    bool bandwidth_search_flag = false;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    int jobs = 1;
};

std::string out_dir(const PipelineConfig& cfg, const CommonArgs& args) {
    std::string dir = args.out_override.empty() ? cfg.output_dir : args.out_override;
    std::filesystem::create_directories(dir);
    return dir;
}

/// Flag > config > default precedence for the kernel.
KernelSpec effective_kernel(const PipelineConfig& cfg, const CommonArgs& args) {
    KernelSpec kernel = cfg.kernel;
    if (!args.kernel_override.empty()) {
        auto kind = kernel_kind_from_name(args.kernel_override);
        if (!kind) throw ConfigError("--kernel must be gaussian or gtwr");
        kernel.kind = *kind;
    }
    if (args.bandwidth_override > 0.0) kernel.bandwidth_m = args.bandwidth_override;
    return kernel;
}

std::vector<ModelKind> selected_kinds(const std::string& sel) {
    if (sel == "all") {
        return {ModelKind::collocated, ModelKind::noncollocated, ModelKind::gwr, ModelKind::sgwr};
    }
    auto kind = model_kind_from_name(sel);
    if (!kind) throw ConfigError("--model must be c, nc, gwr, sgwr or all");
    return {*kind};
}

Panel load_panel_for(const PipelineConfig& cfg, const CommonArgs& args) {
    std::string dir = args.out_override.empty() ? cfg.output_dir : args.out_override;
    std::string panel = args.panel_path.empty() ? dir + "/panel.csv" : args.panel_path;
    std::string sites = args.sites_path;
    if (sites.empty()) {
        sites = std::filesystem::path(panel).parent_path().string();
        sites = sites.empty() ? "sites.csv" : sites + "/sites.csv";
    }
    return read_panel(panel, sites);
}

DaySplit require_split(const PipelineConfig& cfg) {
    if (!cfg.split) throw ConfigError("this command needs a 'split' section in the config");
    return split_days(*cfg.split);
}

void validate_model_against_panel(const PipelineConfig& cfg) {
    // Model covariates must name sensor channels the panel can actually
    // carry; the reference channel is rejected at config parse time already.
    for (Channel c : cfg.model.covariates) {
        if (c == Channel::ref_no2) throw ConfigError("reference channel in covariates");
    }
}

int cmd_ingest(const PipelineConfig& cfg, const CommonArgs& args,
               const std::vector<std::string>& raw_paths) {
    if (!cfg.ingest) throw ConfigError("ingest command needs an 'ingest' config section");
    const IngestConfig& icfg = *cfg.ingest;

    std::vector<SiteRecord> sites =
        load_site_inputs(icfg.sites_file, cfg.projection_origin, cfg.bounding_box);

    std::vector<RawRecord> records;
    LoadReport load;
    for (const auto& path : raw_paths) {
        auto part = load_raw(path, icfg.schema, load);
        records.insert(records.end(), part.begin(), part.end());
    }
    std::printf("loaded %lld rows, %lld skipped, %lld records\n", load.rows_read,
                load.rows_skipped, load.records_emitted);

    FlagReport flags;
    records = apply_flags(std::move(records), icfg.bad_flags, flags);
    std::printf("flag filter removed %lld records\n", flags.removed_total);
    for (const auto& [device, n] : flags.removed_per_device) {
        std::printf("  %-12s %lld\n", device.c_str(), n);
    }

    records = rename_devices(std::move(records), icfg.rename, icfg.reference_devices);
    if (icfg.ref_is_ppb) {
        records = convert_reference_units(std::move(records), icfg.fallback_pressure_pa,
                                          icfg.fallback_temperature_k);
        std::printf("reference channel converted from ppb\n");
    }

    AggregationStats qstats, hstats;
    auto quarters = minutes_to_quarters(records, qstats);
    std::printf("quarter-hours: %lld kept, %lld below the 12-minute rule\n",
                qstats.periods_emitted, qstats.periods_dropped);
    auto hourly = quarters_to_hours(quarters, hstats);
    std::printf("hours: %lld kept, %lld below the 3-quarter rule\n", hstats.periods_emitted,
                hstats.periods_dropped);

    PanelBuildStats pstats;
    Panel panel = build_panel(hourly, std::move(sites), pstats);
    std::printf("panel cells per site (complete / dropped):\n");
    for (const auto& s : panel.sites()) {
        std::printf("  %-12s %6d / %d\n", s.id.c_str(), pstats.cells_complete[s.id],
                    pstats.cells_dropped[s.id]);
    }

    std::string dir = out_dir(cfg, args);
    write_panel(dir + "/panel.csv", panel);
    write_sites(dir + "/sites.csv", panel.sites());
    std::printf("wrote %s/panel.csv and %s/sites.csv\n", dir.c_str(), dir.c_str());
    return 0;
}

void report_fit_failures(const std::vector<LocalFit>& fits) {
    for (const auto& f : fits) {
        if (!f.ok()) std::fprintf(stderr, "warning: singular fit: %s\n", f.error.c_str());
    }
}

std::vector<LocalModel> collect_models(const std::vector<LocalFit>& fits) {
    std::vector<LocalModel> models;
    for (const auto& f : fits) {
        if (f.ok()) models.push_back(*f.model);
    }
    return models;
}

int cmd_fit(const PipelineConfig& cfg, const CommonArgs& args) {
    validate_model_against_panel(cfg);
    Panel panel = load_panel_for(cfg, args);
    DaySplit split = require_split(cfg);
    KernelSpec kernel = effective_kernel(cfg, args);
    std::string dir = out_dir(cfg, args);

    std::vector<int> s0 = panel.hour_indices_in_days(split.s0);
    std::vector<int> s1 = panel.hour_indices_in_days(split.s1);
    std::vector<int> stations = panel.sites_with_role(SiteRole::collocated_sensor);
    std::vector<int> sensors = panel.sensor_sites();
    if (stations.empty()) throw DataError("panel has no collocated stations to fit from");

    // Fail before fitting when the panel holds no usable fit rows at all.
    if (collect_design(panel, cfg.model, stations, s1).n_rows() == 0) {
        throw DataError("no complete fitting rows: check reference data and covariates");
    }

    PairingPlan plan = default_pairing(panel, cfg.pairing_overrides);

    for (ModelKind kind : selected_kinds(args.model_sel)) {
        std::vector<LocalFit> fits;
        std::string name;
        switch (kind) {
        case ModelKind::collocated: {
            name = "collocated";
            for (int s : stations) {
                LocalFit f;
                try {
                    f.model = fit_collocated(panel, cfg.model, s, s0, cfg.wls);
                } catch (const std::exception& e) {
                    f.error = std::string(panel.sites()[s].id) + ": " + e.what();
                }
                fits.push_back(std::move(f));
            }
            break;
        }
        case ModelKind::noncollocated: {
            name = "noncollocated";
            for (int s : sensors) {
                LocalFit f;
                try {
                    f.model = fit_noncollocated(panel, cfg.model, s, plan, s0, cfg.wls);
                } catch (const std::exception& e) {
                    f.error = std::string(panel.sites()[s].id) + ": " + e.what();
                }
                fits.push_back(std::move(f));
            }
            break;
        }
        case ModelKind::gwr: {
            name = "gwr";
            std::vector<GwrTarget> targets;
            for (int s : sensors) {
                const SiteRecord& rec = panel.sites()[s];
                if (kernel.kind == KernelSpec::Kind::gtwr) {
                    for (int h = 0; h < 24; ++h) targets.push_back({rec.id, rec.position, h});
                } else {
                    targets.push_back({rec.id, rec.position, std::nullopt});
                }
            }
            fits = fit_gwr(panel, cfg.model, targets, kernel, stations, s1, cfg.wls, args.jobs);
            break;
        }
        case ModelKind::sgwr: {
            name = "sgwr";
            if (kernel.kind == KernelSpec::Kind::gtwr) {
                throw ConfigError("sgwr fitting uses the gaussian kernel in this pipeline");
            }
            fits = fit_sgwr(panel, cfg.model, sensors, kernel, stations, s1, cfg.wls, args.jobs);
            break;
        }
        }
        report_fit_failures(fits);
        std::string path = dir + "/models_" + name + ".csv";
        write_models(path, collect_models(fits));
        std::printf("wrote %s (%zu models)\n", path.c_str(), collect_models(fits).size());
    }
    return 0;
}

int cmd_validate(const PipelineConfig& cfg, const CommonArgs& args) {
    validate_model_against_panel(cfg);
    Panel panel = load_panel_for(cfg, args);
    KernelSpec kernel = effective_kernel(cfg, args);
    std::string dir = out_dir(cfg, args);

    EvalReport report;
    report.split_spec = *([&]() -> const SplitSpec* {
        if (!cfg.split) throw ConfigError("validate needs a 'split' section in the config");
        return &*cfg.split;
    })();
    report.split = split_days(*cfg.split);
    report.kernel = kernel;
    report.pairing = default_pairing(panel, cfg.pairing_overrides);

    std::vector<ModelKind> kinds = selected_kinds(args.model_sel);
    report.scores = score_models(panel, cfg.model, kernel, report.split, report.pairing, kinds,
                                 cfg.wls, args.jobs);
    write_scores_csv(dir + "/scores.csv", report.scores);

    for (ModelKind kind : kinds) {
        if (kind != ModelKind::gwr && kind != ModelKind::sgwr) continue;
        LoocvOutcome cv = loocv(panel, cfg.model, kernel, kind, report.split, cfg.wls, args.jobs);
        int skipped = 0;
        auto hourly = rmse_by_hour(cv.predictions,
                                   static_cast<int>(cv.folds.size()) - cv.failed_folds, &skipped);
        std::string kname(model_kind_name(kind));
        write_folds_csv(dir + "/cv_folds_" + kname + ".csv", cv.folds);
        write_hourly_csv(dir + "/rmse_by_hour_" + kname + ".csv", hourly);
        std::printf("%s: CV RMSE = %.4f over %zu folds (%d failed)\n", kname.c_str(), cv.cv_rmse,
                    cv.folds.size(), cv.failed_folds);
        report.cv_model = kname;
        report.cv = std::move(cv);
        report.hourly = std::move(hourly);
        report.hourly_skipped = skipped;
    }

    if (args.bandwidth_search_flag) {
        ModelKind search_kind = ModelKind::sgwr;
        if (kinds.size() == 1 && kinds.front() == ModelKind::gwr) search_kind = ModelKind::gwr;
        auto candidates = cfg.bandwidth_grid.candidates();
        BandwidthCurve curve = bandwidth_search(panel, cfg.model, kernel.kind, search_kind,
                                                candidates, report.split, cfg.wls, args.jobs);
        write_curve_csv(dir + "/bandwidth_curve.csv", curve);
        std::printf("bandwidth search: best B = %.0f m, CV RMSE = %.4f\n",
                    curve.best_bandwidth_m, curve.best_cv_rmse);
    }

    write_pairing_csv(dir + "/pairing.csv", report.pairing);
    write_report_txt(dir + "/report.txt", report);
    std::printf("wrote %s/report.txt\n", dir.c_str());
    return 0;
}

int cmd_grid(const PipelineConfig& cfg, const CommonArgs& args) {
    if (!cfg.grid) throw ConfigError("grid command needs a 'grid' config section");
    Panel panel = load_panel_for(cfg, args);
    DaySplit split = require_split(cfg);
    KernelSpec kernel = effective_kernel(cfg, args);
    std::string dir = out_dir(cfg, args);

    ModelKind kind = ModelKind::sgwr;
    if (args.model_sel != "all") {
        auto k = model_kind_from_name(args.model_sel);
        if (!k || (*k != ModelKind::gwr && *k != ModelKind::sgwr)) {
            throw ConfigError("grid supports --model gwr or sgwr");
        }
        kind = *k;
    }

    SurfaceResult surfaces =
        coefficient_surface(panel, cfg.model, kernel, kind, *cfg.grid,
                            panel.hour_indices_in_days(split.s1), cfg.wls, args.jobs);
    std::vector<std::string> written;
    if (cfg.grid_format == "delimited" || cfg.grid_format == "both") {
        auto w = export_layers(surfaces, dir, LayerFormat::delimited_grid);
        written.insert(written.end(), w.begin(), w.end());
    }
    if (cfg.grid_format == "geojson" || cfg.grid_format == "both") {
        auto w = export_layers(surfaces, dir, LayerFormat::geojson_points);
        written.insert(written.end(), w.begin(), w.end());
    }
    for (const auto& path : written) std::printf("wrote %s\n", path.c_str());
    std::printf("no-data fraction: %.4f\n", surfaces.nodata_fraction());
    return 0;
}

int cmd_synth(const PipelineConfig& cfg, const CommonArgs& args) {
    if (!cfg.synth) throw ConfigError("synth command needs a 'synth' config section");
    std::uint64_t seed = args.seed_given ? args.seed_override : cfg.synth_seed;
    SynthResult result = generate(*cfg.synth, seed);
    std::string dir = out_dir(cfg, args);
    write_panel(dir + "/panel.csv", result.panel);
    write_sites(dir + "/sites.csv", result.panel.sites());
    write_truth(dir + "/truth.csv", result);
    std::printf("wrote synthetic panel: %d sites x %d hours (seed %llu)\n",
                result.panel.n_sites(), result.panel.n_hours(),
                static_cast<unsigned long long>(seed));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GWR/SGWR calibration pipeline for low-cost air-quality sensor networks"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonArgs args;
    std::vector<std::string> raw_paths;
    app.add_option("--config", args.config_path, "pipeline config file (JSON)")->required();
    app.add_option("--jobs", args.jobs, "parallel worker cap")->check(CLI::PositiveNumber);
    app.add_option("--out", args.out_override, "output directory (overrides config)");

    auto* ingest = app.add_subcommand("ingest", "raw minute files -> hourly panel");
    ingest->add_option("raw", raw_paths, "raw delimited files")->required();

    auto* fit = app.add_subcommand("fit", "fit calibration models, write model tables");
    auto* validate = app.add_subcommand("validate", "split, score, cross-validate");
    auto* grid = app.add_subcommand("grid", "evaluate coefficient surfaces on a grid");
    auto* synth = app.add_subcommand("synth", "generate a synthetic panel");
    synth->add_option("--seed", args.seed_override, "generator seed (overrides config)")
        ->each([&](const std::string&) { args.seed_given = true; });

    for (CLI::App* cmd : {fit, validate, grid}) {
        cmd->add_option("--panel", args.panel_path, "panel table path");
        cmd->add_option("--sites", args.sites_path, "site registry path");
        cmd->add_option("--model", args.model_sel, "c|nc|gwr|sgwr|all");
        cmd->add_option("--kernel", args.kernel_override, "gaussian|gtwr");
        cmd->add_option("--bandwidth", args.bandwidth_override, "kernel bandwidth in meters");
    }
    validate->add_flag("--bandwidth-search", args.bandwidth_search_flag,
                       "run the bandwidth grid search");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        PipelineConfig cfg = load_config(args.config_path);
        if (ingest->parsed()) return cmd_ingest(cfg, args, raw_paths);
        if (fit->parsed()) return cmd_fit(cfg, args);
        if (validate->parsed()) return cmd_validate(cfg, args);
        if (grid->parsed()) return cmd_grid(cfg, args);
        if (synth->parsed()) return cmd_synth(cfg, args);
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
