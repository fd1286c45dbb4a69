#include "aircal/eval.hpp"

#include "aircal/csv.hpp"
#include "aircal/errors.hpp"
#include "aircal/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace aircal {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<DayStamp> sorted_unique(std::vector<DayStamp> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}
} // namespace

DaySplit split_days(const SplitSpec& spec) {
    if (spec.end_day < spec.start_day) throw ConfigError("split period is empty");
    const auto n = spec.end_day - spec.start_day + 1;

    DaySplit out;
    if (spec.explicit_s0 || spec.explicit_s1 || spec.explicit_s2) {
        if (!(spec.explicit_s0 && spec.explicit_s1 && spec.explicit_s2)) {
            throw ConfigError("explicit split calendars must define S0, S1 and S2 together");
        }
        out.s0 = sorted_unique(*spec.explicit_s0);
        out.s1 = sorted_unique(*spec.explicit_s1);
        out.s2 = sorted_unique(*spec.explicit_s2);
        std::vector<DayStamp> all;
        for (const auto* v : {&out.s0, &out.s1, &out.s2}) {
            all.insert(all.end(), v->begin(), v->end());
        }
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
            throw ConfigError("explicit split calendars overlap");
        }
        if (static_cast<DayStamp>(all.size()) != n || all.front() != spec.start_day ||
            all.back() != spec.end_day) {
            throw ConfigError("explicit split calendars do not partition the period");
        }
    } else {
        if (spec.s0_stride < 2) throw ConfigError("s0 stride must be at least 2");
        for (DayStamp day = spec.start_day; day <= spec.end_day; ++day) {
            const auto d = day - spec.start_day;
            if (d % spec.s0_stride == 0) {
                out.s0.push_back(day);
            } else if (d % 3 == 0 || d % 3 == 1) {
                out.s1.push_back(day);
            } else {
                out.s2.push_back(day);
            }
        }
    }
    out.frac0 = 100.0 * static_cast<double>(out.s0.size()) / static_cast<double>(n);
    out.frac1 = 100.0 * static_cast<double>(out.s1.size()) / static_cast<double>(n);
    out.frac2 = 100.0 * static_cast<double>(out.s2.size()) / static_cast<double>(n);
    return out;
}

double rmse(std::span<const double> predicted, std::span<const double> reference) {
    if (predicted.size() != reference.size()) throw NumericalError("rmse: length mismatch");
    if (predicted.empty()) throw DataError("rmse: empty overlap");
    double ss = 0.0;
    for (size_t i = 0; i < predicted.size(); ++i) {
        double e = predicted[i] - reference[i];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(predicted.size()));
}

double explained_variance_pct(std::span<const double> predicted,
                              std::span<const double> reference) {
    if (predicted.size() != reference.size()) throw NumericalError("ev: length mismatch");
    if (predicted.empty()) throw DataError("ev: empty overlap");
    double mean = 0.0;
    for (double r : reference) mean += r;
    mean /= static_cast<double>(reference.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (size_t i = 0; i < predicted.size(); ++i) {
        ss_res += (reference[i] - predicted[i]) * (reference[i] - predicted[i]);
        ss_tot += (reference[i] - mean) * (reference[i] - mean);
    }
    if (!(ss_tot > 0.0)) throw DataError("ev: reference series has zero variance");
    return 100.0 * (1.0 - ss_res / ss_tot);
}

int negative_count(std::span<const double> values) {
    int n = 0;
    for (double v : values) {
        if (v < 0.0) ++n;
    }
    return n;
}

std::string_view model_kind_name(ModelKind k) {
    switch (k) {
    case ModelKind::collocated: return "collocated";
    case ModelKind::noncollocated: return "noncollocated";
    case ModelKind::gwr: return "gwr";
    case ModelKind::sgwr: return "sgwr";
    }
    return "gwr";
}

std::optional<ModelKind> model_kind_from_name(std::string_view name) {
    if (name == "collocated" || name == "c") return ModelKind::collocated;
    if (name == "noncollocated" || name == "nc") return ModelKind::noncollocated;
    if (name == "gwr") return ModelKind::gwr;
    if (name == "sgwr") return ModelKind::sgwr;
    return std::nullopt;
}

namespace {

/// Fit one model family at one sensor target from the given fit sites and
/// hours. For gtwr kernels this returns 24 hourly models.
std::vector<LocalFit> fit_family_at(const Panel& panel, const ModelSpec& spec,
                                    const KernelSpec& kernel, ModelKind kind, int target_site,
                                    const std::vector<int>& fit_sites,
                                    const std::vector<int>& fit_hours,
                                    const WlsOptions& options) {
    const SiteRecord& site = panel.sites()[target_site];
    std::vector<GwrTarget> targets;
    if (kernel.kind == KernelSpec::Kind::gtwr) {
        for (int h = 0; h < 24; ++h) targets.push_back({site.id, site.position, h});
    } else {
        targets.push_back({site.id, site.position, std::nullopt});
    }
    if (kind == ModelKind::gwr) {
        return fit_gwr(panel, spec, targets, kernel, fit_sites, fit_hours, options, 1);
    }
    if (kind == ModelKind::sgwr) {
        auto [std_panel, stats] = standardize(panel, spec, fit_hours);
        std::vector<LocalFit> fits =
            fit_gwr(std_panel, spec, targets, kernel, fit_sites, fit_hours, options, 1);
        for (auto& f : fits) {
            if (!f.ok()) continue;
            try {
                f.model = destandardize(*f.model, stats, target_site, site.id);
            } catch (const DataError& e) {
                f.model.reset();
                f.error = e.what();
            }
        }
        return fits;
    }
    throw NumericalError("fit_family_at handles gwr/sgwr only");
}

/// Model lookup per hour of day: index 0 for non-gtwr fits.
const LocalFit& fit_for_hour(const std::vector<LocalFit>& fits, const KernelSpec& kernel,
                             HourStamp hour) {
    if (kernel.kind == KernelSpec::Kind::gtwr) {
        return fits[static_cast<size_t>(hour_of_day(hour))];
    }
    return fits.front();
}

} // namespace

LoocvOutcome loocv_core(const Panel& panel, const ModelSpec& spec, const KernelSpec& kernel,
                        ModelKind kind, const std::vector<int>& fit_hours,
                        const std::vector<int>& test_hours, const WlsOptions& options,
                        int jobs) {
    if (kind != ModelKind::gwr && kind != ModelKind::sgwr) {
        throw ConfigError("LOOCV applies to gwr/sgwr models");
    }
    std::vector<int> stations = panel.sites_with_role(SiteRole::collocated_sensor);
    if (stations.size() < 2) {
        throw DataError("LOOCV needs at least 2 collocated stations, found " +
                        std::to_string(stations.size()));
    }

    // Standardization is per site, so one pass serves every fold: excluding a
    // station never changes the other stations' statistics, and the held-out
    // sensor is standardized by its own fitting-period statistics.
    std::optional<Panel> std_panel;
    std::optional<Standardizer> stats;
    if (kind == ModelKind::sgwr) {
        auto pair = standardize(panel, spec, fit_hours);
        std_panel.emplace(std::move(pair.first));
        stats.emplace(std::move(pair.second));
    }
    const Panel& fit_panel = std_panel ? *std_panel : panel;

    LoocvOutcome out;
    out.folds.resize(stations.size());
    std::vector<std::vector<CvPrediction>> fold_preds(stations.size());

    parallel_for(static_cast<int>(stations.size()), jobs, [&](int i) {
        int held = stations[static_cast<size_t>(i)];
        const SiteRecord& site = panel.sites()[held];
        FoldResult& fold = out.folds[static_cast<size_t>(i)];
        fold.site = site.id;
        try {
            std::vector<int> fit_sites;
            for (int s : stations) {
                if (s != held) fit_sites.push_back(s);
            }
            std::vector<GwrTarget> targets;
            if (kernel.kind == KernelSpec::Kind::gtwr) {
                for (int h = 0; h < 24; ++h) targets.push_back({site.id, site.position, h});
            } else {
                targets.push_back({site.id, site.position, std::nullopt});
            }
            std::vector<LocalFit> fits =
                fit_gwr(fit_panel, spec, targets, kernel, fit_sites, fit_hours, options, 1);
            for (const auto& f : fits) {
                if (!f.ok()) throw SingularFitError(f.error, f.condition);
            }

            auto ref_site = panel.paired_reference(held);
            if (!ref_site) throw DataError("station fold without paired reference: " + site.id);

            std::vector<double> preds, refs;
            for (int h : test_hours) {
                const TimedSample* sensor = fit_panel.cell(held, h);
                const TimedSample* station = panel.cell(*ref_site, h);
                if (!sensor || !station || !(*station)[Channel::ref_no2]) continue;
                const LocalFit& f = fit_for_hour(fits, kernel, panel.hours()[h]);
                double pred = correct(*f.model, *sensor);
                preds.push_back(pred);
                refs.push_back(*(*station)[Channel::ref_no2]);
                fold_preds[static_cast<size_t>(i)].push_back(
                    CvPrediction{held, panel.hours()[h], pred, refs.back()});
            }
            if (preds.empty()) throw DataError("no test rows for station " + site.id);
            fold.rmse = rmse(preds, refs);
            fold.ev_pct = explained_variance_pct(preds, refs);
            fold.n = static_cast<int>(preds.size());
            fold.negatives = negative_count(preds);
            // Report the raw-space model for the held-out site.
            const LocalModel& first = *fits.front().model;
            fold.model = (kind == ModelKind::sgwr)
                             ? destandardize(first, *stats, held, site.id)
                             : first;
            fold.ok = true;
        } catch (const std::exception& e) {
            fold.ok = false;
            fold.error = e.what();
        }
    });

    double sum = 0.0;
    int n_ok = 0;
    for (size_t i = 0; i < out.folds.size(); ++i) {
        if (out.folds[i].ok) {
            sum += out.folds[i].rmse;
            ++n_ok;
            out.predictions.insert(out.predictions.end(), fold_preds[i].begin(),
                                   fold_preds[i].end());
        } else {
            ++out.failed_folds;
        }
    }
    out.cv_rmse = n_ok ? sum / n_ok : kNaN;
    return out;
}

LoocvOutcome loocv(const Panel& panel, const ModelSpec& spec, const KernelSpec& kernel,
                   ModelKind kind, const DaySplit& split, const WlsOptions& options, int jobs) {
    return loocv_core(panel, spec, kernel, kind, panel.hour_indices_in_days(split.s1),
                      panel.hour_indices_in_days(split.s2), options, jobs);
}

std::vector<HourlyRmse> rmse_by_hour(std::span<const CvPrediction> predictions,
                                     int expected_sites, int* skipped) {
    std::map<HourStamp, std::vector<double>> sq_errors;
    for (const auto& p : predictions) {
        double e = p.reference - p.predicted;
        sq_errors[p.hour].push_back(e * e);
    }
    std::vector<HourlyRmse> out;
    int skipped_count = 0;
    for (const auto& [hour, errors] : sq_errors) {
        if (static_cast<int>(errors.size()) < expected_sites) {
            ++skipped_count;
            continue;
        }
        double mean = 0.0;
        for (double e : errors) mean += e;
        mean /= static_cast<double>(errors.size());
        out.push_back(HourlyRmse{hour, hour_of_day(hour), std::sqrt(mean),
                                 static_cast<int>(errors.size())});
    }
    if (skipped) *skipped = skipped_count;
    return out;
}

std::vector<SensorScore> score_models(const Panel& panel, const ModelSpec& spec,
                                      const KernelSpec& kernel, const DaySplit& split,
                                      const PairingPlan& plan,
                                      const std::vector<ModelKind>& kinds,
                                      const WlsOptions& options, int jobs) {
    std::vector<int> s0_hours = panel.hour_indices_in_days(split.s0);
    std::vector<int> s1_hours = panel.hour_indices_in_days(split.s1);
    std::vector<int> s2_hours = panel.hour_indices_in_days(split.s2);
    std::vector<int> stations = panel.sites_with_role(SiteRole::collocated_sensor);
    std::vector<int> sensors = panel.sensor_sites();

    struct Task {
        int site;
        ModelKind kind;
    };
    std::vector<Task> tasks;
    for (ModelKind kind : kinds) {
        for (int s : sensors) {
            bool is_station = panel.sites()[s].role == SiteRole::collocated_sensor;
            // Pointwise baselines need a reference response to regress on;
            // the collocated one additionally needs a cohosted station.
            if (kind == ModelKind::collocated && !is_station) continue;
            tasks.push_back({s, kind});
        }
    }

    std::vector<SensorScore> scores(tasks.size());
    parallel_for(static_cast<int>(tasks.size()), jobs, [&](int ti) {
        const Task& task = tasks[static_cast<size_t>(ti)];
        const SiteRecord& site = panel.sites()[task.site];
        SensorScore& score = scores[static_cast<size_t>(ti)];
        score.sensor = site.id;
        score.model = model_kind_name(task.kind);
        try {
            // Correction path: hourly models for gtwr, one model otherwise.
            // SGWR fits come back de-standardized, so every family corrects
            // raw samples directly.
            std::vector<LocalFit> fits;
            switch (task.kind) {
            case ModelKind::collocated: {
                LocalFit f;
                f.model = fit_collocated(panel, spec, task.site, s0_hours, options);
                fits.push_back(std::move(f));
                break;
            }
            case ModelKind::noncollocated: {
                LocalFit f;
                f.model = fit_noncollocated(panel, spec, task.site, plan, s0_hours, options);
                fits.push_back(std::move(f));
                break;
            }
            case ModelKind::gwr:
            case ModelKind::sgwr:
                fits = fit_family_at(panel, spec, kernel, task.kind, task.site, stations,
                                     s1_hours, options);
                break;
            }
            for (const auto& f : fits) {
                if (!f.ok()) throw SingularFitError(f.error, f.condition);
            }

            auto ref_site = panel.paired_reference(task.site);
            std::vector<double> preds, refs;
            for (int h : s2_hours) {
                const TimedSample* sensor = panel.cell(task.site, h);
                if (!sensor) continue;
                const LocalFit& f = fit_for_hour(fits, kernel, panel.hours()[h]);
                double pred = correct(*f.model, *sensor);
                if (ref_site) {
                    const TimedSample* station = panel.cell(*ref_site, h);
                    if (station && (*station)[Channel::ref_no2]) {
                        refs.push_back(*(*station)[Channel::ref_no2]);
                        preds.push_back(pred);
                        continue;
                    }
                }
                preds.push_back(pred);
                refs.push_back(kNaN);
            }
            std::vector<double> scored_p, scored_r;
            for (size_t i = 0; i < preds.size(); ++i) {
                if (!std::isnan(refs[i])) {
                    scored_p.push_back(preds[i]);
                    scored_r.push_back(refs[i]);
                }
            }
            score.n = static_cast<int>(preds.size());
            score.negatives = negative_count(preds);
            if (!scored_p.empty()) {
                score.rmse = rmse(scored_p, scored_r);
                score.ev_pct = explained_variance_pct(scored_p, scored_r);
                score.scored = true;
            }
        } catch (const std::exception& e) {
            score.error = e.what();
        }
    });
    return scores;
}

std::vector<double> default_bandwidth_grid() {
    std::vector<double> grid;
    for (double b = 200.0; b <= 5000.0 + 1e-9; b += 20.0) grid.push_back(b);
    return grid;
}

BandwidthCurve bandwidth_search(const Panel& panel, const ModelSpec& spec,
                                KernelSpec::Kind kernel_kind, ModelKind model_kind,
                                std::span<const double> candidates_m, const DaySplit& split,
                                const WlsOptions& options, int jobs) {
    if (candidates_m.empty()) throw ConfigError("bandwidth search needs candidates");
    std::vector<int> s1_hours = panel.hour_indices_in_days(split.s1);

    BandwidthCurve curve;
    curve.candidates_m.assign(candidates_m.begin(), candidates_m.end());
    curve.cv_rmse.assign(candidates_m.size(), kNaN);

    parallel_for(static_cast<int>(candidates_m.size()), jobs, [&](int i) {
        KernelSpec kernel{kernel_kind, candidates_m[static_cast<size_t>(i)]};
        // Scored on the learning period: fit and test folds both on S1 hours.
        LoocvOutcome outcome =
            loocv_core(panel, spec, kernel, model_kind, s1_hours, s1_hours, options, 1);
        if (outcome.failed_folds < static_cast<int>(outcome.folds.size())) {
            curve.cv_rmse[static_cast<size_t>(i)] = outcome.cv_rmse;
        }
    });

    int best = -1;
    for (size_t i = 0; i < curve.cv_rmse.size(); ++i) {
        if (std::isnan(curve.cv_rmse[i])) continue;
        if (best < 0 || curve.cv_rmse[i] < curve.cv_rmse[static_cast<size_t>(best)]) {
            best = static_cast<int>(i);
        }
    }
    if (best < 0) throw NumericalError("bandwidth search: every candidate failed");
    curve.best_bandwidth_m = curve.candidates_m[static_cast<size_t>(best)];
    curve.best_cv_rmse = curve.cv_rmse[static_cast<size_t>(best)];
    return curve;
}

namespace {
std::string fmt(double v, int digits = 6) {
    return std::isnan(v) ? std::string() : csv::format_double(v, digits);
}
} // namespace

void write_scores_csv(const std::string& path, const std::vector<SensorScore>& scores) {
    csv::Table t;
    t.header = {"sensor", "model", "rmse", "ev_pct", "n", "negatives", "error"};
    for (const auto& s : scores) {
        t.rows.push_back({s.sensor, s.model, s.scored ? fmt(s.rmse) : "",
                          s.scored ? fmt(s.ev_pct) : "", std::to_string(s.n),
                          std::to_string(s.negatives), s.error});
    }
    csv::write_file(path, t);
}

void write_folds_csv(const std::string& path, const std::vector<FoldResult>& folds) {
    csv::Table t;
    t.header = {"site", "ok", "rmse", "ev_pct", "n", "negatives", "error"};
    for (const auto& f : folds) {
        t.rows.push_back({f.site, f.ok ? "1" : "0", f.ok ? fmt(f.rmse) : "",
                          f.ok ? fmt(f.ev_pct) : "", std::to_string(f.n),
                          std::to_string(f.negatives), f.error});
    }
    csv::write_file(path, t);
}

void write_hourly_csv(const std::string& path, const std::vector<HourlyRmse>& hourly) {
    csv::Table t;
    t.header = {"hour", "hour_of_day", "rmse", "n_sites"};
    for (const auto& h : hourly) {
        t.rows.push_back({format_hour(h.hour), std::to_string(h.hour_of_day), fmt(h.rmse),
                          std::to_string(h.n_sites)});
    }
    csv::write_file(path, t);
}

void write_pairing_csv(const std::string& path, const PairingPlan& plan) {
    csv::Table t;
    t.header = {"sensor", "reference", "source"};
    for (const auto& p : plan.pairs) {
        t.rows.push_back({p.sensor, p.reference, std::string(pairing_source_name(p.source))});
    }
    csv::write_file(path, t);
}

void write_curve_csv(const std::string& path, const BandwidthCurve& curve) {
    csv::Table t;
    t.header = {"bandwidth_m", "cv_rmse"};
    for (size_t i = 0; i < curve.candidates_m.size(); ++i) {
        t.rows.push_back({fmt(curve.candidates_m[i], 12), fmt(curve.cv_rmse[i], 12)});
    }
    csv::write_file(path, t);
}

void write_report_txt(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    out << "Validation report\n=================\n\n";
    out << "Period: " << format_day(report.split_spec.start_day) << " .. "
        << format_day(report.split_spec.end_day) << " (" << report.split.n_days()
        << " days)\n";
    char line[160];
    std::snprintf(line, sizeof line,
                  "Split: S0=%zu S1=%zu S2=%zu days; achieved %.1f/%.1f/%.1f %%; "
                  "rule %.1f/%.1f/%.1f %%; study %.1f/%.1f/%.1f %%\n",
                  report.split.s0.size(), report.split.s1.size(), report.split.s2.size(),
                  report.split.frac0, report.split.frac1, report.split.frac2,
                  kRuleFractions[0], kRuleFractions[1], kRuleFractions[2], kStudyFractions[0],
                  kStudyFractions[1], kStudyFractions[2]);
    out << line;
    if (report.kernel) {
        out << "Kernel: " << kernel_kind_name(report.kernel->kind) << ", B = "
            << report.kernel->bandwidth_m << " m\n";
    }
    out << "\nPairing plan\n";
    for (const auto& p : report.pairing.pairs) {
        out << "  " << p.sensor << " -> " << p.reference << " ("
            << pairing_source_name(p.source) << ")\n";
    }

    if (!report.scores.empty()) {
        out << "\nTest-sample scores (S2)\n";
        std::snprintf(line, sizeof line, "  %-12s %-14s %9s %9s %6s %5s\n", "sensor", "model",
                      "RMSE", "EV %", "n", "neg");
        out << line;
        for (const auto& s : report.scores) {
            if (s.scored) {
                std::snprintf(line, sizeof line, "  %-12s %-14s %9.2f %9.2f %6d %5d\n",
                              s.sensor.c_str(), s.model.c_str(), s.rmse, s.ev_pct, s.n,
                              s.negatives);
            } else {
                std::snprintf(line, sizeof line, "  %-12s %-14s %9s %9s %6d %5d  %s\n",
                              s.sensor.c_str(), s.model.c_str(), "-", "-", s.n, s.negatives,
                              s.error.c_str());
            }
            out << line;
        }
    }

    if (!report.cv.folds.empty()) {
        out << "\nLeave-one-out cross-validation (" << report.cv_model << ")\n";
        for (const auto& f : report.cv.folds) {
            if (f.ok) {
                std::snprintf(line, sizeof line, "  %-12s RMSE %8.2f  EV %8.2f %%  n=%d\n",
                              f.site.c_str(), f.rmse, f.ev_pct, f.n);
            } else {
                std::snprintf(line, sizeof line, "  %-12s failed: %s\n", f.site.c_str(),
                              f.error.c_str());
            }
            out << line;
        }
        std::snprintf(line, sizeof line, "  CV RMSE = %.4f (failed folds: %d)\n",
                      report.cv.cv_rmse, report.cv.failed_folds);
        out << line;
    }

    if (!report.hourly.empty()) {
        // Boxplot-style summary of the spatial RMSE grouped by hour of day.
        std::map<int, std::vector<double>> by_hod;
        for (const auto& h : report.hourly) by_hod[h.hour_of_day].push_back(h.rmse);
        out << "\nSpatial RMSE by hour of day (min / q1 / median / q3 / max, n)\n";
        for (auto& [hod, values] : by_hod) {
            std::sort(values.begin(), values.end());
            auto q = [&](double f) {
                double idx = f * static_cast<double>(values.size() - 1);
                size_t lo = static_cast<size_t>(idx);
                size_t hi = std::min(lo + 1, values.size() - 1);
                return values[lo] + (idx - static_cast<double>(lo)) * (values[hi] - values[lo]);
            };
            std::snprintf(line, sizeof line,
                          "  %02d:00  %7.2f %7.2f %7.2f %7.2f %7.2f  (%zu)\n", hod, values.front(),
                          q(0.25), q(0.5), q(0.75), values.back(), values.size());
            out << line;
        }
        if (report.hourly_skipped > 0) {
            out << "  (skipped " << report.hourly_skipped
                << " timestamps without a complete site vector)\n";
        }
    }
}

} // namespace aircal
