#include "aircal/gwr.hpp"

#include "aircal/csv.hpp"
#include "aircal/errors.hpp"
#include "aircal/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aircal {

Channel ModelSpec::column_channel(int i) const {
    if (i <= 0 || i > static_cast<int>(covariates.size()) + 1) {
        throw NumericalError("design column index out of range");
    }
    if (i <= static_cast<int>(covariates.size())) return covariates[static_cast<size_t>(i - 1)];
    return pollutant;
}

std::vector<std::string> ModelSpec::column_names() const {
    std::vector<std::string> names = {"intercept"};
    for (Channel c : covariates) names.emplace_back(channel_name(c));
    names.emplace_back(channel_name(pollutant));
    return names;
}

DesignSlice collect_design(const Panel& panel, const ModelSpec& spec,
                           const std::vector<int>& sensor_sites,
                           const std::vector<int>& hour_indices) {
    const int p2 = spec.n_columns();
    struct Row {
        int site;
        int hour_idx;
        int ref_site;
    };
    std::vector<Row> picked;
    for (int s : sensor_sites) {
        const SiteRecord& rec = panel.sites()[s];
        if (rec.role == SiteRole::reference) {
            throw DataError("fit site " + rec.id + " is a reference station, not a sensor");
        }
        auto ref = panel.paired_reference(s);
        if (!ref) throw DataError("sensor " + rec.id + " has no paired reference station");
        for (int h : hour_indices) {
            const TimedSample* sensor = panel.cell(s, h);
            const TimedSample* station = panel.cell(*ref, h);
            if (!sensor || !station) continue;
            if (!(*station)[Channel::ref_no2]) continue;
            bool complete = (*sensor)[spec.pollutant].has_value();
            for (Channel c : spec.covariates) complete = complete && (*sensor)[c].has_value();
            if (!complete) continue;
            picked.push_back({s, h, *ref});
        }
    }

    DesignSlice slice;
    slice.spec = spec;
    slice.x.resize(static_cast<Eigen::Index>(picked.size()), p2);
    slice.y.resize(static_cast<Eigen::Index>(picked.size()));
    slice.site.reserve(picked.size());
    slice.hour.reserve(picked.size());
    slice.rows.reserve(picked.size());
    for (size_t i = 0; i < picked.size(); ++i) {
        const Row& r = picked[i];
        const TimedSample& sensor = *panel.cell(r.site, r.hour_idx);
        const TimedSample& station = *panel.cell(r.ref_site, r.hour_idx);
        auto ei = static_cast<Eigen::Index>(i);
        slice.x(ei, 0) = 1.0;
        for (size_t c = 0; c < spec.covariates.size(); ++c) {
            slice.x(ei, static_cast<Eigen::Index>(c + 1)) = *sensor[spec.covariates[c]];
        }
        slice.x(ei, p2 - 1) = *sensor[spec.pollutant];
        slice.y(ei) = *station[Channel::ref_no2];
        HourStamp hs = panel.hours()[r.hour_idx];
        slice.site.push_back(r.site);
        slice.hour.push_back(hs);
        slice.rows.push_back(ObservationRow{panel.sites()[r.site].position,
                                            static_cast<double>(hour_of_day(hs))});
    }
    return slice;
}

LocalModel fit_wls(const DesignSlice& slice, const Eigen::VectorXd& weights,
                   const WlsOptions& options) {
    const Eigen::Index n = slice.x.rows();
    const Eigen::Index p = slice.x.cols();
    if (weights.size() != n) throw NumericalError("weight vector length mismatch");
    if (n < p) {
        throw SingularFitError("fewer rows than design columns (" + std::to_string(n) + " < " +
                                   std::to_string(p) + ")",
                               std::numeric_limits<double>::infinity());
    }
    // The Gaussian kernel never truncates, but its weights can underflow to
    // zero at extreme distance ratios; those rows simply stop contributing
    // and a fully underflowed fit surfaces as a singular normal matrix.
    if ((weights.array() < 0.0).any()) {
        throw NumericalError("weights must be nonnegative");
    }

    Eigen::MatrixXd normal = slice.x.transpose() * weights.asDiagonal() * slice.x;
    Eigen::VectorXd rhs = slice.x.transpose() * (weights.array() * slice.y.array()).matrix();
    if (options.diagonal_jitter) {
        normal.diagonal().array() += 1e-8 * normal.trace() / static_cast<double>(p);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
    const double lambda_min = eig.eigenvalues().minCoeff();
    const double lambda_max = eig.eigenvalues().maxCoeff();
    const double condition = (lambda_min > 0.0)
                                 ? lambda_max / lambda_min
                                 : std::numeric_limits<double>::infinity();
    if (!(lambda_min > 0.0) || condition > options.condition_limit) {
        std::ostringstream oss;
        oss << "normal matrix not positive definite within tolerance (condition estimate "
            << condition << ")";
        throw SingularFitError(oss.str(), condition);
    }

    Eigen::VectorXd beta = normal.llt().solve(rhs);
    LocalModel model;
    model.spec = slice.spec;
    model.beta.assign(beta.data(), beta.data() + beta.size());
    model.condition = condition;
    model.weight_mass = weights.sum();
    return model;
}

double wls_objective(const DesignSlice& slice, const Eigen::VectorXd& weights,
                     const std::vector<double>& beta) {
    Eigen::Map<const Eigen::VectorXd> b(beta.data(), static_cast<Eigen::Index>(beta.size()));
    Eigen::VectorXd residual = slice.y - slice.x * b;
    return (weights.array() * residual.array().square()).sum();
}

namespace {

// Site weights repeat across a site's rows; cache per unique (site, obs hour)
// so grids stay cheap. Values are bitwise identical to a per-row evaluation.
Eigen::VectorXd expand_weights(const DesignSlice& slice, const KernelSpec& kernel,
                               const GwrTarget& target) {
    if (kernel.kind == KernelSpec::Kind::gtwr && !target.hour_of_day) {
        throw NumericalError("gtwr kernel needs a target hour for target " + target.id);
    }
    Eigen::VectorXd weights(slice.n_rows());
    std::map<std::pair<int, int>, double> cache;
    for (int i = 0; i < slice.n_rows(); ++i) {
        int hod = static_cast<int>(slice.rows[static_cast<size_t>(i)].hour_of_day);
        std::pair<int, int> key{slice.site[static_cast<size_t>(i)],
                                kernel.kind == KernelSpec::Kind::gtwr ? hod : 0};
        auto it = cache.find(key);
        if (it == cache.end()) {
            const ObservationRow& row = slice.rows[static_cast<size_t>(i)];
            double w = (kernel.kind == KernelSpec::Kind::gaussian)
                           ? gaussian_weight(target.position, row.position, kernel.bandwidth_m)
                           : gtwr_weight(target.position, row.position, kernel.bandwidth_m,
                                         static_cast<double>(*target.hour_of_day),
                                         row.hour_of_day, kernel.time_exponent,
                                         kernel.wrap_hours);
            it = cache.emplace(key, w).first;
        }
        weights(i) = it->second;
    }
    return weights;
}

} // namespace

std::vector<LocalFit> fit_gwr(const DesignSlice& slice, const std::vector<GwrTarget>& targets,
                              const KernelSpec& kernel, const WlsOptions& options, int jobs) {
    std::vector<LocalFit> fits(targets.size());
    parallel_for(static_cast<int>(targets.size()), jobs, [&](int i) {
        const GwrTarget& target = targets[static_cast<size_t>(i)];
        LocalFit& out = fits[static_cast<size_t>(i)];
        try {
            Eigen::VectorXd weights = expand_weights(slice, kernel, target);
            LocalModel model = fit_wls(slice, weights, options);
            model.target_id = target.id;
            model.target = target.position;
            model.target_hour = target.hour_of_day;
            model.kernel = kernel;
            out.condition = model.condition;
            out.model = std::move(model);
        } catch (const SingularFitError& e) {
            out.error = e.what();
            out.condition = e.condition();
        }
    });
    return fits;
}

std::vector<LocalFit> fit_gwr(const Panel& panel, const ModelSpec& spec,
                              const std::vector<GwrTarget>& targets, const KernelSpec& kernel,
                              const std::vector<int>& fit_sites,
                              const std::vector<int>& hour_indices, const WlsOptions& options,
                              int jobs) {
    DesignSlice slice = collect_design(panel, spec, fit_sites, hour_indices);
    return fit_gwr(slice, targets, kernel, options, jobs);
}

const Standardizer::Entry* Standardizer::find(int site, Channel ch) const {
    auto it = stats_.find({site, static_cast<int>(ch)});
    return it == stats_.end() ? nullptr : &it->second;
}

Standardizer::Entry Standardizer::require(int site, Channel ch,
                                          const std::string& site_id) const {
    const Entry* e = find(site, ch);
    if (!e) {
        throw DataError("no standardization statistics for site " + site_id + ", variable " +
                        std::string(channel_name(ch)));
    }
    return *e;
}

Standardizer::Entry Standardizer::median_entry(Channel ch) const {
    std::vector<double> means, sds;
    for (const auto& [key, e] : stats_) {
        if (key.second == static_cast<int>(ch)) {
            means.push_back(e.mean);
            sds.push_back(e.sd);
        }
    }
    if (means.empty()) {
        throw DataError("no standardization statistics for variable " +
                        std::string(channel_name(ch)));
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    return Entry{median(means), median(sds)};
}

std::pair<Panel, Standardizer> standardize(const Panel& panel, const ModelSpec& spec,
                                           const std::vector<int>& fit_hour_indices) {
    std::vector<Channel> channels = spec.covariates;
    channels.push_back(spec.pollutant);

    Standardizer stats;
    Panel out = panel;
    for (int s = 0; s < panel.n_sites(); ++s) {
        const SiteRecord& site = panel.sites()[s];
        if (!site.is_sensor()) continue;

        bool any_data = panel.cell_count(s) > 0;
        std::vector<int> fit_cells;
        for (int h : fit_hour_indices) {
            if (panel.cell(s, h)) fit_cells.push_back(h);
        }
        if (fit_cells.empty()) {
            if (any_data) {
                stats.skipped_sites.push_back(site.id);
                for (int h = 0; h < panel.n_hours(); ++h) out.clear_cell(s, h);
            }
            continue;
        }

        for (Channel ch : channels) {
            double sum = 0.0;
            int n = 0;
            for (int h : fit_cells) {
                const auto& v = (*panel.cell(s, h))[ch];
                if (v) {
                    sum += *v;
                    ++n;
                }
            }
            if (n == 0) {
                stats.skipped_sites.push_back(site.id);
                for (int h = 0; h < panel.n_hours(); ++h) out.clear_cell(s, h);
                break;
            }
            double mean = sum / n;
            double ss = 0.0;
            for (int h : fit_cells) {
                const auto& v = (*panel.cell(s, h))[ch];
                if (v) ss += (*v - mean) * (*v - mean);
            }
            double sd = std::sqrt(ss / n);
            if (!(sd > 0.0)) {
                throw DataError("degenerate variable: site " + site.id + ", variable " +
                                std::string(channel_name(ch)) +
                                " has zero variance on the fitting sample");
            }
            stats.set(s, ch, Standardizer::Entry{mean, sd});
        }

        if (!stats.find(s, channels.front())) continue; // site was skipped above
        for (int h = 0; h < panel.n_hours(); ++h) {
            if (!panel.cell(s, h)) continue;
            TimedSample& cell = out.cell_mut(s, h);
            for (Channel ch : channels) {
                auto& v = cell[ch];
                if (v) {
                    const auto e = *stats.find(s, ch);
                    v = (*v - e.mean) / e.sd;
                }
            }
        }
    }
    return {std::move(out), std::move(stats)};
}

LocalModel destandardize(const LocalModel& model, const Standardizer& std_stats, int site,
                         const std::string& site_id) {
    std::vector<Standardizer::Entry> entries;
    for (int i = 1; i < model.spec.n_columns(); ++i) {
        entries.push_back(std_stats.require(site, model.spec.column_channel(i), site_id));
    }
    return destandardize_with(model, entries);
}

LocalModel destandardize_with(const LocalModel& model,
                              const std::vector<Standardizer::Entry>& entries) {
    const int p2 = model.spec.n_columns();
    if (static_cast<int>(entries.size()) != p2 - 1) {
        throw NumericalError("destandardize: entry count mismatch");
    }
    if (static_cast<int>(model.beta.size()) != p2) {
        throw NumericalError("destandardize: coefficient count mismatch");
    }
    LocalModel out = model;
    double intercept = model.beta[0];
    for (int i = 1; i < p2; ++i) {
        const auto& e = entries[static_cast<size_t>(i - 1)];
        out.beta[static_cast<size_t>(i)] = model.beta[static_cast<size_t>(i)] / e.sd;
        intercept -= model.beta[static_cast<size_t>(i)] * e.mean / e.sd;
    }
    out.beta[0] = intercept;
    return out;
}

std::vector<LocalFit> fit_sgwr(const Panel& panel, const ModelSpec& spec,
                               const std::vector<int>& target_sensor_sites,
                               const KernelSpec& kernel, const std::vector<int>& fit_sites,
                               const std::vector<int>& fit_hour_indices,
                               const WlsOptions& options, int jobs) {
    auto [std_panel, stats] = standardize(panel, spec, fit_hour_indices);
    std::vector<GwrTarget> targets;
    targets.reserve(target_sensor_sites.size());
    for (int s : target_sensor_sites) {
        targets.push_back(GwrTarget{panel.sites()[s].id, panel.sites()[s].position, std::nullopt});
    }
    std::vector<LocalFit> fits =
        fit_gwr(std_panel, spec, targets, kernel, fit_sites, fit_hour_indices, options, jobs);
    for (size_t i = 0; i < fits.size(); ++i) {
        if (!fits[i].ok()) continue;
        int site = target_sensor_sites[i];
        try {
            fits[i].model =
                destandardize(*fits[i].model, stats, site, panel.sites()[site].id);
        } catch (const DataError& e) {
            fits[i].model.reset();
            fits[i].error = e.what();
        }
    }
    return fits;
}

double correct(const LocalModel& model, const TimedSample& sample) {
    const int p2 = model.spec.n_columns();
    if (static_cast<int>(model.beta.size()) != p2) {
        throw NumericalError("model has wrong coefficient count");
    }
    double value = model.beta[0];
    for (int i = 1; i < p2; ++i) {
        Channel ch = model.spec.column_channel(i);
        const auto& v = sample[ch];
        if (!v) {
            throw DataError("sample is missing covariate " + std::string(channel_name(ch)));
        }
        value += model.beta[static_cast<size_t>(i)] * *v;
    }
    return value;
}

void write_models(const std::string& path, const std::vector<LocalModel>& models) {
    csv::Table t;
    t.header = {"target", "x", "y", "hour"};
    if (!models.empty()) {
        for (const std::string& name : models.front().spec.column_names()) {
            t.header.push_back("beta_" + name);
        }
    }
    t.header.insert(t.header.end(), {"kernel", "bandwidth_m", "condition", "weight_mass"});
    for (const auto& m : models) {
        std::vector<std::string> row = {m.target_id, csv::format_double(m.target.x, 12),
                                        csv::format_double(m.target.y, 12),
                                        m.target_hour ? std::to_string(*m.target_hour)
                                                      : std::string()};
        for (double b : m.beta) row.push_back(csv::format_double(b, 12));
        row.push_back(m.kernel ? kernel_kind_name(m.kernel->kind) : "none");
        row.push_back(m.kernel ? csv::format_double(m.kernel->bandwidth_m, 12) : std::string());
        row.push_back(csv::format_double(m.condition, 12));
        row.push_back(csv::format_double(m.weight_mass, 12));
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

std::vector<LocalModel> read_models(const std::string& path) {
    csv::Table t = csv::read_file(path);
    std::vector<std::string> beta_names;
    for (const auto& h : t.header) {
        if (h.rfind("beta_", 0) == 0) beta_names.push_back(h.substr(5));
    }
    if (beta_names.size() < 2 || beta_names.front() != "intercept") {
        throw DataError("model table has no usable beta_* columns: " + path);
    }
    ModelSpec spec;
    spec.covariates.clear();
    for (size_t i = 1; i + 1 < beta_names.size(); ++i) {
        auto ch = channel_from_name(beta_names[i]);
        if (!ch) throw DataError("unknown design channel " + beta_names[i]);
        spec.covariates.push_back(*ch);
    }
    auto pol = channel_from_name(beta_names.back());
    if (!pol) throw DataError("unknown pollutant channel " + beta_names.back());
    spec.pollutant = *pol;

    auto col = [&](const std::string& name) {
        auto c = t.column(name);
        if (!c) throw DataError("model table missing column '" + name + "': " + path);
        return *c;
    };
    int target = col("target"), xcol = col("x"), ycol = col("y"), hour = col("hour");
    int kernel = col("kernel"), bw = col("bandwidth_m");
    auto cond = t.column("condition");
    auto mass = t.column("weight_mass");
    std::vector<int> beta_cols;
    for (const auto& name : beta_names) beta_cols.push_back(col("beta_" + name));

    std::vector<LocalModel> models;
    for (const auto& row : t.rows) {
        LocalModel m;
        m.spec = spec;
        m.target_id = row[target];
        m.target.x = csv::parse_double(row[xcol]).value();
        m.target.y = csv::parse_double(row[ycol]).value();
        if (auto h = csv::parse_int(row[hour])) m.target_hour = static_cast<int>(*h);
        for (int bc : beta_cols) m.beta.push_back(csv::parse_double(row[bc]).value());
        if (row[kernel] != "none") {
            KernelSpec ks;
            auto kind = kernel_kind_from_name(row[kernel]);
            if (!kind) throw DataError("unknown kernel kind " + row[kernel]);
            ks.kind = *kind;
            ks.bandwidth_m = csv::parse_double(row[bw]).value();
            m.kernel = ks;
        }
        if (cond) m.condition = csv::parse_double(row[*cond]).value_or(0.0);
        if (mass) m.weight_mass = csv::parse_double(row[*mass]).value_or(0.0);
        models.push_back(std::move(m));
    }
    return models;
}

} // namespace aircal
