#include "aircal/baseline.hpp"

#include "aircal/errors.hpp"

#include <algorithm>

namespace aircal {

std::string_view pairing_source_name(PairingSource s) {
    switch (s) {
    case PairingSource::collocated: return "collocated";
    case PairingSource::matched_typology: return "matched-typology";
    case PairingSource::user_specified: return "user-specified";
    }
    return "user-specified";
}

const Pairing* PairingPlan::find(const std::string& sensor) const {
    for (const auto& p : pairs) {
        if (p.sensor == sensor) return &p;
    }
    return nullptr;
}

PairingPlan default_pairing(const Panel& panel,
                            const std::map<std::string, std::string>& overrides) {
    std::vector<int> refs = panel.sites_with_role(SiteRole::reference);
    if (refs.empty()) throw DataError("no reference stations in the panel");

    PairingPlan plan;
    for (int s : panel.sensor_sites()) {
        const SiteRecord& sensor = panel.sites()[s];
        auto own = panel.paired_reference(s);

        auto ov = overrides.find(sensor.id);
        if (ov != overrides.end()) {
            auto ref_idx = panel.site_index(ov->second);
            if (!ref_idx || panel.sites()[*ref_idx].role != SiteRole::reference) {
                throw ConfigError("pairing override for " + sensor.id +
                                  " names no reference station: " + ov->second);
            }
            PairingSource src = (own && *own == *ref_idx) ? PairingSource::collocated
                                                          : PairingSource::user_specified;
            plan.pairs.push_back({sensor.id, ov->second, src});
            continue;
        }

        // Rank candidates: exact typology, then coarse class, then anything;
        // nearest within a tier, site id breaks distance ties.
        int best = -1;
        std::tuple<int, double, std::string> best_key;
        for (int r : refs) {
            if (own && *own == r) continue;
            const SiteRecord& station = panel.sites()[r];
            int tier = 2;
            if (station.typology == sensor.typology) {
                tier = 0;
            } else if (typology_class(station.typology) == typology_class(sensor.typology)) {
                tier = 1;
            }
            std::tuple<int, double, std::string> key{
                tier, distance(sensor.position, station.position), station.id};
            if (best < 0 || key < best_key) {
                best = r;
                best_key = key;
            }
        }
        if (best < 0) {
            // Single-station network: the cohosted station is the only choice.
            if (!own) throw DataError("no pairable reference station for " + sensor.id);
            plan.pairs.push_back({sensor.id, panel.sites()[*own].id, PairingSource::collocated});
        } else {
            plan.pairs.push_back(
                {sensor.id, panel.sites()[best].id, PairingSource::matched_typology});
        }
    }
    return plan;
}

namespace {

/// Rows joining one sensor's covariates with an arbitrary reference site.
DesignSlice collect_pair_rows(const Panel& panel, const ModelSpec& spec, int sensor_site,
                              int ref_site, const std::vector<int>& hour_indices) {
    std::vector<int> picked;
    for (int h : hour_indices) {
        const TimedSample* sensor = panel.cell(sensor_site, h);
        const TimedSample* station = panel.cell(ref_site, h);
        if (!sensor || !station || !(*station)[Channel::ref_no2]) continue;
        bool complete = (*sensor)[spec.pollutant].has_value();
        for (Channel c : spec.covariates) complete = complete && (*sensor)[c].has_value();
        if (complete) picked.push_back(h);
    }
    const int p2 = spec.n_columns();
    DesignSlice slice;
    slice.spec = spec;
    slice.x.resize(static_cast<Eigen::Index>(picked.size()), p2);
    slice.y.resize(static_cast<Eigen::Index>(picked.size()));
    for (size_t i = 0; i < picked.size(); ++i) {
        int h = picked[i];
        const TimedSample& sensor = *panel.cell(sensor_site, h);
        auto ei = static_cast<Eigen::Index>(i);
        slice.x(ei, 0) = 1.0;
        for (size_t c = 0; c < spec.covariates.size(); ++c) {
            slice.x(ei, static_cast<Eigen::Index>(c + 1)) = *sensor[spec.covariates[c]];
        }
        slice.x(ei, p2 - 1) = *sensor[spec.pollutant];
        slice.y(ei) = *(*panel.cell(ref_site, h))[Channel::ref_no2];
        HourStamp hs = panel.hours()[h];
        slice.site.push_back(sensor_site);
        slice.hour.push_back(hs);
        slice.rows.push_back(ObservationRow{panel.sites()[sensor_site].position,
                                            static_cast<double>(hour_of_day(hs))});
    }
    return slice;
}

LocalModel fit_pointwise(const Panel& panel, const ModelSpec& spec, int sensor_site, int ref_site,
                         const std::vector<int>& hour_indices, const WlsOptions& options,
                         const char* what) {
    DesignSlice slice = collect_pair_rows(panel, spec, sensor_site, ref_site, hour_indices);
    if (slice.n_rows() < spec.n_columns()) {
        throw DataError(std::string(what) + " model for " + panel.sites()[sensor_site].id +
                        ": insufficient overlapping rows (" + std::to_string(slice.n_rows()) +
                        ")");
    }
    Eigen::VectorXd weights = Eigen::VectorXd::Ones(slice.n_rows());
    LocalModel model = fit_wls(slice, weights, options);
    model.target_id = panel.sites()[sensor_site].id;
    model.target = panel.sites()[sensor_site].position;
    return model;
}

} // namespace

LocalModel fit_collocated(const Panel& panel, const ModelSpec& spec, int sensor_site,
                          const std::vector<int>& hour_indices, const WlsOptions& options) {
    auto own = panel.paired_reference(sensor_site);
    if (!own) {
        throw DataError("collocated model needs a cohosted reference station, none for " +
                        panel.sites()[sensor_site].id);
    }
    return fit_pointwise(panel, spec, sensor_site, *own, hour_indices, options, "collocated");
}

LocalModel fit_noncollocated(const Panel& panel, const ModelSpec& spec, int sensor_site,
                             const PairingPlan& plan, const std::vector<int>& hour_indices,
                             const WlsOptions& options) {
    const std::string& id = panel.sites()[sensor_site].id;
    const Pairing* pairing = plan.find(id);
    if (!pairing) throw DataError("pairing plan has no entry for sensor " + id);
    auto ref = panel.site_index(pairing->reference);
    if (!ref) throw DataError("pairing for " + id + " names unknown station " + pairing->reference);
    return fit_pointwise(panel, spec, sensor_site, *ref, hour_indices, options, "non-collocated");
}

} // namespace aircal
