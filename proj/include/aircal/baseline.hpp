#pragma once

#include "aircal/gwr.hpp"

#include <string>
#include <vector>

namespace aircal {

/// How a sensor got its response-supplying reference station.
enum class PairingSource { collocated, matched_typology, user_specified };

std::string_view pairing_source_name(PairingSource s);

struct Pairing {
    std::string sensor;
    std::string reference;
    PairingSource source = PairingSource::matched_typology;
};

/// One reference station per sensor.
struct PairingPlan {
    std::vector<Pairing> pairs;
    const Pairing* find(const std::string& sensor) const;
};

/// Default plan: the nearest non-cohosted reference station whose site
/// typology matches the sensor's (exact typology first, then the coarse
/// traffic/industry/background class, then nearest overall). Overrides map
/// sensor id -> reference id and are tagged user_specified, or collocated
/// when they name the sensor's own station.
PairingPlan default_pairing(const Panel& panel,
                            const std::map<std::string, std::string>& overrides = {});

/// Pointwise competitor: OLS on the site's own rows from the given sample.
LocalModel fit_collocated(const Panel& panel, const ModelSpec& spec, int sensor_site,
                          const std::vector<int>& hour_indices, const WlsOptions& options = {});

/// Pointwise competitor: OLS regressing the paired station's reference
/// concentrations on the sensor's covariates over time-aligned rows.
LocalModel fit_noncollocated(const Panel& panel, const ModelSpec& spec, int sensor_site,
                             const PairingPlan& plan, const std::vector<int>& hour_indices,
                             const WlsOptions& options = {});

} // namespace aircal
