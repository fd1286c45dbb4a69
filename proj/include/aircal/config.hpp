#pragma once

#include "aircal/eval.hpp"
#include "aircal/grid.hpp"
#include "aircal/ingest.hpp"
#include "aircal/synth.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace aircal {

struct IngestConfig {
    IngestSchema schema;
    std::string sites_file;
    std::set<int> bad_flags;
    RenameMap rename;
    std::set<std::string> reference_devices;
    bool ref_is_ppb = false;
    double fallback_pressure_pa = 101325.0;
    double fallback_temperature_k = 293.15;
};

struct BandwidthGridConfig {
    double min_m = 200.0;
    double max_m = 5000.0;
    double step_m = 20.0;

    std::vector<double> candidates() const;
};

/// The whole pipeline in one declarative file. Parsed strictly: unknown keys
/// are rejected so typos fail before any stage runs.
struct PipelineConfig {
    std::string output_dir = "out";
    std::optional<LonLat> projection_origin;
    std::optional<BoundingBox> bounding_box;

    std::optional<IngestConfig> ingest;
    ModelSpec model;
    KernelSpec kernel{KernelSpec::Kind::gaussian, 1460.0};
    WlsOptions wls;
    std::optional<SplitSpec> split;
    std::map<std::string, std::string> pairing_overrides;
    BandwidthGridConfig bandwidth_grid;
    std::optional<GridSpec> grid;
    std::string grid_format = "delimited"; // delimited | geojson | both
    std::optional<SynthSpec> synth;
    std::uint64_t synth_seed = 1;
};

PipelineConfig load_config(const std::string& path);

/// Sites input: either already projected (x, y columns) or geographic
/// (lon, lat columns, projected through the configured origin).
std::vector<SiteRecord> load_site_inputs(const std::string& path,
                                         const std::optional<LonLat>& origin,
                                         const std::optional<BoundingBox>& box);

} // namespace aircal
