#include "aircal/grid.hpp"

#include "aircal/csv.hpp"
#include "aircal/errors.hpp"
#include "aircal/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace aircal {

SurfaceResult coefficient_surface(const Panel& panel, const ModelSpec& spec,
                                  const KernelSpec& kernel, ModelKind kind, const GridSpec& grid,
                                  const std::vector<int>& fit_hours, const WlsOptions& options,
                                  int jobs) {
    if (!(grid.cell_m > 0.0)) throw ConfigError("grid cell size must be > 0");
    if (!(grid.box.width() > 0.0) || !(grid.box.height() > 0.0)) {
        throw ConfigError("grid bounding box is degenerate");
    }
    if (kind != ModelKind::gwr && kind != ModelKind::sgwr) {
        throw ConfigError("coefficient surfaces exist for gwr/sgwr models");
    }

    const std::vector<std::string> all_columns = spec.column_names();
    std::vector<int> selected;
    if (grid.coefficients.empty()) {
        for (size_t i = 0; i < all_columns.size(); ++i) selected.push_back(static_cast<int>(i));
    } else {
        for (const auto& name : grid.coefficients) {
            auto it = std::find(all_columns.begin(), all_columns.end(), name);
            if (it == all_columns.end()) {
                throw ConfigError("unknown coefficient '" + name + "' in grid selection");
            }
            selected.push_back(static_cast<int>(it - all_columns.begin()));
        }
    }

    std::vector<int> stations = panel.sites_with_role(SiteRole::collocated_sensor);
    if (stations.empty()) throw DataError("no collocated stations to fit the surface from");

    // SGWR grids are fit in standardized space; the per-node raw-unit
    // conversion uses the network-median statistics.
    std::optional<Panel> std_panel;
    std::vector<Standardizer::Entry> median_entries;
    if (kind == ModelKind::sgwr) {
        auto pair = standardize(panel, spec, fit_hours);
        std_panel.emplace(std::move(pair.first));
        for (int i = 1; i < spec.n_columns(); ++i) {
            median_entries.push_back(pair.second.median_entry(spec.column_channel(i)));
        }
    }
    const Panel& fit_panel = std_panel ? *std_panel : panel;
    DesignSlice slice = collect_design(fit_panel, spec, stations, fit_hours);

    const int nx = static_cast<int>(std::floor(grid.box.width() / grid.cell_m)) + 1;
    const int ny = static_cast<int>(std::floor(grid.box.height() / grid.cell_m)) + 1;

    SurfaceResult result;
    result.n_nodes = nx * ny;
    for (int idx : selected) {
        Raster r;
        r.name = all_columns[static_cast<size_t>(idx)];
        r.box = grid.box;
        r.cell_m = grid.cell_m;
        r.nx = nx;
        r.ny = ny;
        r.values.assign(static_cast<size_t>(nx) * static_cast<size_t>(ny), std::nullopt);
        result.layers.push_back(std::move(r));
    }

    std::vector<int> nodata(static_cast<size_t>(nx) * static_cast<size_t>(ny), 0);
    parallel_for(nx * ny, jobs, [&](int node) {
        int ix = node % nx, iy = node / nx;
        Position pos{grid.box.xmin + ix * grid.cell_m, grid.box.ymin + iy * grid.cell_m};
        GwrTarget target{"node", pos, std::nullopt};
        std::vector<LocalFit> fits = fit_gwr(slice, {target}, kernel, options, 1);
        LocalFit& fit = fits.front();
        if (fit.ok() && kind == ModelKind::sgwr) {
            fit.model = destandardize_with(*fit.model, median_entries);
        }
        if (!fit.ok()) {
            nodata[static_cast<size_t>(node)] = 1;
            return;
        }
        for (size_t li = 0; li < result.layers.size(); ++li) {
            int coef = selected[li];
            result.layers[li].values[static_cast<size_t>(node)] =
                fit.model->beta[static_cast<size_t>(coef)];
        }
    });
    for (int flag : nodata) result.n_nodata += flag;
    return result;
}

std::vector<std::string> export_layers(const SurfaceResult& surfaces,
                                       const std::string& directory, LayerFormat format) {
    std::vector<std::string> written;
    if (format == LayerFormat::delimited_grid) {
        for (const Raster& layer : surfaces.layers) {
            csv::Table t;
            t.header = {"x", "y", "value"};
            for (int iy = 0; iy < layer.ny; ++iy) {
                for (int ix = 0; ix < layer.nx; ++ix) {
                    Position p = layer.node(ix, iy);
                    const auto& v = layer.at(ix, iy);
                    t.rows.push_back({csv::format_double(p.x, 6), csv::format_double(p.y, 6),
                                      v ? csv::format_double(*v, 6) : std::string()});
                }
            }
            std::string path = directory + "/layer_" + layer.name + ".csv";
            csv::write_file(path, t);
            written.push_back(path);
        }
        return written;
    }

    nlohmann::json features = nlohmann::json::array();
    if (!surfaces.layers.empty()) {
        const Raster& first = surfaces.layers.front();
        for (int iy = 0; iy < first.ny; ++iy) {
            for (int ix = 0; ix < first.nx; ++ix) {
                Position p = first.node(ix, iy);
                nlohmann::json props;
                for (const Raster& layer : surfaces.layers) {
                    const auto& v = layer.at(ix, iy);
                    if (v) {
                        props[layer.name] = *v;
                    } else {
                        props[layer.name] = nullptr;
                    }
                }
                features.push_back({{"type", "Feature"},
                                    {"geometry",
                                     {{"type", "Point"}, {"coordinates", {p.x, p.y}}}},
                                    {"properties", props}});
            }
        }
    }
    nlohmann::json fc = {{"type", "FeatureCollection"}, {"features", features}};
    std::string path = directory + "/layers.geojson";
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << fc.dump(1) << '\n';
    written.push_back(path);
    return written;
}

} // namespace aircal
