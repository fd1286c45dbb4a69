#pragma once

#include "aircal/eval.hpp"
#include "aircal/gwr.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aircal {

struct GridSpec {
    BoundingBox box{};
    double cell_m = 0.0;
    std::vector<std::string> coefficients; // column labels; empty selects all
};

/// One coefficient evaluated over the grid; row-major from the south-west
/// corner, nullopt where the local fit was singular.
struct Raster {
    std::string name;
    BoundingBox box{};
    double cell_m = 0.0;
    int nx = 0, ny = 0;
    std::vector<std::optional<double>> values;

    Position node(int ix, int iy) const {
        return Position{box.xmin + ix * cell_m, box.ymin + iy * cell_m};
    }
    const std::optional<double>& at(int ix, int iy) const {
        return values[static_cast<size_t>(iy) * static_cast<size_t>(nx) +
                      static_cast<size_t>(ix)];
    }
};

struct SurfaceResult {
    std::vector<Raster> layers;
    int n_nodes = 0;
    int n_nodata = 0;
    double nodata_fraction() const {
        return n_nodes ? static_cast<double>(n_nodata) / n_nodes : 0.0;
    }
};

/// Evaluate the fitted coefficient field on every grid node with the same
/// estimation path used for calibration. SGWR surfaces are de-standardized
/// with network-median per-variable statistics, since grid nodes carry no
/// sensor of their own.
SurfaceResult coefficient_surface(const Panel& panel, const ModelSpec& spec,
                                  const KernelSpec& kernel, ModelKind kind, const GridSpec& grid,
                                  const std::vector<int>& fit_hours,
                                  const WlsOptions& options = {}, int jobs = 1);

enum class LayerFormat { delimited_grid, geojson_points };

/// One delimited file per coefficient (x, y, value at 6 significant digits,
/// empty for no-data), or a single GeoJSON point collection with one
/// property per coefficient. Returns the written paths.
std::vector<std::string> export_layers(const SurfaceResult& surfaces,
                                       const std::string& directory, LayerFormat format);

} // namespace aircal
