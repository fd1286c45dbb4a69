#include "aircal/csv.hpp"
#include "aircal/errors.hpp"
#include "aircal/grid.hpp"
#include "aircal/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace aircal;

namespace {

SynthSpec grid_spec(double sigma) {
    SynthSpec spec;
    spec.n_stations = 5;
    spec.n_hours = 24 * 8;
    spec.noise_sigma = sigma;
    spec.domain = {0.0, 0.0, 2000.0, 2000.0};
    spec.beta[0] = {CoefficientField::Kind::constant, 14.0};
    spec.beta[1] = {CoefficientField::Kind::constant, 0.5};
    spec.beta[2] = {CoefficientField::Kind::constant, -0.25};
    spec.beta[3] = {CoefficientField::Kind::constant, 0.2};
    spec.beta[4] = {CoefficientField::Kind::constant, -0.4};
    spec.beta[5] = {CoefficientField::Kind::constant, 2.0};
    return spec;
}

std::string temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "aircal_grid_tests";
    std::filesystem::create_directories(dir);
    return dir.string();
}

} // namespace

TEST_CASE("a single fit site yields constant surfaces") {
    SynthSpec spec = grid_spec(2.0);
    spec.n_stations = 1;
    SynthResult synth = generate(spec, 301);
    GridSpec grid{{0.0, 0.0, 1000.0, 1000.0}, 500.0, {}};
    KernelSpec kernel{KernelSpec::Kind::gaussian, 600.0};
    SurfaceResult result =
        coefficient_surface(synth.panel, synth.model, kernel, ModelKind::gwr, grid,
                            synth.panel.all_hour_indices());
    REQUIRE(result.layers.size() == 6);
    for (const auto& layer : result.layers) {
        REQUIRE(layer.nx == 3);
        REQUIRE(layer.ny == 3);
        double first = *layer.values[0];
        for (const auto& v : layer.values) {
            REQUIRE(v.has_value());
            CHECK(*v == doctest::Approx(first).epsilon(1e-10));
        }
    }
    CHECK(result.n_nodata == 0);
}

TEST_CASE("the surface at a fit site's node equals the direct fit bitwise") {
    SynthResult synth = generate(grid_spec(3.0), 303);
    const Panel& panel = synth.panel;
    std::vector<int> stations = panel.sites_with_role(SiteRole::collocated_sensor);
    Position site_pos = panel.sites()[stations[0]].position;

    GridSpec grid{{site_pos.x, site_pos.y, site_pos.x + 100.0, site_pos.y + 100.0}, 100.0, {}};
    KernelSpec kernel{KernelSpec::Kind::gaussian, 800.0};
    auto hours = panel.all_hour_indices();
    SurfaceResult surfaces =
        coefficient_surface(panel, synth.model, kernel, ModelKind::gwr, grid, hours);

    auto fits = fit_gwr(panel, synth.model, {{"site", site_pos, std::nullopt}}, kernel, stations,
                        hours);
    REQUIRE(fits[0].ok());
    for (size_t c = 0; c < 6; ++c) {
        CHECK(*surfaces.layers[c].values[0] == fits[0].model->beta[c]); // bitwise
    }
}

TEST_CASE("a linear coefficient plane is reproduced within a noise bound") {
    SynthSpec spec = grid_spec(1.0);
    spec.n_stations = 9;
    spec.n_hours = 24 * 12;
    spec.beta[0] = {CoefficientField::Kind::linear, 10.0, 0.002, -0.001};
    SynthResult synth = generate(spec, 307);
    GridSpec grid{{200.0, 200.0, 1800.0, 1800.0}, 400.0, {"intercept"}};
    KernelSpec kernel{KernelSpec::Kind::gaussian, 500.0};
    SurfaceResult surfaces =
        coefficient_surface(synth.panel, synth.model, kernel, ModelKind::gwr, grid,
                            synth.panel.all_hour_indices());
    REQUIRE(surfaces.layers.size() == 1);
    const Raster& layer = surfaces.layers[0];
    for (int iy = 0; iy < layer.ny; ++iy) {
        for (int ix = 0; ix < layer.nx; ++ix) {
            Position p = layer.node(ix, iy);
            double truth = 10.0 + 0.002 * p.x - 0.001 * p.y;
            REQUIRE(layer.at(ix, iy).has_value());
            CHECK(std::abs(*layer.at(ix, iy) - truth) < 1.5);
        }
    }
}

TEST_CASE("sgwr surfaces are exported in raw units") {
    SynthSpec spec = grid_spec(0.0);
    spec.gain_min = 0.8;
    spec.gain_max = 1.3;
    SynthResult synth = generate(spec, 311);
    GridSpec grid{{0.0, 0.0, 2000.0, 2000.0}, 1000.0, {"no2_na"}};
    KernelSpec kernel{KernelSpec::Kind::gaussian, 1500.0};
    SurfaceResult surfaces =
        coefficient_surface(synth.panel, synth.model, kernel, ModelKind::sgwr, grid,
                            synth.panel.all_hour_indices());
    // raw-unit pollutant coefficient should sit near the truth (2.0) up to the
    // median-statistics convention, far from standardized magnitudes
    for (const auto& v : surfaces.layers[0].values) {
        REQUIRE(v.has_value());
        CHECK(*v > 0.5);
        CHECK(*v < 4.0);
    }
}

TEST_CASE("delimited export: 2x2 grid writes 4 rows per layer and round-trips") {
    SynthResult synth = generate(grid_spec(2.0), 313);
    GridSpec grid{{0.0, 0.0, 900.0, 900.0}, 900.0, {"intercept", "no2_na"}};
    KernelSpec kernel{KernelSpec::Kind::gaussian, 700.0};
    SurfaceResult surfaces =
        coefficient_surface(synth.panel, synth.model, kernel, ModelKind::gwr, grid,
                            synth.panel.all_hour_indices());
    std::string dir = temp_dir();
    auto written = export_layers(surfaces, dir, LayerFormat::delimited_grid);
    REQUIRE(written.size() == 2);
    csv::Table t = csv::read_file(written[0]);
    CHECK(t.rows.size() == 4);
    // 6-digit round trip
    for (size_t i = 0; i < t.rows.size(); ++i) {
        double v = csv::parse_double(t.rows[i][2]).value();
        CHECK(csv::format_double(v, 6) == t.rows[i][2]);
    }
}

TEST_CASE("geojson export has one feature per node and a property per coefficient") {
    SynthResult synth = generate(grid_spec(2.0), 317);
    GridSpec grid{{0.0, 0.0, 1000.0, 1000.0}, 500.0, {}};
    KernelSpec kernel{KernelSpec::Kind::gaussian, 700.0};
    SurfaceResult surfaces =
        coefficient_surface(synth.panel, synth.model, kernel, ModelKind::gwr, grid,
                            synth.panel.all_hour_indices());
    std::string dir = temp_dir();
    auto written = export_layers(surfaces, dir, LayerFormat::geojson_points);
    REQUIRE(written.size() == 1);
    std::ifstream in(written[0]);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("FeatureCollection") != std::string::npos);
    size_t count = 0, pos = 0;
    while ((pos = text.find("\"Feature\"", pos)) != std::string::npos) {
        ++count;
        pos += 9;
    }
    CHECK(count == 9); // 3x3 nodes
    CHECK(text.find("no2_na") != std::string::npos);
}

TEST_CASE("degenerate grids are rejected") {
    SynthResult synth = generate(grid_spec(1.0), 319);
    KernelSpec kernel{KernelSpec::Kind::gaussian, 700.0};
    GridSpec bad{{0.0, 0.0, 1000.0, 1000.0}, 0.0, {}};
    CHECK_THROWS_AS(coefficient_surface(synth.panel, synth.model, kernel, ModelKind::gwr, bad,
                                        synth.panel.all_hour_indices()),
                    ConfigError);
    GridSpec flat{{0.0, 0.0, 0.0, 1000.0}, 100.0, {}};
    CHECK_THROWS_AS(coefficient_surface(synth.panel, synth.model, kernel, ModelKind::gwr, flat,
                                        synth.panel.all_hour_indices()),
                    ConfigError);
}
