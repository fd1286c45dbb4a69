#pragma once

#include "aircal/gwr.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace aircal {

/// Spatially varying true coefficient for one design column.
struct CoefficientField {
    enum class Kind { constant, linear, gaussian_bump };
    Kind kind = Kind::constant;
    double value = 0.0;        // base level
    double gx = 0.0, gy = 0.0; // linear gradient per meter
    double amplitude = 0.0;    // bump height
    Position center{};
    double length_m = 1.0;     // bump length scale

    double at(Position s) const;
};

/// Synthetic network description. Station sites are laid out on a jittered
/// grid over the domain, deployed sensors uniformly at random. Every
/// collocated pair is one reference site plus one sensor site at the same
/// position.
struct SynthSpec {
    int n_stations = 9;
    int n_deployed = 0;
    int n_hours = 720;
    HourStamp start_hour = 442992; // 2020-07-15T00:00Z
    BoundingBox domain{0.0, 0.0, 3000.0, 3000.0};
    std::array<CoefficientField, 6> beta{}; // intercept, covariates..., pollutant
    double noise_sigma = 0.0;               // sd of the response error term
    double gain_min = 1.0, gain_max = 1.0;  // per (sensor, channel) gain range
    double offset_min = 0.0, offset_max = 0.0;
    bool shared_covariates = false; // all sites share one covariate draw
    double jitter_frac = 0.1;       // station grid jitter, fraction of spacing
};

struct SynthResult {
    Panel panel;
    ModelSpec model;
    // Ground truth per panel site: the coefficient field at the site and the
    // clean (noise-free) response series aligned with panel hours.
    std::vector<std::array<double, 6>> true_beta;
    std::vector<std::vector<double>> clean_y;
};

/// Deterministic: the same spec and seed always produce the same panel.
SynthResult generate(const SynthSpec& spec, std::uint64_t seed);

/// Independent OLS reference: orthogonalization-based (column-pivoted QR on
/// the raw design), deliberately a different factorization family than the
/// normal-equation estimator it cross-checks.
Eigen::VectorXd oracle_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

void write_truth(const std::string& path, const SynthResult& result);

} // namespace aircal
