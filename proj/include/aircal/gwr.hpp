#pragma once

#include "aircal/kernel.hpp"
#include "aircal/panel.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aircal {

/// Calibration model structure: response is the reference concentration,
/// design columns are intercept, the covariate channels, then the pollutant
/// channel of the sensor itself.
struct ModelSpec {
    std::vector<Channel> covariates = {Channel::no_na, Channel::co_na, Channel::rh_pct,
                                       Channel::t_c};
    Channel pollutant = Channel::no2_na;

    int n_columns() const { return static_cast<int>(covariates.size()) + 2; }
    /// Channel of design column i (1-based through covariates, last = pollutant).
    Channel column_channel(int i) const;
    std::vector<std::string> column_names() const;
};

/// Stacked complete-case regression rows from a set of sensor sites, each
/// joined with its paired reference station by hour.
struct DesignSlice {
    ModelSpec spec;
    Eigen::MatrixXd x; // n x (p+2)
    Eigen::VectorXd y; // reference concentration
    std::vector<int> site;          // sensor site index per row
    std::vector<HourStamp> hour;    // hour stamp per row
    std::vector<ObservationRow> rows; // position + hour-of-day per row, for weighting

    int n_rows() const { return static_cast<int>(x.rows()); }
};

/// Rows for the given sensor sites over the given panel hour indices. A row
/// exists where the sensor cell is complete and the paired reference value
/// is present.
DesignSlice collect_design(const Panel& panel, const ModelSpec& spec,
                           const std::vector<int>& sensor_sites,
                           const std::vector<int>& hour_indices);

struct WlsOptions {
    double condition_limit = 1e12;
    bool diagonal_jitter = false; // optional ridge of 1e-8 * trace/p, off by default
};

/// A fitted local calibration model.
struct LocalModel {
    std::string target_id;
    Position target{};
    std::optional<int> target_hour; // gtwr models are per hour of day
    ModelSpec spec;
    std::vector<double> beta;           // design-column order
    std::optional<KernelSpec> kernel;   // absent for pointwise baselines
    double condition = 0.0;             // normal-matrix condition estimate
    double weight_mass = 0.0;           // sum of fitting weights
};

/// Weighted least squares via the normal equations and a Cholesky solve.
/// Throws SingularFitError when the normal matrix is not positive definite
/// within the condition limit.
LocalModel fit_wls(const DesignSlice& slice, const Eigen::VectorXd& weights,
                   const WlsOptions& options = {});

/// The criterion minimized by fit_wls.
double wls_objective(const DesignSlice& slice, const Eigen::VectorXd& weights,
                     const std::vector<double>& beta);

struct GwrTarget {
    std::string id;
    Position position{};
    std::optional<int> hour_of_day; // required by gtwr kernels
};

/// Per-target outcome; a singular local fit is recorded without aborting the
/// other targets.
struct LocalFit {
    std::optional<LocalModel> model;
    std::string error;
    double condition = 0.0;

    bool ok() const { return model.has_value(); }
};

std::vector<LocalFit> fit_gwr(const DesignSlice& slice, const std::vector<GwrTarget>& targets,
                              const KernelSpec& kernel, const WlsOptions& options = {},
                              int jobs = 1);

std::vector<LocalFit> fit_gwr(const Panel& panel, const ModelSpec& spec,
                              const std::vector<GwrTarget>& targets, const KernelSpec& kernel,
                              const std::vector<int>& fit_sites,
                              const std::vector<int>& hour_indices,
                              const WlsOptions& options = {}, int jobs = 1);

/// Per-(site, variable) standardization statistics from the fitting sample.
class Standardizer {
public:
    struct Entry {
        double mean = 0.0;
        double sd = 1.0;
    };

    void set(int site, Channel ch, Entry e) { stats_[{site, static_cast<int>(ch)}] = e; }
    const Entry* find(int site, Channel ch) const;
    Entry require(int site, Channel ch, const std::string& site_id) const;

    /// Sensor sites that had no fitting rows; their cells are dropped from
    /// the standardized panel.
    std::vector<std::string> skipped_sites;

    /// Network-median statistics per channel, for de-standardizing at
    /// locations without a sensor (grid nodes).
    Entry median_entry(Channel ch) const;

private:
    std::map<std::pair<int, int>, Entry> stats_;
};

/// Per-sensor standardization of the design channels over the fitting hours.
/// The response is never standardized. A zero-variance variable is an error
/// naming the (site, variable).
std::pair<Panel, Standardizer> standardize(const Panel& panel, const ModelSpec& spec,
                                           const std::vector<int>& fit_hour_indices);

/// Map a standardized-space model back to raw units using site j's stats.
LocalModel destandardize(const LocalModel& model, const Standardizer& std_stats, int site,
                         const std::string& site_id);

/// De-standardize with explicit per-channel entries (grid-node convention).
LocalModel destandardize_with(const LocalModel& model,
                              const std::vector<Standardizer::Entry>& entries);

/// Fit SGWR at sensor targets: standardize on the fitting hours, fit in
/// standardized space at each target sensor's position, then de-standardize
/// with that sensor's own statistics.
std::vector<LocalFit> fit_sgwr(const Panel& panel, const ModelSpec& spec,
                               const std::vector<int>& target_sensor_sites,
                               const KernelSpec& kernel, const std::vector<int>& fit_sites,
                               const std::vector<int>& fit_hour_indices,
                               const WlsOptions& options = {}, int jobs = 1);

/// Corrected concentration for one sample: beta0 + sum_i beta_i X_i + beta_MS P.
/// Negative outputs are returned as-is; counting them is the caller's job.
double correct(const LocalModel& model, const TimedSample& sample);

/// Model-set table I/O; numbers are written at 12 significant digits and
/// round-trip bit-exactly.
void write_models(const std::string& path, const std::vector<LocalModel>& models);
std::vector<LocalModel> read_models(const std::string& path);

} // namespace aircal
