#pragma once

#include "aircal/baseline.hpp"
#include "aircal/gwr.hpp"

#include <span>
#include <string>
#include <vector>

namespace aircal {

/// Deterministic three-way day split of the study period. S0 feeds the
/// pointwise baselines, S1 the local models, S2 is held out for testing.
struct SplitSpec {
    DayStamp start_day = 0;
    DayStamp end_day = 0; // inclusive
    int s0_stride = 8;
    // Explicit calendars override the rule (all three together).
    std::optional<std::vector<DayStamp>> explicit_s0, explicit_s1, explicit_s2;
};

struct DaySplit {
    std::vector<DayStamp> s0, s1, s2; // sorted absolute days
    double frac0 = 0.0, frac1 = 0.0, frac2 = 0.0;

    int n_days() const {
        return static_cast<int>(s0.size() + s1.size() + s2.size());
    }
};

// The deterministic rule's analytic long-run fractions (%).
inline constexpr double kRuleFractions[3] = {12.5, 175.0 / 3.0, 175.0 / 6.0};
// Fractions reported in the source study (%), shown for comparison only.
inline constexpr double kStudyFractions[3] = {12.8, 61.1, 26.1};

/// Day d (0-based from the period start) goes to S0 when d mod stride = 0,
/// otherwise to S1 when d mod 3 is 0 or 1, else to S2.
DaySplit split_days(const SplitSpec& spec);

double rmse(std::span<const double> predicted, std::span<const double> reference);

/// Percentage of explained variance; can be negative. Errors on a
/// zero-variance reference.
double explained_variance_pct(std::span<const double> predicted,
                              std::span<const double> reference);

/// Strictly negative values in a corrected series.
int negative_count(std::span<const double> values);

enum class ModelKind { collocated, noncollocated, gwr, sgwr };
std::string_view model_kind_name(ModelKind k);
std::optional<ModelKind> model_kind_from_name(std::string_view name);

struct CvPrediction {
    int site = 0; // sensor site index
    HourStamp hour = 0;
    double predicted = 0.0;
    double reference = 0.0;
};

struct FoldResult {
    std::string site;
    bool ok = false;
    std::string error;
    double rmse = 0.0;
    double ev_pct = 0.0;
    int n = 0;
    int negatives = 0;
    std::optional<LocalModel> model;
};

struct LoocvOutcome {
    std::vector<FoldResult> folds;
    double cv_rmse = 0.0; // mean of per-fold RMSE over successful folds
    int failed_folds = 0;
    std::vector<CvPrediction> predictions;
};

/// Leave-one-out over the collocated stations: fit on the fitting hours of
/// every other station, predict the held-out sensor over the test hours,
/// score against its own reference. Singular folds are excluded from the
/// average instead of aborting.
LoocvOutcome loocv_core(const Panel& panel, const ModelSpec& spec, const KernelSpec& kernel,
                        ModelKind kind, const std::vector<int>& fit_hours,
                        const std::vector<int>& test_hours, const WlsOptions& options = {},
                        int jobs = 1);

/// Spatial RMSE at one timestamp, grouped later by hour of day. Timestamps
/// missing any expected site are skipped and tallied.
struct HourlyRmse {
    HourStamp hour = 0;
    int hour_of_day = 0;
    double rmse = 0.0;
    int n_sites = 0;
};

std::vector<HourlyRmse> rmse_by_hour(std::span<const CvPrediction> predictions,
                                     int expected_sites, int* skipped = nullptr);

/// Per-sensor score of one model family on the held-out sample.
struct SensorScore {
    std::string sensor;
    std::string model;
    bool scored = false; // false for deployed sensors (no reference)
    double rmse = 0.0;
    double ev_pct = 0.0;
    int n = 0;
    int negatives = 0;
    std::string error;
};

/// Everything one validation run produces.
struct EvalReport {
    SplitSpec split_spec;
    DaySplit split;
    std::optional<KernelSpec> kernel;
    PairingPlan pairing;
    std::vector<SensorScore> scores; // S2 scores, all requested model kinds
    std::string cv_model;
    LoocvOutcome cv;
    std::vector<HourlyRmse> hourly;
    int hourly_skipped = 0;
};

LoocvOutcome loocv(const Panel& panel, const ModelSpec& spec, const KernelSpec& kernel,
                   ModelKind kind, const DaySplit& split, const WlsOptions& options = {},
                   int jobs = 1);

/// Fit the requested model families and score every sensor on the test
/// sample; deployed sensors get corrected-series negative counts only.
std::vector<SensorScore> score_models(const Panel& panel, const ModelSpec& spec,
                                      const KernelSpec& kernel, const DaySplit& split,
                                      const PairingPlan& plan,
                                      const std::vector<ModelKind>& kinds,
                                      const WlsOptions& options = {}, int jobs = 1);

struct BandwidthCurve {
    std::vector<double> candidates_m;
    std::vector<double> cv_rmse; // NaN where every fold failed
    double best_bandwidth_m = 0.0;
    double best_cv_rmse = 0.0;
};

/// Evaluate the cross-validated RMSE on the learning sample for each
/// candidate bandwidth and return the minimizer (ties go to the smaller
/// bandwidth).
BandwidthCurve bandwidth_search(const Panel& panel, const ModelSpec& spec,
                                KernelSpec::Kind kernel_kind, ModelKind model_kind,
                                std::span<const double> candidates_m, const DaySplit& split,
                                const WlsOptions& options = {}, int jobs = 1);

/// Default candidate grid: 200 m to 5000 m in 20 m steps.
std::vector<double> default_bandwidth_grid();

// Report emission: one machine-readable table per section plus a
// human-readable summary.
void write_scores_csv(const std::string& path, const std::vector<SensorScore>& scores);
void write_folds_csv(const std::string& path, const std::vector<FoldResult>& folds);
void write_hourly_csv(const std::string& path, const std::vector<HourlyRmse>& hourly);
void write_pairing_csv(const std::string& path, const PairingPlan& plan);
void write_curve_csv(const std::string& path, const BandwidthCurve& curve);
void write_report_txt(const std::string& path, const EvalReport& report);

} // namespace aircal
