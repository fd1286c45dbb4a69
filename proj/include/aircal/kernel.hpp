#pragma once

#include "aircal/geo.hpp"
#include "aircal/timeutil.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aircal {

/// Weight function for local estimation. The bandwidth B is the distance at
/// which the Gaussian weight equals exp(-0.5).
struct KernelSpec {
    enum class Kind { gaussian, gtwr };
    Kind kind = Kind::gaussian;
    double bandwidth_m = 0.0;
    int time_exponent = 3;   // fixed for gtwr
    bool wrap_hours = false; // circular hour-of-day distance, off by default

    /// Equivalent exponential-form rate: w = exp(-lambda * d^2).
    double lambda() const { return 1.0 / (2.0 * bandwidth_m * bandwidth_m); }
};

std::string kernel_kind_name(KernelSpec::Kind k);
std::optional<KernelSpec::Kind> kernel_kind_from_name(std::string_view name);

/// exp(-0.5 * |s - s_j|^2 / B^2); equals exp(-0.5) at distance B.
double gaussian_weight(Position s, Position s_j, double bandwidth_m);

/// Spatio-temporal weight: the Gaussian factor times 1 / (1 + |h - h_obs|^q)
/// with q = time_exponent. Hours are hour-of-day values in [0, 24).
double gtwr_weight(Position s, Position s_j, double bandwidth_m, double target_hour,
                   double obs_hour, int time_exponent = 3, bool wrap_hours = false);

/// One (position, hour-of-day) per observation row.
struct ObservationRow {
    Position position;
    double hour_of_day = 0.0;
};

/// One weight per row. A site observed n_k times contributes its site weight
/// n_k times. For a gtwr kernel target_hour must be set.
std::vector<double> weight_vector(const KernelSpec& kernel, Position target,
                                  std::optional<double> target_hour,
                                  const std::vector<ObservationRow>& rows);

} // namespace aircal
