#include "aircal/kernel.hpp"

#include "aircal/errors.hpp"

#include <cmath>

namespace aircal {

std::string kernel_kind_name(KernelSpec::Kind k) {
    return k == KernelSpec::Kind::gaussian ? "gaussian" : "gtwr";
}

std::optional<KernelSpec::Kind> kernel_kind_from_name(std::string_view name) {
    if (name == "gaussian") return KernelSpec::Kind::gaussian;
    if (name == "gtwr") return KernelSpec::Kind::gtwr;
    return std::nullopt;
}

namespace {
void check_bandwidth(double bandwidth_m) {
    if (!(bandwidth_m > 0.0)) throw NumericalError("kernel bandwidth must be > 0");
}
} // namespace

double gaussian_weight(Position s, Position s_j, double bandwidth_m) {
    check_bandwidth(bandwidth_m);
    return std::exp(-0.5 * squared_distance(s, s_j) / (bandwidth_m * bandwidth_m));
}

double gtwr_weight(Position s, Position s_j, double bandwidth_m, double target_hour,
                   double obs_hour, int time_exponent, bool wrap_hours) {
    double dh = std::abs(target_hour - obs_hour);
    if (wrap_hours) dh = std::min(dh, 24.0 - dh);
    return gaussian_weight(s, s_j, bandwidth_m) /
           (1.0 + std::pow(dh, static_cast<double>(time_exponent)));
}

std::vector<double> weight_vector(const KernelSpec& kernel, Position target,
                                  std::optional<double> target_hour,
                                  const std::vector<ObservationRow>& rows) {
    check_bandwidth(kernel.bandwidth_m);
    if (kernel.kind == KernelSpec::Kind::gtwr && !target_hour) {
        throw NumericalError("gtwr kernel needs a target hour");
    }
    std::vector<double> weights(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        if (kernel.kind == KernelSpec::Kind::gaussian) {
            weights[i] = gaussian_weight(target, rows[i].position, kernel.bandwidth_m);
        } else {
            weights[i] = gtwr_weight(target, rows[i].position, kernel.bandwidth_m, *target_hour,
                                     rows[i].hour_of_day, kernel.time_exponent, kernel.wrap_hours);
        }
    }
    return weights;
}

} // namespace aircal
