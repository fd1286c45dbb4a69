#pragma once

#include "aircal/geo.hpp"
#include "aircal/timeutil.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace aircal {

/// Measurement channels. Gas channels are raw amperages (nA), the reference
/// channel is a concentration in µg·m⁻³.
enum class Channel : int {
    no2_na = 0,
    no_na = 1,
    co_na = 2,
    rh_pct = 3,
    t_c = 4,
    p_mbar = 5,
    ref_no2 = 6,
};

inline constexpr int kChannelCount = 7;

// The five sensor channels a panel cell must carry to be complete.
inline constexpr std::array<Channel, 5> kSensorCovariateChannels = {
    Channel::no2_na, Channel::no_na, Channel::co_na, Channel::rh_pct, Channel::t_c};

std::string_view channel_name(Channel c);
std::string_view channel_unit(Channel c);
std::optional<Channel> channel_from_name(std::string_view name);

/// One hour of observations at one site.
struct TimedSample {
    std::array<std::optional<double>, kChannelCount> values{};

    std::optional<double>& operator[](Channel c) { return values[static_cast<int>(c)]; }
    const std::optional<double>& operator[](Channel c) const {
        return values[static_cast<int>(c)];
    }

    /// True when all five sensor covariate channels are present.
    bool covariates_complete() const {
        for (Channel c : kSensorCovariateChannels) {
            if (!(*this)[c].has_value()) return false;
        }
        return true;
    }

    bool empty() const {
        for (const auto& v : values) {
            if (v.has_value()) return false;
        }
        return true;
    }
};

enum class SiteRole { reference, collocated_sensor, deployed_sensor };

enum class Typology {
    urban_traffic,
    urban_industry,
    urban_background,
    suburban_traffic,
    suburban_background,
};

std::string_view role_name(SiteRole r);
std::optional<SiteRole> role_from_name(std::string_view name);
std::string_view typology_name(Typology t);
std::optional<Typology> typology_from_name(std::string_view name);

/// Traffic / industry / background class, ignoring the urban-suburban axis.
int typology_class(Typology t);

struct SiteRecord {
    std::string id;
    Position position{};
    SiteRole role = SiteRole::deployed_sensor;
    Typology typology = Typology::urban_background;
    std::string paired_reference; // required for collocated sensors

    bool is_sensor() const { return role != SiteRole::reference; }
};

} // namespace aircal
