#include "aircal/types.hpp"

namespace aircal {

namespace {
constexpr std::string_view kChannelNames[kChannelCount] = {
    "no2_na", "no_na", "co_na", "rh_pct", "t_c", "p_mbar", "ref_no2"};
constexpr std::string_view kChannelUnits[kChannelCount] = {
    "nA", "nA", "nA", "%", "degC", "mbar", "ug/m3"};
constexpr std::string_view kRoleNames[] = {"reference", "collocated_sensor", "deployed_sensor"};
constexpr std::string_view kTypologyNames[] = {
    "urban_traffic", "urban_industry", "urban_background",
    "suburban_traffic", "suburban_background"};
} // namespace

std::string_view channel_name(Channel c) { return kChannelNames[static_cast<int>(c)]; }
std::string_view channel_unit(Channel c) { return kChannelUnits[static_cast<int>(c)]; }

std::optional<Channel> channel_from_name(std::string_view name) {
    for (int i = 0; i < kChannelCount; ++i) {
        if (kChannelNames[i] == name) return static_cast<Channel>(i);
    }
    return std::nullopt;
}

std::string_view role_name(SiteRole r) { return kRoleNames[static_cast<int>(r)]; }

std::optional<SiteRole> role_from_name(std::string_view name) {
    for (int i = 0; i < 3; ++i) {
        if (kRoleNames[i] == name) return static_cast<SiteRole>(i);
    }
    return std::nullopt;
}

std::string_view typology_name(Typology t) { return kTypologyNames[static_cast<int>(t)]; }

std::optional<Typology> typology_from_name(std::string_view name) {
    for (int i = 0; i < 5; ++i) {
        if (kTypologyNames[i] == name) return static_cast<Typology>(i);
    }
    return std::nullopt;
}

int typology_class(Typology t) {
    switch (t) {
    case Typology::urban_traffic:
    case Typology::suburban_traffic: return 0;
    case Typology::urban_industry: return 1;
    case Typology::urban_background:
    case Typology::suburban_background: return 2;
    }
    return 2;
}

} // namespace aircal
