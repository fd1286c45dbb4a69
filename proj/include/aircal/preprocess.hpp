#pragma once

#include "aircal/ingest.hpp"
#include "aircal/panel.hpp"

#include <map>
#include <vector>

namespace aircal {

/// Aggregated value for one (device, channel) at one period start.
struct AggRecord {
    std::string device_id;
    Channel channel = Channel::no2_na;
    MinuteStamp period_start = 0; // quarter start (minutes) or hour start (hours*60)
    double value = 0.0;
};

struct AggregationStats {
    long long periods_emitted = 0;
    long long periods_dropped = 0; // insufficient coverage
};

// Quarter-hours align to :00/:15/:30/:45, hours to :00 UTC.
inline constexpr int kMinMinutesPerQuarter = 12; // 75% of 15
inline constexpr int kMinQuartersPerHour = 3;

/// Minute records -> quarter-hour means. A quarter is retained iff at least
/// 12 of its 15 minutes have values; the mean runs over available minutes.
std::vector<AggRecord> minutes_to_quarters(const std::vector<RawRecord>& records,
                                           AggregationStats& stats);

/// Quarter means -> hourly means. An hour is retained iff at least 3 of its
/// 4 quarters are present; the value averages the available quarter means.
std::vector<AggRecord> quarters_to_hours(const std::vector<AggRecord>& quarters,
                                         AggregationStats& stats);

struct PanelBuildStats {
    std::map<std::string, int> cells_complete;  // per site
    std::map<std::string, int> cells_dropped;   // incomplete sensor cells per site
};

/// Assemble the hourly panel. A sensor cell is kept only when all five
/// covariate channels are present for that (site, hour); reference cells
/// carry the reference concentration. A device id without a registry entry
/// is a hard failure.
Panel build_panel(const std::vector<AggRecord>& hourly, std::vector<SiteRecord> sites,
                  PanelBuildStats& stats);

} // namespace aircal
