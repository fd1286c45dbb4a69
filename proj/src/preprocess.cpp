#include "aircal/preprocess.hpp"

#include "aircal/errors.hpp"

#include <algorithm>
#include <map>

namespace aircal {

namespace {

struct GroupKey {
    std::string device;
    Channel channel;
    MinuteStamp period;
    bool operator<(const GroupKey& o) const {
        if (device != o.device) return device < o.device;
        if (channel != o.channel) return channel < o.channel;
        return period < o.period;
    }
};

} // namespace

std::vector<AggRecord> minutes_to_quarters(const std::vector<RawRecord>& records,
                                           AggregationStats& stats) {
    // Distinct minutes per (device, channel, quarter); a duplicated minute
    // keeps the last value seen so reruns stay deterministic.
    std::map<GroupKey, std::map<MinuteStamp, double>> groups;
    for (const auto& r : records) {
        MinuteStamp quarter = (r.minute / 15) * 15;
        if (r.minute < 0 && r.minute % 15 != 0) quarter -= 15;
        groups[{r.device_id, r.channel, quarter}][r.minute] = r.value;
    }
    std::vector<AggRecord> out;
    for (const auto& [key, minutes] : groups) {
        if (static_cast<int>(minutes.size()) < kMinMinutesPerQuarter) {
            ++stats.periods_dropped;
            continue;
        }
        double sum = 0.0;
        for (const auto& [m, v] : minutes) sum += v;
        out.push_back(AggRecord{key.device, key.channel, key.period,
                                sum / static_cast<double>(minutes.size())});
        ++stats.periods_emitted;
    }
    return out;
}

std::vector<AggRecord> quarters_to_hours(const std::vector<AggRecord>& quarters,
                                         AggregationStats& stats) {
    std::map<GroupKey, std::vector<double>> groups;
    for (const auto& q : quarters) {
        MinuteStamp hour_start = (q.period_start / 60) * 60;
        if (q.period_start < 0 && q.period_start % 60 != 0) hour_start -= 60;
        groups[{q.device_id, q.channel, hour_start}].push_back(q.value);
    }
    std::vector<AggRecord> out;
    for (const auto& [key, values] : groups) {
        if (static_cast<int>(values.size()) < kMinQuartersPerHour) {
            ++stats.periods_dropped;
            continue;
        }
        double sum = 0.0;
        for (double v : values) sum += v;
        out.push_back(
            AggRecord{key.device, key.channel, key.period, sum / static_cast<double>(values.size())});
        ++stats.periods_emitted;
    }
    return out;
}

Panel build_panel(const std::vector<AggRecord>& hourly, std::vector<SiteRecord> sites,
                  PanelBuildStats& stats) {
    std::vector<HourStamp> hours;
    hours.reserve(hourly.size());
    for (const auto& r : hourly) hours.push_back(minute_to_hour(r.period_start));
    Panel panel(std::move(sites), std::move(hours));

    for (const auto& r : hourly) {
        auto site = panel.site_index(r.device_id);
        if (!site) throw DataError("record references site absent from registry: " + r.device_id);
        auto hidx = panel.hour_index(minute_to_hour(r.period_start));
        panel.cell_mut(*site, *hidx)[r.channel] = r.value;
    }

    // Completeness pass: sensor cells need all covariates, reference cells
    // need the reference concentration. Everything else is dropped.
    for (int s = 0; s < panel.n_sites(); ++s) {
        const SiteRecord& site = panel.sites()[s];
        for (int h = 0; h < panel.n_hours(); ++h) {
            const TimedSample* cell = panel.cell(s, h);
            if (!cell) continue;
            bool keep;
            if (site.role == SiteRole::reference) {
                keep = (*cell)[Channel::ref_no2].has_value();
            } else {
                keep = cell->covariates_complete();
            }
            if (keep) {
                ++stats.cells_complete[site.id];
            } else {
                ++stats.cells_dropped[site.id];
                panel.clear_cell(s, h);
            }
        }
    }
    return panel;
}

} // namespace aircal
