#include "aircal/ingest.hpp"

#include "aircal/csv.hpp"
#include "aircal/errors.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace aircal {

RenameMap::RenameMap(std::map<std::string, std::string> assoc) : assoc_(std::move(assoc)) {
    std::set<std::string> seen;
    for (const auto& [from, to] : assoc_) {
        if (!seen.insert(to).second) {
            throw ConfigError("rename map is not bijective, duplicate target: " + to);
        }
    }
}

const std::string* RenameMap::lookup(const std::string& old_name) const {
    auto it = assoc_.find(old_name);
    return it == assoc_.end() ? nullptr : &it->second;
}

namespace {

int require_column(const csv::Table& t, const std::string& name, const std::string& path) {
    auto idx = t.column(name);
    if (!idx) throw DataError("missing mandatory column '" + name + "' in " + path);
    return *idx;
}

bool row_get(const std::vector<std::string>& row, int col, std::string& out) {
    if (col < 0 || static_cast<size_t>(col) >= row.size()) return false;
    out = row[static_cast<size_t>(col)];
    return true;
}

} // namespace

std::vector<RawRecord> load_raw(const std::string& path, const IngestSchema& schema,
                                LoadReport& report) {
    csv::Table t = csv::read_file(path, schema.delimiter);
    std::vector<RawRecord> records;
    if (t.header.empty()) return records; // empty file

    const int time_col = require_column(t, schema.time_column, path);
    const int dev_col = require_column(t, schema.device_column, path);

    if (schema.format == IngestSchema::Format::wide) {
        if (schema.channel_columns.empty()) {
            throw ConfigError("wide schema declares no channel columns");
        }
        struct Col {
            Channel channel;
            int value_col;
            int flag_col; // -1 when absent
        };
        std::vector<Col> cols;
        for (const auto& [ch, name] : schema.channel_columns) {
            Col c{ch, require_column(t, name, path), -1};
            auto fit = schema.flag_columns.find(ch);
            if (fit != schema.flag_columns.end()) {
                c.flag_col = require_column(t, fit->second, path);
            }
            cols.push_back(c);
        }
        for (const auto& row : t.rows) {
            ++report.rows_read;
            try {
                std::string ts, dev;
                if (!row_get(row, time_col, ts) || !row_get(row, dev_col, dev) || dev.empty()) {
                    throw DataError("short row");
                }
                MinuteStamp minute = parse_minute(ts);
                std::vector<RawRecord> pending;
                for (const Col& c : cols) {
                    std::string field;
                    if (!row_get(row, c.value_col, field)) throw DataError("short row");
                    auto value = csv::parse_double(field);
                    if (!value) continue; // absent channel value is not malformed
                    int flag = 0;
                    if (c.flag_col >= 0) {
                        std::string ff;
                        row_get(row, c.flag_col, ff);
                        flag = static_cast<int>(csv::parse_int(ff).value_or(0));
                    }
                    pending.push_back(RawRecord{dev, minute, c.channel, *value, flag});
                }
                for (auto& r : pending) records.push_back(std::move(r));
                report.records_emitted += static_cast<long long>(pending.size());
            } catch (const DataError&) {
                ++report.rows_skipped;
            }
        }
    } else {
        const int chan_col = require_column(t, schema.channel_column, path);
        const int value_col = require_column(t, schema.value_column, path);
        int flag_col = -1;
        if (!schema.flag_column.empty()) flag_col = require_column(t, schema.flag_column, path);
        for (const auto& row : t.rows) {
            ++report.rows_read;
            try {
                std::string ts, dev, chan, value_s;
                if (!row_get(row, time_col, ts) || !row_get(row, dev_col, dev) ||
                    !row_get(row, chan_col, chan) || !row_get(row, value_col, value_s) ||
                    dev.empty()) {
                    throw DataError("short row");
                }
                auto cit = schema.channel_names.find(chan);
                if (cit == schema.channel_names.end()) {
                    throw DataError("unknown channel label " + chan);
                }
                auto value = csv::parse_double(value_s);
                if (!value) throw DataError("missing value");
                int flag = 0;
                if (flag_col >= 0) {
                    std::string ff;
                    row_get(row, flag_col, ff);
                    flag = static_cast<int>(csv::parse_int(ff).value_or(0));
                }
                records.push_back(RawRecord{dev, parse_minute(ts), cit->second, *value, flag});
                ++report.records_emitted;
            } catch (const DataError&) {
                ++report.rows_skipped;
            }
        }
    }

    // Deterministic order regardless of file layout: per device, by time.
    std::stable_sort(records.begin(), records.end(), [](const RawRecord& a, const RawRecord& b) {
        if (a.device_id != b.device_id) return a.device_id < b.device_id;
        if (a.minute != b.minute) return a.minute < b.minute;
        return static_cast<int>(a.channel) < static_cast<int>(b.channel);
    });
    return records;
}

std::vector<RawRecord> apply_flags(std::vector<RawRecord> records, const std::set<int>& bad_flags,
                                   FlagReport& report) {
    if (bad_flags.empty()) return records;
    std::vector<RawRecord> out;
    out.reserve(records.size());
    for (auto& r : records) {
        if (bad_flags.count(r.flag)) {
            ++report.removed_total;
            ++report.removed_per_device[r.device_id];
        } else {
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<RawRecord> rename_devices(std::vector<RawRecord> records, const RenameMap& map,
                                      const std::set<std::string>& reference_whitelist) {
    std::set<std::string> unknown;
    for (auto& r : records) {
        if (const std::string* renamed = map.lookup(r.device_id)) {
            r.device_id = *renamed;
        } else if (!reference_whitelist.count(r.device_id)) {
            unknown.insert(r.device_id);
        }
    }
    if (!unknown.empty()) {
        std::ostringstream oss;
        oss << "unmapped device ids:";
        for (const auto& id : unknown) oss << ' ' << id;
        throw DataError(oss.str());
    }
    return records;
}

double ppb_to_ugm3(double value_ppb, double pressure_pa, double temperature_k,
                   double molar_mass_g_mol) {
    if (!(temperature_k > 0.0)) throw DataError("temperature must be positive (kelvin)");
    if (!(pressure_pa > 0.0)) throw DataError("pressure must be positive (Pa)");
    return value_ppb * pressure_pa * molar_mass_g_mol / (1000.0 * kGasConstant * temperature_k);
}

std::vector<RawRecord> convert_reference_units(std::vector<RawRecord> records,
                                               double fallback_pressure_pa,
                                               double fallback_temperature_k) {
    // Same-device same-minute P/T lookup.
    std::map<std::pair<std::string, MinuteStamp>, std::pair<double, double>> pt;
    for (const auto& r : records) {
        if (r.channel == Channel::p_mbar) {
            pt[{r.device_id, r.minute}].first = r.value * 100.0; // mbar -> Pa
        } else if (r.channel == Channel::t_c) {
            pt[{r.device_id, r.minute}].second = r.value + 273.15;
        }
    }
    for (auto& r : records) {
        if (r.channel != Channel::ref_no2) continue;
        double p = fallback_pressure_pa;
        double t = fallback_temperature_k;
        auto it = pt.find({r.device_id, r.minute});
        if (it != pt.end()) {
            if (it->second.first > 0.0) p = it->second.first;
            if (it->second.second > 0.0) t = it->second.second;
        }
        r.value = ppb_to_ugm3(r.value, p, t);
    }
    return records;
}

} // namespace aircal
