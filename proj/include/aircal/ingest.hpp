#pragma once

#include "aircal/types.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace aircal {

/// One minute-level measurement as it came off the raw file.
struct RawRecord {
    std::string device_id;
    MinuteStamp minute = 0;
    Channel channel = Channel::no2_na;
    double value = 0.0;
    int flag = 0;
};

/// Device renaming table, e.g. 4065DA -> ASE_A01. Must be bijective.
class RenameMap {
public:
    RenameMap() = default;
    explicit RenameMap(std::map<std::string, std::string> assoc);

    bool empty() const { return assoc_.empty(); }
    const std::string* lookup(const std::string& old_name) const;
    const std::map<std::string, std::string>& entries() const { return assoc_; }

private:
    std::map<std::string, std::string> assoc_;
};

/// Declarative description of a raw file layout.
struct IngestSchema {
    enum class Format { wide, long_form };
    Format format = Format::wide;
    char delimiter = 0; // 0 = auto-detect from the header line

    std::string time_column = "time";
    std::string device_column = "device";

    // wide: channel -> value column name, optional channel -> flag column name
    std::map<Channel, std::string> channel_columns;
    std::map<Channel, std::string> flag_columns;

    // long: fixed roles plus a mapping from file channel labels
    std::string channel_column = "channel";
    std::string value_column = "value";
    std::string flag_column; // optional
    std::map<std::string, Channel> channel_names;
};

struct LoadReport {
    long long rows_read = 0;
    long long rows_skipped = 0;   // malformed rows
    long long records_emitted = 0;
};

struct FlagReport {
    long long removed_total = 0;
    std::map<std::string, long long> removed_per_device;
};

/// Read one delimited file into minute records. Malformed rows are counted
/// and skipped; a missing mandatory column is a hard failure.
std::vector<RawRecord> load_raw(const std::string& path, const IngestSchema& schema,
                                LoadReport& report);

/// Drop records whose quality flag is in bad_flags.
std::vector<RawRecord> apply_flags(std::vector<RawRecord> records,
                                   const std::set<int>& bad_flags, FlagReport& report);

/// Replace device ids through the rename map. Ids listed in
/// reference_whitelist pass through unchanged; any other unmapped id is an
/// error naming all offenders.
std::vector<RawRecord> rename_devices(std::vector<RawRecord> records, const RenameMap& map,
                                      const std::set<std::string>& reference_whitelist);

inline constexpr double kGasConstant = 8.314;    // J / (mol K)
inline constexpr double kMolarMassNO2 = 46.0055; // g / mol

/// Perfect-gas conversion of a mixing ratio to a mass concentration.
double ppb_to_ugm3(double value_ppb, double pressure_pa, double temperature_k,
                   double molar_mass_g_mol = kMolarMassNO2);

/// Convert every ref_no2 record from ppb to µg·m⁻³, using the same device's
/// pressure/temperature channels at the same minute when present and the
/// given fallbacks otherwise.
std::vector<RawRecord> convert_reference_units(std::vector<RawRecord> records,
                                               double fallback_pressure_pa = 101325.0,
                                               double fallback_temperature_k = 293.15);

} // namespace aircal
