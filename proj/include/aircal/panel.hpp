#pragma once

#include "aircal/types.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace aircal {

/// Hourly, site-aligned observation table. The sole data input of every
/// estimator. Cells are optional: a sensor-site cell is stored only when all
/// five covariate channels survived aggregation, a reference-site cell only
/// when the reference concentration is present.
class Panel {
public:
    Panel() = default;
    Panel(std::vector<SiteRecord> sites, std::vector<HourStamp> hours);

    const std::vector<SiteRecord>& sites() const { return sites_; }
    const std::vector<HourStamp>& hours() const { return hours_; }

    int n_sites() const { return static_cast<int>(sites_.size()); }
    int n_hours() const { return static_cast<int>(hours_.size()); }

    std::optional<int> site_index(std::string_view id) const;
    std::optional<int> hour_index(HourStamp h) const;

    const TimedSample* cell(int site, int hour_idx) const;
    /// Mutable cell access; creates the sample if absent.
    TimedSample& cell_mut(int site, int hour_idx);
    void clear_cell(int site, int hour_idx);

    /// Indices of sites with the given role.
    std::vector<int> sites_with_role(SiteRole role) const;
    /// Sensor sites (collocated first, then deployed), panel order.
    std::vector<int> sensor_sites() const;

    /// Index of the reference site paired with a collocated/deployed sensor,
    /// resolved through SiteRecord::paired_reference.
    std::optional<int> paired_reference(int sensor_site) const;

    /// Number of stored cells for one site.
    int cell_count(int site) const;

    /// Hour indices restricted to the given sorted day set (whole days).
    std::vector<int> hour_indices_in_days(const std::vector<DayStamp>& days) const;
    /// All hour indices.
    std::vector<int> all_hour_indices() const;

private:
    std::vector<SiteRecord> sites_;
    std::vector<HourStamp> hours_; // sorted, unique
    std::vector<std::optional<TimedSample>> cells_; // site-major, n_sites * n_hours
    std::unordered_map<std::string, int> site_by_id_;

    size_t at(int site, int hour_idx) const {
        return static_cast<size_t>(site) * hours_.size() + static_cast<size_t>(hour_idx);
    }
};

/// Panel table I/O: one row per stored (site, hour) cell, channel columns,
/// empty field for absent channels. Values round-trip exactly.
void write_panel(const std::string& path, const Panel& panel);
Panel read_panel(const std::string& panel_path, const std::string& sites_path);

/// Site registry I/O (projected coordinates in meters).
void write_sites(const std::string& path, const std::vector<SiteRecord>& sites);
std::vector<SiteRecord> read_sites(const std::string& path);

} // namespace aircal
