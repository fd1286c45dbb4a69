#include "aircal/panel.hpp"

#include "aircal/csv.hpp"
#include "aircal/errors.hpp"

#include <algorithm>

namespace aircal {

Panel::Panel(std::vector<SiteRecord> sites, std::vector<HourStamp> hours)
    : sites_(std::move(sites)), hours_(std::move(hours)) {
    std::sort(hours_.begin(), hours_.end());
    hours_.erase(std::unique(hours_.begin(), hours_.end()), hours_.end());
    cells_.assign(sites_.size() * hours_.size(), std::nullopt);
    for (size_t i = 0; i < sites_.size(); ++i) {
        auto [it, inserted] = site_by_id_.emplace(sites_[i].id, static_cast<int>(i));
        if (!inserted) throw DataError("duplicate site id in registry: " + sites_[i].id);
    }
    for (const auto& s : sites_) {
        if (s.role == SiteRole::collocated_sensor && s.paired_reference.empty()) {
            throw DataError("collocated sensor without paired reference: " + s.id);
        }
        if (!s.paired_reference.empty() && !site_by_id_.count(s.paired_reference)) {
            throw DataError("site " + s.id + " pairs unknown reference " + s.paired_reference);
        }
    }
}

std::optional<int> Panel::site_index(std::string_view id) const {
    auto it = site_by_id_.find(std::string(id));
    if (it == site_by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> Panel::hour_index(HourStamp h) const {
    auto it = std::lower_bound(hours_.begin(), hours_.end(), h);
    if (it == hours_.end() || *it != h) return std::nullopt;
    return static_cast<int>(it - hours_.begin());
}

const TimedSample* Panel::cell(int site, int hour_idx) const {
    const auto& c = cells_[at(site, hour_idx)];
    return c.has_value() ? &*c : nullptr;
}

TimedSample& Panel::cell_mut(int site, int hour_idx) {
    auto& c = cells_[at(site, hour_idx)];
    if (!c.has_value()) c.emplace();
    return *c;
}

void Panel::clear_cell(int site, int hour_idx) { cells_[at(site, hour_idx)].reset(); }

std::vector<int> Panel::sites_with_role(SiteRole role) const {
    std::vector<int> out;
    for (int i = 0; i < n_sites(); ++i) {
        if (sites_[i].role == role) out.push_back(i);
    }
    return out;
}

std::vector<int> Panel::sensor_sites() const {
    std::vector<int> out = sites_with_role(SiteRole::collocated_sensor);
    auto deployed = sites_with_role(SiteRole::deployed_sensor);
    out.insert(out.end(), deployed.begin(), deployed.end());
    return out;
}

std::optional<int> Panel::paired_reference(int sensor_site) const {
    const auto& ref = sites_[sensor_site].paired_reference;
    if (ref.empty()) return std::nullopt;
    return site_index(ref);
}

int Panel::cell_count(int site) const {
    int n = 0;
    for (int h = 0; h < n_hours(); ++h) {
        if (cells_[at(site, h)].has_value()) ++n;
    }
    return n;
}

std::vector<int> Panel::hour_indices_in_days(const std::vector<DayStamp>& days) const {
    std::vector<int> out;
    for (int i = 0; i < n_hours(); ++i) {
        if (std::binary_search(days.begin(), days.end(), hour_to_day(hours_[i]))) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<int> Panel::all_hour_indices() const {
    std::vector<int> out(hours_.size());
    for (int i = 0; i < n_hours(); ++i) out[i] = i;
    return out;
}

void write_panel(const std::string& path, const Panel& panel) {
    csv::Table t;
    t.header = {"site", "hour"};
    for (int c = 0; c < kChannelCount; ++c) {
        t.header.emplace_back(channel_name(static_cast<Channel>(c)));
    }
    for (int s = 0; s < panel.n_sites(); ++s) {
        for (int h = 0; h < panel.n_hours(); ++h) {
            const TimedSample* cell = panel.cell(s, h);
            if (!cell) continue;
            std::vector<std::string> row;
            row.push_back(panel.sites()[s].id);
            row.push_back(format_hour(panel.hours()[h]));
            for (int c = 0; c < kChannelCount; ++c) {
                const auto& v = cell->values[c];
                row.push_back(v ? csv::format_double(*v, 17) : std::string());
            }
            t.rows.push_back(std::move(row));
        }
    }
    csv::write_file(path, t);
}

Panel read_panel(const std::string& panel_path, const std::string& sites_path) {
    std::vector<SiteRecord> sites = read_sites(sites_path);
    csv::Table t = csv::read_file(panel_path);
    auto site_col = t.column("site");
    auto hour_col = t.column("hour");
    if (!site_col || !hour_col) {
        throw DataError("panel file missing 'site'/'hour' columns: " + panel_path);
    }
    std::array<std::optional<int>, kChannelCount> chan_col;
    for (int c = 0; c < kChannelCount; ++c) {
        chan_col[c] = t.column(channel_name(static_cast<Channel>(c)));
    }

    std::vector<HourStamp> hours;
    hours.reserve(t.rows.size());
    for (const auto& row : t.rows) hours.push_back(parse_hour(row[*hour_col]));
    Panel panel(std::move(sites), hours);

    for (const auto& row : t.rows) {
        auto sidx = panel.site_index(row[*site_col]);
        if (!sidx) throw DataError("panel row references unknown site: " + row[*site_col]);
        auto hidx = panel.hour_index(parse_hour(row[*hour_col]));
        TimedSample& cell = panel.cell_mut(*sidx, *hidx);
        for (int c = 0; c < kChannelCount; ++c) {
            if (!chan_col[c]) continue;
            const std::string& field = row[static_cast<size_t>(*chan_col[c])];
            cell.values[c] = csv::parse_double(field);
        }
    }
    return panel;
}

void write_sites(const std::string& path, const std::vector<SiteRecord>& sites) {
    csv::Table t;
    t.header = {"id", "x", "y", "role", "typology", "paired_reference"};
    for (const auto& s : sites) {
        t.rows.push_back({s.id, csv::format_double(s.position.x, 17),
                          csv::format_double(s.position.y, 17), std::string(role_name(s.role)),
                          std::string(typology_name(s.typology)), s.paired_reference});
    }
    csv::write_file(path, t);
}

std::vector<SiteRecord> read_sites(const std::string& path) {
    csv::Table t = csv::read_file(path);
    for (const char* col : {"id", "x", "y", "role", "typology"}) {
        if (!t.column(col)) {
            throw DataError(std::string("site registry missing column '") + col + "': " + path);
        }
    }
    int id = *t.column("id"), x = *t.column("x"), y = *t.column("y");
    int role = *t.column("role"), typ = *t.column("typology");
    auto paired = t.column("paired_reference");
    std::vector<SiteRecord> out;
    for (const auto& row : t.rows) {
        SiteRecord s;
        s.id = row[id];
        s.position.x = csv::parse_double(row[x]).value();
        s.position.y = csv::parse_double(row[y]).value();
        auto r = role_from_name(row[role]);
        if (!r) throw DataError("unknown site role '" + row[role] + "' for " + s.id);
        s.role = *r;
        auto ty = typology_from_name(row[typ]);
        if (!ty) throw DataError("unknown typology '" + row[typ] + "' for " + s.id);
        s.typology = *ty;
        if (paired) s.paired_reference = row[*paired];
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace aircal
