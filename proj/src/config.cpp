#include "aircal/config.hpp"

#include "aircal/csv.hpp"
#include "aircal/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace aircal {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& context,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("unknown key '" + it.key() + "' in " + context);
        }
    }
}

Channel parse_channel(const json& v, const std::string& context) {
    auto ch = channel_from_name(v.get<std::string>());
    if (!ch) throw ConfigError("unknown channel '" + v.get<std::string>() + "' in " + context);
    return *ch;
}

LonLat parse_lonlat(const json& obj, const std::string& context) {
    check_keys(obj, context, {"origin_lon", "origin_lat"});
    if (!obj.contains("origin_lon") || !obj.contains("origin_lat")) {
        throw ConfigError(context + " needs origin_lon and origin_lat");
    }
    return LonLat{obj.at("origin_lon").get<double>(), obj.at("origin_lat").get<double>()};
}

BoundingBox parse_box(const json& obj, const std::string& context, bool strict = true) {
    if (strict) check_keys(obj, context, {"xmin", "ymin", "xmax", "ymax"});
    BoundingBox box;
    box.xmin = obj.at("xmin").get<double>();
    box.ymin = obj.at("ymin").get<double>();
    box.xmax = obj.at("xmax").get<double>();
    box.ymax = obj.at("ymax").get<double>();
    if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin)) {
        throw ConfigError(context + ": box is degenerate");
    }
    return box;
}

IngestConfig parse_ingest(const json& obj) {
    check_keys(obj, "ingest",
               {"format", "delimiter", "sites_file", "time_column", "device_column",
                "channel_columns", "flag_columns", "channel_column", "value_column",
                "flag_column", "channel_names", "bad_flags", "rename", "reference_devices",
                "ref_unit", "fallback_pressure_pa", "fallback_temperature_k"});
    IngestConfig cfg;
    std::string format = obj.value("format", "wide");
    if (format == "wide") {
        cfg.schema.format = IngestSchema::Format::wide;
    } else if (format == "long") {
        cfg.schema.format = IngestSchema::Format::long_form;
    } else {
        throw ConfigError("ingest.format must be 'wide' or 'long'");
    }
    if (obj.contains("delimiter")) {
        std::string d = obj.at("delimiter").get<std::string>();
        if (d == "auto" || d.empty()) {
            cfg.schema.delimiter = 0;
        } else if (d.size() == 1) {
            cfg.schema.delimiter = d[0];
        } else {
            throw ConfigError("ingest.delimiter must be a single character or 'auto'");
        }
    }
    if (!obj.contains("sites_file")) throw ConfigError("ingest.sites_file is required");
    cfg.sites_file = obj.at("sites_file").get<std::string>();
    cfg.schema.time_column = obj.value("time_column", cfg.schema.time_column);
    cfg.schema.device_column = obj.value("device_column", cfg.schema.device_column);
    if (obj.contains("channel_columns")) {
        for (auto it = obj.at("channel_columns").begin(); it != obj.at("channel_columns").end();
             ++it) {
            auto ch = channel_from_name(it.key());
            if (!ch) throw ConfigError("unknown channel '" + it.key() + "' in channel_columns");
            cfg.schema.channel_columns[*ch] = it.value().get<std::string>();
        }
    }
    if (obj.contains("flag_columns")) {
        for (auto it = obj.at("flag_columns").begin(); it != obj.at("flag_columns").end(); ++it) {
            auto ch = channel_from_name(it.key());
            if (!ch) throw ConfigError("unknown channel '" + it.key() + "' in flag_columns");
            cfg.schema.flag_columns[*ch] = it.value().get<std::string>();
        }
    }
    cfg.schema.channel_column = obj.value("channel_column", cfg.schema.channel_column);
    cfg.schema.value_column = obj.value("value_column", cfg.schema.value_column);
    cfg.schema.flag_column = obj.value("flag_column", cfg.schema.flag_column);
    if (obj.contains("channel_names")) {
        for (auto it = obj.at("channel_names").begin(); it != obj.at("channel_names").end();
             ++it) {
            cfg.schema.channel_names[it.key()] = parse_channel(it.value(), "channel_names");
        }
    }
    if (obj.contains("bad_flags")) {
        for (const auto& f : obj.at("bad_flags")) cfg.bad_flags.insert(f.get<int>());
    }
    if (obj.contains("rename")) {
        std::map<std::string, std::string> assoc;
        for (auto it = obj.at("rename").begin(); it != obj.at("rename").end(); ++it) {
            assoc[it.key()] = it.value().get<std::string>();
        }
        cfg.rename = RenameMap(std::move(assoc));
    }
    if (obj.contains("reference_devices")) {
        for (const auto& d : obj.at("reference_devices")) {
            cfg.reference_devices.insert(d.get<std::string>());
        }
    }
    std::string unit = obj.value("ref_unit", "ugm3");
    if (unit == "ppb") {
        cfg.ref_is_ppb = true;
    } else if (unit != "ugm3") {
        throw ConfigError("ingest.ref_unit must be 'ppb' or 'ugm3'");
    }
    cfg.fallback_pressure_pa = obj.value("fallback_pressure_pa", cfg.fallback_pressure_pa);
    cfg.fallback_temperature_k = obj.value("fallback_temperature_k", cfg.fallback_temperature_k);
    if (cfg.schema.format == IngestSchema::Format::wide && cfg.schema.channel_columns.empty()) {
        throw ConfigError("wide ingest schema needs channel_columns");
    }
    if (cfg.schema.format == IngestSchema::Format::long_form && cfg.schema.channel_names.empty()) {
        throw ConfigError("long ingest schema needs channel_names");
    }
    return cfg;
}

ModelSpec parse_model(const json& obj, WlsOptions& wls) {
    check_keys(obj, "model", {"covariates", "pollutant", "jitter", "condition_limit"});
    ModelSpec spec;
    if (obj.contains("covariates")) {
        spec.covariates.clear();
        for (const auto& c : obj.at("covariates")) {
            Channel ch = parse_channel(c, "model.covariates");
            if (ch == Channel::ref_no2) {
                throw ConfigError("the reference channel cannot be a model covariate");
            }
            spec.covariates.push_back(ch);
        }
        if (spec.covariates.empty()) throw ConfigError("model.covariates is empty");
    }
    if (obj.contains("pollutant")) {
        spec.pollutant = parse_channel(obj.at("pollutant"), "model.pollutant");
        if (spec.pollutant == Channel::ref_no2) {
            throw ConfigError("the reference channel cannot be the model pollutant");
        }
    }
    for (Channel c : spec.covariates) {
        if (c == spec.pollutant) {
            throw ConfigError("model pollutant duplicated in covariates");
        }
    }
    wls.diagonal_jitter = obj.value("jitter", false);
    wls.condition_limit = obj.value("condition_limit", wls.condition_limit);
    return spec;
}

KernelSpec parse_kernel(const json& obj) {
    check_keys(obj, "kernel", {"kind", "bandwidth_m", "time_exponent", "wrap_hours"});
    KernelSpec spec;
    if (obj.contains("kind")) {
        auto kind = kernel_kind_from_name(obj.at("kind").get<std::string>());
        if (!kind) throw ConfigError("kernel.kind must be 'gaussian' or 'gtwr'");
        spec.kind = *kind;
    }
    spec.bandwidth_m = obj.value("bandwidth_m", 1460.0);
    if (!(spec.bandwidth_m > 0.0)) throw ConfigError("kernel.bandwidth_m must be > 0");
    spec.time_exponent = obj.value("time_exponent", 3);
    if (spec.time_exponent != 3) {
        throw ConfigError("kernel.time_exponent is fixed at 3 for the gtwr weight");
    }
    spec.wrap_hours = obj.value("wrap_hours", false);
    return spec;
}

std::vector<DayStamp> parse_day_list(const json& arr) {
    std::vector<DayStamp> out;
    for (const auto& d : arr) out.push_back(parse_day(d.get<std::string>()));
    return out;
}

SplitSpec parse_split(const json& obj) {
    check_keys(obj, "split", {"start", "end", "s0_stride", "s0_days", "s1_days", "s2_days"});
    if (!obj.contains("start") || !obj.contains("end")) {
        throw ConfigError("split needs 'start' and 'end' dates");
    }
    SplitSpec spec;
    spec.start_day = parse_day(obj.at("start").get<std::string>());
    spec.end_day = parse_day(obj.at("end").get<std::string>());
    if (spec.end_day < spec.start_day) throw ConfigError("split period is empty");
    spec.s0_stride = obj.value("s0_stride", 8);
    if (obj.contains("s0_days")) spec.explicit_s0 = parse_day_list(obj.at("s0_days"));
    if (obj.contains("s1_days")) spec.explicit_s1 = parse_day_list(obj.at("s1_days"));
    if (obj.contains("s2_days")) spec.explicit_s2 = parse_day_list(obj.at("s2_days"));
    return spec;
}

GridSpec parse_grid(const json& obj, const ModelSpec& model) {
    check_keys(obj, "grid", {"xmin", "ymin", "xmax", "ymax", "cell_m", "coefficients"});
    GridSpec grid;
    grid.box = parse_box(obj, "grid", /*strict=*/false);
    if (!obj.contains("cell_m")) throw ConfigError("grid.cell_m is required");
    grid.cell_m = obj.at("cell_m").get<double>();
    if (!(grid.cell_m > 0.0)) throw ConfigError("grid.cell_m must be > 0");
    if (obj.contains("coefficients")) {
        const auto names = model.column_names();
        for (const auto& c : obj.at("coefficients")) {
            std::string name = c.get<std::string>();
            if (std::find(names.begin(), names.end(), name) == names.end()) {
                throw ConfigError("grid.coefficients names unknown coefficient '" + name + "'");
            }
            grid.coefficients.push_back(name);
        }
    }
    return grid;
}

CoefficientField parse_field(const json& obj, const std::string& context) {
    check_keys(obj, context,
               {"kind", "value", "gx", "gy", "amplitude", "cx", "cy", "length_m"});
    CoefficientField f;
    std::string kind = obj.value("kind", "constant");
    if (kind == "constant") {
        f.kind = CoefficientField::Kind::constant;
    } else if (kind == "linear") {
        f.kind = CoefficientField::Kind::linear;
    } else if (kind == "bump") {
        f.kind = CoefficientField::Kind::gaussian_bump;
    } else {
        throw ConfigError(context + ".kind must be constant, linear or bump");
    }
    f.value = obj.value("value", 0.0);
    f.gx = obj.value("gx", 0.0);
    f.gy = obj.value("gy", 0.0);
    f.amplitude = obj.value("amplitude", 0.0);
    f.center.x = obj.value("cx", 0.0);
    f.center.y = obj.value("cy", 0.0);
    f.length_m = obj.value("length_m", 1.0);
    if (f.kind == CoefficientField::Kind::gaussian_bump && !(f.length_m > 0.0)) {
        throw ConfigError(context + ".length_m must be > 0");
    }
    return f;
}

SynthSpec parse_synth(const json& obj, const ModelSpec& model, std::uint64_t& seed) {
    check_keys(obj, "synth",
               {"stations", "deployed", "hours", "start", "domain", "beta", "noise_sigma",
                "gain", "offset", "shared_covariates", "jitter_frac", "seed"});
    SynthSpec spec;
    spec.n_stations = obj.value("stations", 9);
    spec.n_deployed = obj.value("deployed", 0);
    spec.n_hours = obj.value("hours", 720);
    if (obj.contains("start")) {
        spec.start_hour = day_to_hour(parse_day(obj.at("start").get<std::string>()));
    }
    if (obj.contains("domain")) spec.domain = parse_box(obj.at("domain"), "synth.domain");
    spec.noise_sigma = obj.value("noise_sigma", 0.0);
    if (obj.contains("gain")) {
        const auto& g = obj.at("gain");
        if (!g.is_array() || g.size() != 2) throw ConfigError("synth.gain must be [min, max]");
        spec.gain_min = g[0].get<double>();
        spec.gain_max = g[1].get<double>();
    }
    if (obj.contains("offset")) {
        const auto& o = obj.at("offset");
        if (!o.is_array() || o.size() != 2) throw ConfigError("synth.offset must be [min, max]");
        spec.offset_min = o[0].get<double>();
        spec.offset_max = o[1].get<double>();
    }
    spec.shared_covariates = obj.value("shared_covariates", false);
    spec.jitter_frac = obj.value("jitter_frac", 0.1);
    seed = obj.value("seed", static_cast<std::uint64_t>(1));

    // Mild defaults; any column can be overridden by name.
    spec.beta[0] = CoefficientField{CoefficientField::Kind::constant, 20.0};
    spec.beta[5] = CoefficientField{CoefficientField::Kind::constant, 2.0};
    if (obj.contains("beta")) {
        const auto names = model.column_names();
        for (auto it = obj.at("beta").begin(); it != obj.at("beta").end(); ++it) {
            auto pos = std::find(names.begin(), names.end(), it.key());
            if (pos == names.end()) {
                throw ConfigError("synth.beta names unknown coefficient '" + it.key() + "'");
            }
            spec.beta[static_cast<size_t>(pos - names.begin())] =
                parse_field(it.value(), "synth.beta." + it.key());
        }
    }
    return spec;
}

} // namespace

std::vector<double> BandwidthGridConfig::candidates() const {
    if (!(min_m > 0.0) || !(max_m >= min_m) || !(step_m > 0.0)) {
        throw ConfigError("bandwidth grid must satisfy 0 < min <= max, step > 0");
    }
    std::vector<double> out;
    for (double b = min_m; b <= max_m + 1e-9; b += step_m) out.push_back(b);
    return out;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    check_keys(root, "config root",
               {"output_dir", "projection", "bounding_box", "ingest", "model", "kernel",
                "split", "pairing", "bandwidth_search", "grid", "grid_format", "synth"});

    PipelineConfig cfg;
    cfg.output_dir = root.value("output_dir", cfg.output_dir);
    if (root.contains("projection")) {
        cfg.projection_origin = parse_lonlat(root.at("projection"), "projection");
    }
    if (root.contains("bounding_box")) {
        cfg.bounding_box = parse_box(root.at("bounding_box"), "bounding_box");
    }
    if (root.contains("model")) cfg.model = parse_model(root.at("model"), cfg.wls);
    if (root.contains("kernel")) cfg.kernel = parse_kernel(root.at("kernel"));
    if (root.contains("ingest")) cfg.ingest = parse_ingest(root.at("ingest"));
    if (root.contains("split")) cfg.split = parse_split(root.at("split"));
    if (root.contains("pairing")) {
        for (auto it = root.at("pairing").begin(); it != root.at("pairing").end(); ++it) {
            cfg.pairing_overrides[it.key()] = it.value().get<std::string>();
        }
    }
    if (root.contains("bandwidth_search")) {
        const auto& b = root.at("bandwidth_search");
        check_keys(b, "bandwidth_search", {"min_m", "max_m", "step_m"});
        cfg.bandwidth_grid.min_m = b.value("min_m", cfg.bandwidth_grid.min_m);
        cfg.bandwidth_grid.max_m = b.value("max_m", cfg.bandwidth_grid.max_m);
        cfg.bandwidth_grid.step_m = b.value("step_m", cfg.bandwidth_grid.step_m);
        cfg.bandwidth_grid.candidates(); // validate now
    }
    if (root.contains("grid")) cfg.grid = parse_grid(root.at("grid"), cfg.model);
    cfg.grid_format = root.value("grid_format", cfg.grid_format);
    if (cfg.grid_format != "delimited" && cfg.grid_format != "geojson" &&
        cfg.grid_format != "both") {
        throw ConfigError("grid_format must be delimited, geojson or both");
    }
    if (root.contains("synth")) {
        cfg.synth = parse_synth(root.at("synth"), cfg.model, cfg.synth_seed);
    }
    return cfg;
}

std::vector<SiteRecord> load_site_inputs(const std::string& path,
                                         const std::optional<LonLat>& origin,
                                         const std::optional<BoundingBox>& box) {
    csv::Table t = csv::read_file(path);
    bool geographic = t.column("lon").has_value() && t.column("lat").has_value();
    if (!geographic && (!t.column("x") || !t.column("y"))) {
        throw DataError("site file needs lon/lat or x/y columns: " + path);
    }
    if (geographic && !origin) {
        throw ConfigError("site file " + path +
                          " uses lon/lat but no projection origin is configured");
    }
    for (const char* col : {"id", "role", "typology"}) {
        if (!t.column(col)) {
            throw DataError(std::string("site file missing column '") + col + "': " + path);
        }
    }
    int id = *t.column("id"), role = *t.column("role"), typ = *t.column("typology");
    auto paired = t.column("paired_reference");
    std::vector<SiteRecord> out;
    for (const auto& row : t.rows) {
        SiteRecord s;
        s.id = row[id];
        if (geographic) {
            LonLat ll{csv::parse_double(row[*t.column("lon")]).value(),
                      csv::parse_double(row[*t.column("lat")]).value()};
            s.position = project(ll, *origin);
        } else {
            s.position.x = csv::parse_double(row[*t.column("x")]).value();
            s.position.y = csv::parse_double(row[*t.column("y")]).value();
        }
        if (box && !box->contains(s.position)) {
            throw DataError("site " + s.id + " falls outside the configured bounding box");
        }
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
