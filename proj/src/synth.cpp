#include "aircal/synth.hpp"

#include "aircal/csv.hpp"
#include "aircal/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace aircal {

double CoefficientField::at(Position s) const {
    switch (kind) {
    case Kind::constant: return value;
    case Kind::linear: return value + gx * s.x + gy * s.y;
    case Kind::gaussian_bump:
        return value +
               amplitude * std::exp(-0.5 * squared_distance(s, center) / (length_m * length_m));
    }
    return value;
}

namespace {

// Diurnal covariate processes: base + daily cycle + white noise, loosely
// shaped after raw electrochemical channels and weather series.
struct ChannelProcess {
    double base, daily_amp, noise_sd;
};

constexpr ChannelProcess kProcess[5] = {
    {120.0, 35.0, 12.0}, // no2_na
    {80.0, 25.0, 9.0},   // no_na
    {320.0, 60.0, 20.0}, // co_na
    {65.0, 15.0, 5.0},   // rh_pct
    {14.0, 6.0, 1.5},    // t_c
};

constexpr Channel kOrder[5] = {Channel::no2_na, Channel::no_na, Channel::co_na, Channel::rh_pct,
                               Channel::t_c};

int process_index(Channel c) {
    for (int i = 0; i < 5; ++i) {
        if (kOrder[i] == c) return i;
    }
    throw ConfigError("synthetic generator covers the five sensor channels only");
}

std::vector<Position> station_layout(const SynthSpec& spec, std::mt19937_64& rng) {
    int q = spec.n_stations;
    int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(q))));
    int rows = (q + cols - 1) / cols;
    double dx = spec.domain.width() / cols;
    double dy = spec.domain.height() / rows;
    std::uniform_real_distribution<double> jitter(-spec.jitter_frac, spec.jitter_frac);
    std::vector<Position> out;
    for (int i = 0; i < q; ++i) {
        int r = i / cols, c = i % cols;
        Position p{spec.domain.xmin + (c + 0.5) * dx, spec.domain.ymin + (r + 0.5) * dy};
        p.x += jitter(rng) * dx;
        p.y += jitter(rng) * dy;
        out.push_back(p);
    }
    return out;
}

std::string zero_pad(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", i);
    return buf;
}

} // namespace

SynthResult generate(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.n_stations < 1) throw ConfigError("synthetic network needs at least one station");
    if (spec.n_hours < 1) throw ConfigError("synthetic network needs at least one hour");
    if (spec.noise_sigma < 0.0) throw ConfigError("noise sigma must be >= 0");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Fixed draw order keeps panels reproducible: positions, distortions,
    // phases, covariates, then response noise.
    std::vector<Position> stations = station_layout(spec, rng);
    std::vector<Position> deployed;
    for (int i = 0; i < spec.n_deployed; ++i) {
        deployed.push_back(Position{spec.domain.xmin + unit(rng) * spec.domain.width(),
                                    spec.domain.ymin + unit(rng) * spec.domain.height()});
    }

    const int n_sensors = spec.n_stations + spec.n_deployed;
    std::vector<std::array<double, 5>> gain(n_sensors), offset(n_sensors);
    for (int s = 0; s < n_sensors; ++s) {
        for (int c = 0; c < 5; ++c) {
            gain[s][c] = spec.gain_min + unit(rng) * (spec.gain_max - spec.gain_min);
            offset[s][c] = spec.offset_min + unit(rng) * (spec.offset_max - spec.offset_min);
        }
    }

    std::vector<std::array<double, 5>> phase(n_sensors);
    for (int s = 0; s < n_sensors; ++s) {
        for (int c = 0; c < 5; ++c) {
            phase[s][c] = (spec.shared_covariates && s > 0) ? phase[0][c]
                                                            : 2.0 * std::numbers::pi * unit(rng);
        }
    }

    // True covariates per sensor and hour.
    std::vector<std::vector<std::array<double, 5>>> covariates(
        static_cast<size_t>(n_sensors),
        std::vector<std::array<double, 5>>(static_cast<size_t>(spec.n_hours)));
    for (int s = 0; s < n_sensors; ++s) {
        if (spec.shared_covariates && s > 0) {
            covariates[static_cast<size_t>(s)] = covariates[0];
            continue;
        }
        for (int t = 0; t < spec.n_hours; ++t) {
            int hod = hour_of_day(spec.start_hour + t);
            for (int c = 0; c < 5; ++c) {
                const ChannelProcess& pr = kProcess[c];
                covariates[static_cast<size_t>(s)][static_cast<size_t>(t)][c] =
                    pr.base +
                    pr.daily_amp *
                        std::sin(2.0 * std::numbers::pi * hod / 24.0 + phase[s][c]) +
                    pr.noise_sd * gauss(rng);
            }
        }
    }

    ModelSpec model; // default GWR-5 design
    SynthResult result;
    result.model = model;

    std::vector<SiteRecord> sites;
    std::vector<int> sensor_of_site; // sensor index per site, -1 for pure position reuse
    for (int i = 0; i < spec.n_stations; ++i) {
        SiteRecord ref;
        ref.id = "REF_" + zero_pad(i + 1);
        ref.position = stations[static_cast<size_t>(i)];
        ref.role = SiteRole::reference;
        ref.typology = static_cast<Typology>(i % 5);
        sites.push_back(ref);
        sensor_of_site.push_back(-1);

        SiteRecord sen;
        sen.id = "SEN_" + zero_pad(i + 1);
        sen.position = stations[static_cast<size_t>(i)];
        sen.role = SiteRole::collocated_sensor;
        sen.typology = ref.typology;
        sen.paired_reference = ref.id;
        sites.push_back(sen);
        sensor_of_site.push_back(i);
    }
    for (int i = 0; i < spec.n_deployed; ++i) {
        SiteRecord sen;
        sen.id = "DEP_" + zero_pad(i + 1);
        sen.position = deployed[static_cast<size_t>(i)];
        sen.role = SiteRole::deployed_sensor;
        sen.typology = static_cast<Typology>((spec.n_stations + i) % 5);
        sites.push_back(sen);
        sensor_of_site.push_back(spec.n_stations + i);
    }

    std::vector<HourStamp> hours;
    for (int t = 0; t < spec.n_hours; ++t) hours.push_back(spec.start_hour + t);
    Panel panel(std::move(sites), std::move(hours));

    result.true_beta.resize(static_cast<size_t>(panel.n_sites()));
    result.clean_y.assign(static_cast<size_t>(panel.n_sites()),
                          std::vector<double>(static_cast<size_t>(spec.n_hours), 0.0));
    for (int s = 0; s < panel.n_sites(); ++s) {
        Position pos = panel.sites()[s].position;
        for (int b = 0; b < 6; ++b) {
            result.true_beta[static_cast<size_t>(s)][static_cast<size_t>(b)] =
                spec.beta[static_cast<size_t>(b)].at(pos);
        }
    }

    // Responses from true covariates; recorded channels carry the per-sensor
    // gain/offset distortion.
    for (int site = 0; site < panel.n_sites(); ++site) {
        int sensor = sensor_of_site[static_cast<size_t>(site)];
        const SiteRecord& rec = panel.sites()[site];
        const auto& beta = result.true_beta[static_cast<size_t>(site)];
        for (int t = 0; t < spec.n_hours; ++t) {
            // Reference sites reuse their collocated sensor's covariates via
            // identical position: compute from the sensor sharing the position.
            int src = sensor;
            if (rec.role == SiteRole::reference) src = sensor_of_site[static_cast<size_t>(site) + 1];
            const auto& x = covariates[static_cast<size_t>(src)][static_cast<size_t>(t)];
            double clean = beta[0];
            clean += beta[1] * x[process_index(model.covariates[0])];
            clean += beta[2] * x[process_index(model.covariates[1])];
            clean += beta[3] * x[process_index(model.covariates[2])];
            clean += beta[4] * x[process_index(model.covariates[3])];
            clean += beta[5] * x[process_index(model.pollutant)];
            result.clean_y[static_cast<size_t>(site)][static_cast<size_t>(t)] = clean;

            TimedSample& cell = panel.cell_mut(site, t);
            if (rec.role == SiteRole::reference) {
                double eps = (spec.noise_sigma > 0.0) ? spec.noise_sigma * gauss(rng) : 0.0;
                cell[Channel::ref_no2] = clean + eps;
            } else {
                for (int c = 0; c < 5; ++c) {
                    cell[kOrder[c]] = gain[static_cast<size_t>(sensor)][c] * x[c] +
                                      offset[static_cast<size_t>(sensor)][c];
                }
            }
        }
    }

    result.panel = std::move(panel);
    return result;
}

Eigen::VectorXd oracle_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() < x.cols()) throw NumericalError("oracle_ols: underdetermined system");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < x.cols()) {
        throw NumericalError("oracle_ols: rank-deficient design (rank " +
                             std::to_string(qr.rank()) + " of " + std::to_string(x.cols()) + ")");
    }
    return qr.solve(y);
}

void write_truth(const std::string& path, const SynthResult& result) {
    csv::Table t;
    t.header = {"site", "x", "y", "role"};
    for (const std::string& name : result.model.column_names()) {
        t.header.push_back("beta_" + name);
    }
    for (int s = 0; s < result.panel.n_sites(); ++s) {
        const SiteRecord& rec = result.panel.sites()[s];
        std::vector<std::string> row = {rec.id, csv::format_double(rec.position.x, 12),
                                        csv::format_double(rec.position.y, 12),
                                        std::string(role_name(rec.role))};
        for (double b : result.true_beta[static_cast<size_t>(s)]) {
            row.push_back(csv::format_double(b, 12));
        }
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

} // namespace aircal
