#include "aircal/csv.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
    std::string cmd = std::string(AIRCAL_BIN) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path work_dir() {
    auto dir = fs::temp_directory_path() / "aircal_cli_tests";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Config with synth + split + grid sections over a 24-day period.
std::string synth_config(const std::string& out_dir, int hours = 24 * 24) {
    std::ostringstream oss;
    oss << R"({
  "output_dir": ")" << out_dir << R"(",
  "kernel": {"kind": "gaussian", "bandwidth_m": 800.0},
  "split": {"start": "2020-07-15", "end": "2020-08-07"},
  "bandwidth_search": {"min_m": 400, "max_m": 1200, "step_m": 400},
  "grid": {"xmin": 0, "ymin": 0, "xmax": 2000, "ymax": 2000, "cell_m": 1000,
           "coefficients": ["intercept", "no2_na"]},
  "synth": {
    "stations": 4, "hours": )" << hours << R"(, "start": "2020-07-15",
    "domain": {"xmin": 0, "ymin": 0, "xmax": 2000, "ymax": 2000},
    "noise_sigma": 3.0, "seed": 7,
    "beta": {
      "intercept": {"kind": "constant", "value": 15.0},
      "no_na": {"kind": "constant", "value": 0.5},
      "co_na": {"kind": "constant", "value": -0.2},
      "rh_pct": {"kind": "constant", "value": 0.3},
      "t_c": {"kind": "constant", "value": -0.6},
      "no2_na": {"kind": "linear", "value": 2.0, "gx": 0.0002}
    }
  }
})";
    return oss.str();
}

} // namespace

TEST_CASE("cli: config errors exit with code 1") {
    auto dir = work_dir();
    CHECK(run("synth") == 1); // --config is required
    CHECK(run("synth --config /nonexistent.json") == 1);

    write_file(dir / "bad.json", "{ not json");
    CHECK(run("synth --config " + (dir / "bad.json").string()) == 1);

    write_file(dir / "unknown.json", R"({"output_dir": "x", "no_such_key": 1})");
    CHECK(run("synth --config " + (dir / "unknown.json").string()) == 1);

    write_file(dir / "nosynth.json", R"({"output_dir": "x"})");
    CHECK(run("synth --config " + (dir / "nosynth.json").string()) == 1);

    write_file(dir / "badkernel.json", R"({"kernel": {"kind": "box"}})");
    CHECK(run("fit --config " + (dir / "badkernel.json").string()) == 1);
}

TEST_CASE("cli: missing panel data exits with code 2") {
    auto dir = work_dir();
    auto cfg = dir / "ok.json";
    write_file(cfg, synth_config((dir / "empty_out").string()));
    CHECK(run("fit --config " + cfg.string() + " --panel /nonexistent_panel.csv") == 2);
}

TEST_CASE("cli: synth -> fit -> validate -> grid round trip") {
    auto dir = work_dir();
    auto out = dir / "pipe";
    fs::remove_all(out);
    auto cfg = dir / "pipe.json";
    write_file(cfg, synth_config(out.string()));

    REQUIRE(run("synth --config " + cfg.string()) == 0);
    CHECK(fs::exists(out / "panel.csv"));
    CHECK(fs::exists(out / "sites.csv"));
    CHECK(fs::exists(out / "truth.csv"));

    REQUIRE(run("fit --config " + cfg.string()) == 0);
    for (const char* name :
         {"models_collocated.csv", "models_noncollocated.csv", "models_gwr.csv",
          "models_sgwr.csv"}) {
        CHECK(fs::exists(out / name));
    }
    // GWR-5 design: intercept + 4 covariates + pollutant
    aircal::csv::Table gwr_models = aircal::csv::read_file((out / "models_gwr.csv").string());
    int beta_columns = 0;
    for (const auto& h : gwr_models.header) {
        if (h.rfind("beta_", 0) == 0) ++beta_columns;
    }
    CHECK(beta_columns == 6);

    REQUIRE(run("validate --config " + cfg.string() + " --bandwidth-search") == 0);
    for (const char* name : {"scores.csv", "cv_folds_gwr.csv", "cv_folds_sgwr.csv",
                             "rmse_by_hour_sgwr.csv", "pairing.csv", "report.txt",
                             "bandwidth_curve.csv"}) {
        CHECK(fs::exists(out / name));
    }
    std::string report = slurp(out / "report.txt");
    CHECK(report.find("CV RMSE") != std::string::npos);
    CHECK(report.find("achieved") != std::string::npos); // split fractions

    REQUIRE(run("grid --config " + cfg.string() + " --model gwr") == 0);
    CHECK(fs::exists(out / "layer_intercept.csv"));
    CHECK(fs::exists(out / "layer_no2_na.csv"));
    aircal::csv::Table layer = aircal::csv::read_file((out / "layer_intercept.csv").string());
    CHECK(layer.rows.size() == 9); // 3x3 nodes at 1000 m cells over 2 km
}

TEST_CASE("cli: reruns are byte-identical") {
    auto dir = work_dir();
    auto out = dir / "det";
    fs::remove_all(out);
    auto cfg = dir / "det.json";
    write_file(cfg, synth_config(out.string(), 24 * 10));

    REQUIRE(run("synth --config " + cfg.string()) == 0);
    std::string panel_a = slurp(out / "panel.csv");
    REQUIRE(run("fit --config " + cfg.string() + " --model gwr --jobs 3") == 0);
    std::string models_a = slurp(out / "models_gwr.csv");

    REQUIRE(run("synth --config " + cfg.string()) == 0);
    CHECK(slurp(out / "panel.csv") == panel_a);
    REQUIRE(run("fit --config " + cfg.string() + " --model gwr --jobs 1") == 0);
    CHECK(slurp(out / "models_gwr.csv") == models_a);
}

TEST_CASE("cli: bandwidth flag produces distinct model files") {
    auto dir = work_dir();
    auto out = dir / "bw";
    fs::remove_all(out);
    auto cfg = dir / "bw.json";
    write_file(cfg, synth_config(out.string(), 24 * 10));
    REQUIRE(run("synth --config " + cfg.string()) == 0);

    REQUIRE(run("fit --config " + cfg.string() + " --model gwr --bandwidth 1460") == 0);
    std::string narrow = slurp(out / "models_gwr.csv");
    REQUIRE(run("fit --config " + cfg.string() + " --model gwr --bandwidth 3000") == 0);
    std::string wide = slurp(out / "models_gwr.csv");
    CHECK(narrow != wide);
}

TEST_CASE("cli: numerical dead ends exit with code 3") {
    auto dir = work_dir();
    auto out = dir / "numfail";
    fs::remove_all(out);
    auto cfg = dir / "numfail.json";
    // 5 hours of data in a 1-day period: everything lands in S0, S1 is
    // empty, every fold and every candidate is singular
    std::string text = synth_config(out.string(), 5);
    auto pos = text.find("\"end\": \"2020-08-07\"");
    text.replace(pos, std::string("\"end\": \"2020-08-07\"").size(),
                 "\"end\": \"2020-07-15\"");
    write_file(cfg, text);
    REQUIRE(run("synth --config " + cfg.string()) == 0);
    CHECK(run("validate --config " + cfg.string() + " --model gwr --bandwidth-search") == 3);
}

TEST_CASE("cli ingest: clean day aggregates to 24 panel hours") {
    auto dir = work_dir();
    auto out = dir / "ingest_out";
    fs::remove_all(out);

    // registry: one station pair, positions already projected
    write_file(dir / "sites.csv",
               "id,x,y,role,typology,paired_reference\n"
               "REF_01,0,0,reference,urban_background,\n"
               "SEN_01,0,0,collocated_sensor,urban_background,REF_01\n");

    // raw file: device 4065DA renamed to SEN_01; REF_01 whitelisted.
    // day 1 is complete; day 2 hour 0 has only 11 minutes per quarter.
    std::ostringstream raw;
    raw << "time,device,no2,no,co,rh,t,ref\n";
    auto minute_row = [&](const std::string& day, int hour, int minute) {
        char ts[32];
        std::snprintf(ts, sizeof ts, "%s %02d:%02d", day.c_str(), hour, minute);
        raw << ts << ",4065DA,100.5,80.25,320,65,14.5,\n";
        raw << ts << ",REF_01,,,,,,42.25\n";
    };
    for (int hour = 0; hour < 24; ++hour) {
        for (int minute = 0; minute < 60; ++minute) minute_row("2020-06-01", hour, minute);
    }
    for (int quarter = 0; quarter < 4; ++quarter) {
        for (int minute = 0; minute < 11; ++minute) {
            minute_row("2020-06-02", 0, quarter * 15 + minute);
        }
    }
    write_file(dir / "raw.csv", raw.str());

    std::ostringstream cfg;
    cfg << R"({
  "output_dir": ")" << out.string() << R"(",
  "ingest": {
    "format": "wide",
    "sites_file": ")" << (dir / "sites.csv").string() << R"(",
    "time_column": "time", "device_column": "device",
    "channel_columns": {"no2_na": "no2", "no_na": "no", "co_na": "co",
                         "rh_pct": "rh", "t_c": "t", "ref_no2": "ref"},
    "rename": {"4065DA": "SEN_01"},
    "reference_devices": ["REF_01"]
  }
})";
    write_file(dir / "ingest.json", cfg.str());

    REQUIRE(run("ingest --config " + (dir / "ingest.json").string() + " " +
                (dir / "raw.csv").string()) == 0);
    aircal::csv::Table panel = aircal::csv::read_file((out / "panel.csv").string());
    int sensor_rows = 0, ref_rows = 0;
    for (const auto& row : panel.rows) {
        if (row[0] == "SEN_01") ++sensor_rows;
        if (row[0] == "REF_01") ++ref_rows;
    }
    CHECK(sensor_rows == 24); // the 11-minute quarters never make an hour
    CHECK(ref_rows == 24);

    // byte-identical rerun
    std::string first = slurp(out / "panel.csv");
    REQUIRE(run("ingest --config " + (dir / "ingest.json").string() + " " +
                (dir / "raw.csv").string()) == 0);
    CHECK(slurp(out / "panel.csv") == first);
}
