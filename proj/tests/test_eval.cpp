#include "aircal/errors.hpp"
#include "aircal/eval.hpp"
#include "aircal/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace aircal;

namespace {

SplitSpec period_of(const Panel& panel) {
    SplitSpec spec;
    spec.start_day = hour_to_day(panel.hours().front());
    spec.end_day = hour_to_day(panel.hours().back());
    return spec;
}

SynthSpec smooth_spec(int stations, int hours, double sigma) {
    SynthSpec spec;
    spec.n_stations = stations;
    spec.n_hours = hours;
    spec.noise_sigma = sigma;
    spec.beta[0] = {CoefficientField::Kind::constant, 15.0};
    spec.beta[1] = {CoefficientField::Kind::constant, 0.5};
    spec.beta[2] = {CoefficientField::Kind::constant, -0.2};
    spec.beta[3] = {CoefficientField::Kind::constant, 0.3};
    spec.beta[4] = {CoefficientField::Kind::constant, -0.6};
    spec.beta[5] = {CoefficientField::Kind::constant, 2.2};
    return spec;
}

} // namespace

TEST_CASE("split_days: 8-day period has exactly one S0 day") {
    SplitSpec spec{0, 7};
    DaySplit split = split_days(spec);
    CHECK(split.s0.size() == 1);
    CHECK(split.s0[0] == 0);
}

TEST_CASE("split_days: 24-day period gives 3/14/7") {
    SplitSpec spec{100, 123};
    DaySplit split = split_days(spec);
    CHECK(split.s0.size() == 3);
    CHECK(split.s1.size() == 14);
    CHECK(split.s2.size() == 7);
}

TEST_CASE("split_days: single day lands in S0") {
    SplitSpec spec{50, 50};
    DaySplit split = split_days(spec);
    CHECK(split.s0 == std::vector<DayStamp>{50});
    CHECK(split.s1.empty());
    CHECK(split.s2.empty());
}

TEST_CASE("split_days partitions every period") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 60; ++trial) {
        DayStamp start = static_cast<DayStamp>(rng() % 20000);
        DayStamp end = start + static_cast<DayStamp>(rng() % 400);
        DaySplit split = split_days(SplitSpec{start, end});
        std::set<DayStamp> all;
        size_t total = 0;
        for (const auto* part : {&split.s0, &split.s1, &split.s2}) {
            total += part->size();
            all.insert(part->begin(), part->end());
        }
        CHECK(total == all.size()); // pairwise disjoint
        CHECK(static_cast<DayStamp>(all.size()) == end - start + 1);
        CHECK(*all.begin() == start);
        CHECK(*all.rbegin() == end);
    }
}

TEST_CASE("split_days: explicit calendars must partition the period") {
    SplitSpec good{0, 5};
    good.explicit_s0 = std::vector<DayStamp>{0};
    good.explicit_s1 = std::vector<DayStamp>{1, 2, 3};
    good.explicit_s2 = std::vector<DayStamp>{4, 5};
    DaySplit split = split_days(good);
    CHECK(split.s1.size() == 3);

    SplitSpec overlap = good;
    overlap.explicit_s2 = std::vector<DayStamp>{3, 4, 5};
    CHECK_THROWS_AS(split_days(overlap), ConfigError);

    SplitSpec hole = good;
    hole.explicit_s2 = std::vector<DayStamp>{4};
    CHECK_THROWS_AS(split_days(hole), ConfigError);

    SplitSpec partial = good;
    partial.explicit_s2.reset();
    CHECK_THROWS_AS(split_days(partial), ConfigError);
}

TEST_CASE("rmse basics") {
    std::vector<double> ref = {1.0, 2.0, 3.0};
    CHECK(rmse(ref, ref) == 0.0);
    std::vector<double> shifted = {3.0, 4.0, 5.0};
    CHECK(rmse(shifted, ref) == doctest::Approx(2.0));
    std::vector<double> pred = {4.0, 6.0};
    std::vector<double> ref2 = {1.0, 2.0};
    CHECK(rmse(pred, ref2) == doctest::Approx(3.5355339059327378).epsilon(1e-14));
    CHECK_THROWS_AS(rmse({}, {}), DataError);
}

TEST_CASE("explained variance basics") {
    std::vector<double> ref = {10.0, 20.0, 30.0, 40.0};
    CHECK(explained_variance_pct(ref, ref) == doctest::Approx(100.0));
    std::vector<double> mean_pred(4, 25.0);
    CHECK(explained_variance_pct(mean_pred, ref) == doctest::Approx(0.0));
    std::vector<double> awful = {40.0, 10.0, 45.0, 5.0};
    CHECK(explained_variance_pct(awful, ref) < 0.0);
    std::vector<double> flat(4, 7.0);
    CHECK_THROWS_AS(explained_variance_pct(mean_pred, flat), DataError);
}

TEST_CASE("EV and RMSE are consistent on the same overlap") {
    std::mt19937_64 rng(67);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 20 + static_cast<int>(rng() % 200);
        std::vector<double> ref(static_cast<size_t>(n)), pred(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            ref[static_cast<size_t>(i)] = 20.0 + 8.0 * gauss(rng);
            pred[static_cast<size_t>(i)] = ref[static_cast<size_t>(i)] + 3.0 * gauss(rng);
        }
        double mean = 0.0;
        for (double r : ref) mean += r;
        mean /= n;
        double var = 0.0;
        for (double r : ref) var += (r - mean) * (r - mean);
        var /= n;
        double e = rmse(pred, ref);
        double ev = explained_variance_pct(pred, ref);
        CHECK(ev == doctest::Approx(100.0 * (1.0 - e * e / var)).epsilon(1e-9));
    }
}

TEST_CASE("negative_count counts strictly negative values") {
    CHECK(negative_count(std::vector<double>{1.0, 2.0}) == 0);
    CHECK(negative_count(std::vector<double>{-1.0, 0.0, 2.0}) == 1);
}

TEST_CASE("loocv: noiseless constant field is reproduced almost exactly") {
    SynthResult synth = generate(smooth_spec(4, 24 * 20, 0.0), 71);
    DaySplit split = split_days(period_of(synth.panel));
    KernelSpec kernel{KernelSpec::Kind::gaussian, 1000.0};
    LoocvOutcome cv = loocv(synth.panel, synth.model, kernel, ModelKind::gwr, split);
    CHECK(cv.failed_folds == 0);
    CHECK(cv.cv_rmse < 1e-6);
}

TEST_CASE("loocv: two identical sites transfer at the noise level") {
    double sigma = 4.0;
    std::vector<double> rmses;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SynthSpec spec = smooth_spec(2, 24 * 30, sigma);
        spec.shared_covariates = true;
        SynthResult synth = generate(spec, 400 + seed);
        DaySplit split = split_days(period_of(synth.panel));
        KernelSpec kernel{KernelSpec::Kind::gaussian, 1500.0};
        LoocvOutcome cv = loocv(synth.panel, synth.model, kernel, ModelKind::gwr, split);
        REQUIRE(cv.failed_folds == 0);
        rmses.push_back(cv.cv_rmse);
    }
    double mean = 0.0;
    for (double r : rmses) mean += r;
    mean /= static_cast<double>(rmses.size());
    CHECK(mean > 0.85 * sigma);
    CHECK(mean < 1.25 * sigma);
}

TEST_CASE("loocv never reads the held-out reference during fitting") {
    SynthResult synth = generate(smooth_spec(4, 24 * 16, 3.0), 73);
    Panel panel = synth.panel;
    DaySplit split = split_days(period_of(panel));
    KernelSpec kernel{KernelSpec::Kind::gaussian, 900.0};

    LoocvOutcome clean_cv = loocv(panel, synth.model, kernel, ModelKind::gwr, split);

    // poison the held-out station's reference over the FITTING days only
    std::vector<int> stations = panel.sites_with_role(SiteRole::collocated_sensor);
    int held = stations[0];
    auto ref_site = panel.paired_reference(held);
    Panel poisoned = panel;
    for (int h : poisoned.hour_indices_in_days(split.s1)) {
        if (poisoned.cell(*ref_site, h)) {
            poisoned.cell_mut(*ref_site, h)[Channel::ref_no2] =
                std::numeric_limits<double>::quiet_NaN();
        }
    }
    LoocvOutcome poisoned_cv = loocv(poisoned, synth.model, kernel, ModelKind::gwr, split);

    // the fold for the poisoned station is unchanged: its S1 reference rows
    // were never touched by the fit
    REQUIRE(clean_cv.folds[0].site == panel.sites()[held].id);
    REQUIRE(poisoned_cv.folds[0].ok);
    CHECK(poisoned_cv.folds[0].rmse == doctest::Approx(clean_cv.folds[0].rmse));
    for (size_t b = 0; b < 6; ++b) {
        CHECK(poisoned_cv.folds[0].model->beta[b] ==
              doctest::Approx(clean_cv.folds[0].model->beta[b]));
    }
}

TEST_CASE("rmse_by_hour reductions") {
    SUBCASE("single site reduces to absolute error per timestamp") {
        std::vector<CvPrediction> preds = {{0, 100, 12.0, 10.0}, {0, 101, 9.0, 10.0}};
        int skipped = 0;
        auto hourly = rmse_by_hour(preds, 1, &skipped);
        REQUIRE(hourly.size() == 2);
        CHECK(hourly[0].rmse == doctest::Approx(2.0));
        CHECK(hourly[1].rmse == doctest::Approx(1.0));
        CHECK(skipped == 0);
    }
    SUBCASE("constant error across sites is that error at every hour") {
        std::vector<CvPrediction> preds;
        for (int site = 0; site < 5; ++site) {
            for (HourStamp h = 0; h < 48; ++h) preds.push_back({site, h, 13.0, 10.0});
        }
        auto hourly = rmse_by_hour(preds, 5, nullptr);
        REQUIRE(hourly.size() == 48);
        for (const auto& e : hourly) CHECK(e.rmse == doctest::Approx(3.0));
        CHECK(hourly[0].hour_of_day == 0);
        CHECK(hourly[25].hour_of_day == 1);
    }
    SUBCASE("incomplete site vectors are skipped with a tally") {
        std::vector<CvPrediction> preds = {{0, 100, 1.0, 0.0},
                                           {1, 100, 1.0, 0.0},
                                           {0, 101, 1.0, 0.0}};
        int skipped = 0;
        auto hourly = rmse_by_hour(preds, 2, &skipped);
        CHECK(hourly.size() == 1);
        CHECK(skipped == 1);
    }
}

TEST_CASE("bandwidth_search basics") {
    SynthResult synth = generate(smooth_spec(4, 24 * 16, 2.0), 79);
    DaySplit split = split_days(period_of(synth.panel));

    SUBCASE("a single candidate is returned unconditionally") {
        std::vector<double> one = {750.0};
        BandwidthCurve curve = bandwidth_search(synth.panel, synth.model,
                                                KernelSpec::Kind::gaussian, ModelKind::gwr, one,
                                                split);
        CHECK(curve.best_bandwidth_m == 750.0);
        REQUIRE(curve.cv_rmse.size() == 1);
        CHECK(std::isfinite(curve.cv_rmse[0]));
    }
    SUBCASE("the curve is deterministic and ties break to the smaller bandwidth") {
        std::vector<double> grid = {400.0, 800.0, 1600.0};
        BandwidthCurve a = bandwidth_search(synth.panel, synth.model,
                                            KernelSpec::Kind::gaussian, ModelKind::gwr, grid,
                                            split);
        BandwidthCurve b = bandwidth_search(synth.panel, synth.model,
                                            KernelSpec::Kind::gaussian, ModelKind::gwr, grid,
                                            split, {}, 3);
        REQUIRE(a.cv_rmse.size() == b.cv_rmse.size());
        for (size_t i = 0; i < a.cv_rmse.size(); ++i) CHECK(a.cv_rmse[i] == b.cv_rmse[i]);

        // duplicated candidates: the first (smaller index) minimum wins
        std::vector<double> dup = {a.best_bandwidth_m, a.best_bandwidth_m + 1000.0,
                                   a.best_bandwidth_m};
        BandwidthCurve c = bandwidth_search(synth.panel, synth.model,
                                            KernelSpec::Kind::gaussian, ModelKind::gwr, dup,
                                            split);
        CHECK(c.best_bandwidth_m == dup[0]);
    }
    SUBCASE("empty candidate list is rejected") {
        CHECK_THROWS_AS(bandwidth_search(synth.panel, synth.model, KernelSpec::Kind::gaussian,
                                         ModelKind::gwr, std::vector<double>{}, split),
                        ConfigError);
    }
}

TEST_CASE("score_models covers all four families on a synthetic network") {
    SynthSpec spec = smooth_spec(4, 24 * 24, 2.0);
    spec.n_deployed = 2;
    SynthResult synth = generate(spec, 83);
    DaySplit split = split_days(period_of(synth.panel));
    KernelSpec kernel{KernelSpec::Kind::gaussian, 1200.0};
    PairingPlan plan = default_pairing(synth.panel);
    auto scores = score_models(synth.panel, synth.model, kernel, split, plan,
                               {ModelKind::collocated, ModelKind::noncollocated, ModelKind::gwr,
                                ModelKind::sgwr});
    int scored = 0, unscored = 0;
    for (const auto& s : scores) {
        if (!s.error.empty()) continue;
        if (s.scored) {
            ++scored;
            CHECK(s.rmse >= 0.0);
            CHECK(s.n > 0);
        } else {
            ++unscored; // deployed sensors have no reference
        }
    }
    // 4 stations x 4 families + 2 deployed x 3 families (no collocated)
    CHECK(scored == 16);
    CHECK(unscored == 6);
}
