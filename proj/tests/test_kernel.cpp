#include "aircal/errors.hpp"
#include "aircal/kernel.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace aircal;

TEST_CASE("gaussian weight at characteristic distances") {
    Position s{0, 0};
    CHECK(gaussian_weight(s, {0, 0}, 1000.0) == 1.0);
    // w(B) = exp(-0.5), exactly
    CHECK(gaussian_weight(s, {1460.0, 0.0}, 1460.0) == std::exp(-0.5));
    CHECK(gaussian_weight(s, {0.0, 2000.0}, 1000.0) ==
          doctest::Approx(0.1353352832366127).epsilon(1e-15));
}

TEST_CASE("gaussian weight rejects nonpositive bandwidth") {
    CHECK_THROWS_AS(gaussian_weight({0, 0}, {1, 1}, 0.0), NumericalError);
    CHECK_THROWS_AS(gaussian_weight({0, 0}, {1, 1}, -5.0), NumericalError);
}

TEST_CASE("gtwr weight combines space and hour distance") {
    Position s{0, 0};
    CHECK(gtwr_weight(s, s, 500.0, 9.0, 9.0) == 1.0);
    CHECK(gtwr_weight(s, s, 500.0, 9.0, 8.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(gtwr_weight(s, {500.0, 0.0}, 500.0, 10.0, 8.0) ==
          doctest::Approx(0.06739229552362594).epsilon(1e-12));
}

TEST_CASE("gtwr hour distance is plain by default, circular behind the switch") {
    Position s{0, 0};
    // |23 - 1| = 22 plainly, 2 when wrapping midnight
    double plain = gtwr_weight(s, s, 500.0, 23.0, 1.0);
    double wrapped = gtwr_weight(s, s, 500.0, 23.0, 1.0, 3, true);
    CHECK(plain == doctest::Approx(1.0 / (1.0 + 22.0 * 22.0 * 22.0)));
    CHECK(wrapped == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("weight_vector repeats site weights across repeated rows") {
    KernelSpec kernel{KernelSpec::Kind::gaussian, 800.0};
    Position target{0, 0};
    Position s1{100, 0}, s2{900, 0};
    std::vector<ObservationRow> rows = {{s1, 0}, {s1, 1}, {s2, 2}};
    auto w = weight_vector(kernel, target, std::nullopt, rows);
    REQUIRE(w.size() == 3);
    CHECK(w[0] == w[1]);
    CHECK(w[0] == gaussian_weight(target, s1, 800.0));
    CHECK(w[2] == gaussian_weight(target, s2, 800.0));
}

TEST_CASE("weight_vector approaches the uniform limit for huge bandwidths") {
    KernelSpec kernel{KernelSpec::Kind::gaussian, 1e9};
    std::vector<ObservationRow> rows;
    for (int i = 0; i < 20; ++i) rows.push_back({{i * 700.0, i * 300.0}, 0.0});
    auto w = weight_vector(kernel, {0, 0}, std::nullopt, rows);
    for (double v : w) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("a coincident site dominates under a small bandwidth") {
    KernelSpec kernel{KernelSpec::Kind::gaussian, 50.0};
    Position s1{0, 0}, s2{1000, 0};
    auto w = weight_vector(kernel, s1, std::nullopt, {{s1, 0}, {s2, 0}});
    CHECK(w[0] / w[1] > 1e3);
}

TEST_CASE("weights are positive, bounded and monotone") {
    std::mt19937_64 rng(3);
    // distances up to 10 bandwidths: comfortably inside exp()'s range
    std::uniform_real_distribution<double> ratio(-10.0, 10.0);
    std::uniform_real_distribution<double> bw(50.0, 5000.0);
    Position target{0, 0};
    for (int i = 0; i < 300; ++i) {
        double b = bw(rng);
        Position a{ratio(rng) * b, ratio(rng) * b};
        double w = gaussian_weight(target, a, b);
        CHECK(w > 0.0);
        CHECK(w <= 1.0);
        // nonincreasing in distance at fixed B
        Position farther{a.x * 1.5, a.y * 1.5};
        CHECK(gaussian_weight(target, farther, b) <= w);
        // nondecreasing in B at fixed distance
        CHECK(gaussian_weight(target, a, b * 1.5) >= w);
    }
}

TEST_CASE("gaussian weight equals the exponential rate form with lambda = 1/(2B^2)") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 6000.0);
    double bandwidth = 1460.0;
    KernelSpec spec{KernelSpec::Kind::gaussian, bandwidth};
    double lambda = spec.lambda();
    for (int i = 0; i < 100; ++i) {
        double d = dist(rng);
        double w = gaussian_weight({0, 0}, {d, 0}, bandwidth);
        double rate_form = std::exp(-lambda * d * d);
        CHECK(w == doctest::Approx(rate_form).epsilon(1e-13));
    }
}
