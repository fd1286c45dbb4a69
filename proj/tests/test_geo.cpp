#include "aircal/errors.hpp"
#include "aircal/geo.hpp"

#include <doctest.h>

#include <random>

using namespace aircal;

TEST_CASE("project maps the origin onto (0, 0)") {
    LonLat origin{4.4, 51.2};
    Position p = project(origin, origin);
    CHECK(p.x == doctest::Approx(0.0));
    CHECK(p.y == doctest::Approx(0.0));
}

TEST_CASE("project: one millidegree north is about 111.19 m") {
    LonLat origin{4.4, 51.2};
    Position p = project(LonLat{4.4, 51.201}, origin);
    CHECK(p.x == doctest::Approx(0.0).epsilon(1e-12));
    // 6371000 * 0.001 * pi / 180, evaluated independently
    CHECK(p.y == doctest::Approx(111.19492664455873).epsilon(1e-9));
}

TEST_CASE("project: a centidegree east at 51.2 deg latitude") {
    LonLat origin{4.4, 51.2};
    Position p = project(LonLat{4.41, 51.2}, origin);
    // 6371000 * 0.01 * cos(51.2 deg) * pi / 180
    CHECK(p.x == doctest::Approx(696.7516483987212).epsilon(1e-9));
    CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("project rejects out-of-range coordinates") {
    LonLat origin{4.4, 51.2};
    CHECK_THROWS_AS(project(LonLat{4.4, 89.5}, origin), DataError);
    CHECK_THROWS_AS(project(LonLat{4.4, -90.0}, origin), DataError);
    CHECK_THROWS_AS(project(LonLat{400.0, 51.2}, origin), DataError);
    CHECK_THROWS_AS(project(LonLat{4.4, 51.2}, LonLat{4.4, 89.0}), DataError);
}

TEST_CASE("distance basics") {
    CHECK(distance({0, 0}, {0, 0}) == 0.0);
    CHECK(distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
    CHECK(distance({100, 200}, {1560, 200}) == doctest::Approx(1460.0));
}

TEST_CASE("distance is symmetric and satisfies the triangle inequality") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-5000.0, 5000.0);
    for (int i = 0; i < 200; ++i) {
        Position a{coord(rng), coord(rng)};
        Position b{coord(rng), coord(rng)};
        Position c{coord(rng), coord(rng)};
        CHECK(distance(a, b) == distance(b, a));
        CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
    }
}

TEST_CASE("unproject inverts project to desk precision") {
    LonLat origin{4.4024, 51.2194};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dlon(-0.2, 0.2), dlat(-0.1, 0.1);
    for (int i = 0; i < 200; ++i) {
        LonLat p{origin.lon + dlon(rng), origin.lat + dlat(rng)};
        LonLat back = unproject(project(p, origin), origin);
        CHECK(back.lon == doctest::Approx(p.lon).epsilon(1e-9));
        CHECK(back.lat == doctest::Approx(p.lat).epsilon(1e-9));
    }
}

TEST_CASE("bounding box containment") {
    BoundingBox box{0, 0, 100, 50};
    CHECK(box.contains({0, 0}));
    CHECK(box.contains({100, 50}));
    CHECK(!box.contains({101, 10}));
    CHECK(!box.contains({50, -1}));
}
