#include <doctest.h>

#include <cmath>

#include "renorm/giet.hpp"

using namespace renorm;

TEST_CASE("nonlinearity profile basics") {
    NonlinMap m(0.8);
    CHECK(m.value(0.0) == doctest::Approx(0.0));
    CHECK(m.value(1.0) == doctest::Approx(1.0));
    CHECK(m.deriv(0.3) > 0);
    // log-derivative is affine with slope s
    double s = m.logDeriv(0.9) - m.logDeriv(0.1);
    CHECK(s == doctest::Approx(0.8 * 0.8));
    CHECK(m.logDeriv(1.0) - m.logDeriv(0.0) == doctest::Approx(0.8));
    // closed-form inverse
    for (double y : {0.1, 0.5, 0.93}) CHECK(m.value(m.inverse(y)) == doctest::Approx(y));
    // small-parameter branch stays smooth
    NonlinMap tiny(1e-12);
    CHECK(tiny.value(0.37) == doctest::Approx(0.37));
    CHECK(tiny.deriv(0.37) == doctest::Approx(1.0));
}

TEST_CASE("derivatives of profiles match finite differences") {
    auto maps = std::vector<UnitMapPtr>{nonlinMap(0.6), sineWarp(0.4),
                                        compose(nonlinMap(-0.5), sineWarp(0.2))};
    for (const auto& m : maps) {
        for (double t : {0.2, 0.5, 0.8}) {
            double h = 1e-6;
            double fd = (m->value(t + h) - m->value(t - h)) / (2 * h);
            CHECK(m->deriv(t) == doctest::Approx(fd).epsilon(1e-6));
            double fd2 = (m->deriv(t + h) - m->deriv(t - h)) / (2 * h);
            CHECK(m->deriv2(t) == doctest::Approx(fd2).epsilon(1e-4));
            CHECK(m->logDeriv(t) == doctest::Approx(std::log(m->deriv(t))));
            CHECK(m->value(m->inverse(m->value(t))) == doctest::Approx(m->value(t)));
        }
    }
}

TEST_CASE("zoom of an affine branch is the identity") {
    Branch b{0.3, 0.7, 0.1, 0.9, identityMap()};
    auto z = zoom(b);
    for (double t : {0.0, 0.25, 0.9, 1.0}) {
        CHECK(z.value(t) == doctest::Approx(t));
        CHECK(z.deriv(t) == doctest::Approx(1.0));
    }
}

TEST_CASE("zoom fixes the endpoints for every profile") {
    Branch b{0.2, 0.9, 0.05, 0.95, nonlinMap(1.3)};
    auto z = zoom(b);
    CHECK(z.value(0.0) == doctest::Approx(0.0));
    CHECK(z.value(1.0) == doctest::Approx(1.0));
}

TEST_CASE("restriction of a nonlinearity profile zooms to a scaled parameter") {
    // phi_s on [p, q] rescales to phi_{s(q-p)}
    double s = 1.1, p = 0.25, q = 0.65;
    NonlinMap big(s);
    NonlinMap expected(s * (q - p));
    for (double t : {0.0, 0.3, 0.7, 1.0}) {
        double x = p + t * (q - p);
        double zv = (big.value(x) - big.value(p)) / (big.value(q) - big.value(p));
        CHECK(zv == doctest::Approx(expected.value(t)).epsilon(1e-12));
    }
}

TEST_CASE("zoom is idempotent on unit maps fixing the endpoints") {
    Branch b{0.0, 1.0, 0.0, 1.0, nonlinMap(0.7)};
    auto z = zoom(b);
    NonlinMap direct(0.7);
    for (double t : {0.1, 0.6}) CHECK(z.value(t) == doctest::Approx(direct.value(t)));
}

TEST_CASE("degenerate zoom is rejected") {
    Branch b{0.5, 0.5, 0.0, 1.0, identityMap()};
    CHECK_THROWS_AS(zoom(b), std::invalid_argument);
}
