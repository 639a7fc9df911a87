#include <doctest.h>

#include <cmath>

#include "renorm/conjugacy.hpp"
#include "renorm/quad.hpp"
#include "test_support.hpp"

using namespace renorm;

namespace {
InductionLog goldenLog() { return recordInduction(goldenIetExact(), 80); }

Giet goldenGiet() {
    Vec lam = goldenLog().startLengths;
    double tot = lam[0] + lam[1];
    return Giet::fromIet(Iet({lam[0] / tot, lam[1] / tot}, Permutation::fromMonodromy({2, 1})));
}

RenormState goldenState(int depth) {
    RenormOptions opt;
    opt.zorichDepth = depth;
    return RenormState(goldenGiet(), opt);
}

BigInt fib(int n) {
    BigInt a = 0, b = 1;
    for (int i = 0; i < n; ++i) {
        BigInt t = a + b;
        a = b;
        b = t;
    }
    return a;
}
}  // namespace

TEST_CASE("level-0 towers are the base intervals") {
    RenormState st = goldenState(6);
    TowerPartition part = towers(st, 0);
    REQUIRE(part.floorCount() == 2);
    CHECK(part.floors[0].left == doctest::Approx(0.0));
    CHECK(part.floors[1].right == doctest::Approx(1.0));
    CHECK(part.coverGap < 1e-12);
}

TEST_CASE("floor count equals the height total and golden counts are Fibonacci") {
    RenormState st = goldenState(12);
    for (int n = 1; n <= st.levels(); ++n) {
        TowerPartition part = towers(st, n);
        long long expected = 0;
        for (long long q : st.level(n).heights) expected += q;
        CHECK(part.floorCount() == expected);
        CHECK(part.coverGap < 1e-10);
    }
    // golden level-5 floor total: q = (F(6), F(7)) -> F(8)
    TowerPartition p5 = towers(st, 5);
    CHECK(BigInt(p5.floorCount()) == fib(8));
}

TEST_CASE("towers refine: every deeper floor sits inside a coarser one") {
    RenormState st = goldenState(8);
    TowerPartition coarse = towers(st, 4);
    TowerPartition fine = towers(st, 6);
    CHECK(fine.mesh <= coarse.mesh);
    for (const auto& ff : fine.floors) {
        bool contained = false;
        for (const auto& cf : coarse.floors)
            if (ff.left >= cf.left - 1e-10 && ff.right <= cf.right + 1e-10) {
                contained = true;
                break;
            }
        CHECK(contained);
    }
}

TEST_CASE("birkhoff bounds: zero observable, constant observable") {
    RenormState st = goldenState(10);
    std::vector<int> levels;
    for (int n = 0; n <= st.levels(); ++n) levels.push_back(n);

    auto zero = [](double) { return 0.0; };
    auto bz = birkhoffBound(st, levels, zero);
    CHECK(bz.total == doctest::Approx(0.0));

    // constant observable on a standard exchange: special sums grow like the
    // heights, so the telescoped bound diverges with depth
    auto one = [](double) { return 0.5; };
    auto bo = birkhoffBound(st, levels, one);
    for (std::size_t k = 0; k + 1 < bo.specialSum.size(); ++k)
        CHECK(bo.specialSum[k + 1] > bo.specialSum[k]);
}

TEST_CASE("semiconjugacy of a map with itself is the identity") {
    RenormState a = goldenState(10);
    RenormState b = goldenState(10);
    SemiConjugacy h = buildSemiConjugacy(a, b, 8);
    for (double x : {0.1, 0.33, 0.62, 0.9}) CHECK(h(x) == doctest::Approx(x));
    CHECK(h.supRatio() == doctest::Approx(1.0));
    CHECK(h.infRatio() == doctest::Approx(1.0));
}

TEST_CASE("semiconjugacy with an affine rescale is affine") {
    Vec lam = goldenLog().startLengths;
    double tot = lam[0] + lam[1];
    Giet a = Giet::fromIet(Iet({lam[0] / tot, lam[1] / tot}, Permutation::fromMonodromy({2, 1})));
    Giet b = Giet::fromIet(
        Iet({0.5 * lam[0] / tot, 0.5 * lam[1] / tot}, Permutation::fromMonodromy({2, 1})));
    RenormOptions opt;
    opt.zorichDepth = 10;
    RenormState sa(a, opt), sb(b, opt);
    SemiConjugacy h = buildSemiConjugacy(sa, sb, 8);
    for (double x : {0.2, 0.5, 0.77}) CHECK(h(x) == doctest::Approx(0.5 * x).epsilon(1e-10));
}

TEST_CASE("equivariance at floor endpoints and refinement consistency") {
    const auto& rig = testsupport::PeriodicRig::instance();
    Giet S = rig.normalizedIet();
    Giet f = conjugateGiet(S, sineWarp(0.3));
    int levels = std::min(8, rig.sched.levels() - 4);
    RenormState sf = rig.state(f, levels);
    RenormState ss = rig.state(S, levels);
    int depth = std::min(sf.levels(), ss.levels());
    SemiConjugacy h = buildSemiConjugacy(sf, ss, depth);

    // h o f = S o h at interior floor endpoints
    double worst = 0;
    const Vec& xs = h.sources();
    for (std::size_t i = 1; i + 1 < xs.size(); i += 7) {
        double x = xs[i];
        worst = std::max(worst, std::abs(h(f.eval(x)) - S.eval(h(x))));
    }
    CHECK(worst < 1e-9);

    // coarser matching agrees at shared endpoints
    SemiConjugacy hc = buildSemiConjugacy(sf, ss, depth - 2);
    for (std::size_t i = 0; i < hc.sources().size(); i += 5)
        CHECK(h(hc.sources()[i]) == doctest::Approx(hc.targets()[i]).epsilon(1e-9));

    // the true conjugacy is the warp itself; tower h approximates it
    auto warp = sineWarp(0.3);
    double gap = 0;
    for (double x : {0.12, 0.35, 0.58, 0.81})
        gap = std::max(gap, std::abs(h(x) - warp->value(x)));
    CHECK(gap < 1e-3);
}

TEST_CASE("cohomological solution for identical maps is constant") {
    RenormState st = goldenState(10);
    auto phi = [](double) { return 0.0; };
    PotentialSolution psi = solveCohomological(st, phi, 8);
    double mn = psi.values.front(), mx = psi.values.front();
    for (double v : psi.values) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    CHECK(mx - mn < 1e-12);
    CHECK(cohomologicalResidual(st, phi, psi, 1000) < 1e-12);
}

TEST_CASE("forward-constructed pair: psi matches log Dh0 up to a constant") {
    const auto& rig = testsupport::PeriodicRig::instance();
    Giet S = rig.normalizedIet();
    auto h0 = sineWarp(0.2);
    Giet f = conjugateGiet(S, h0);
    int levels = std::min(9, rig.sched.levels() - 4);
    RenormState sf = rig.state(f, levels);
    RenormState ss = rig.state(S, levels);
    int depth = std::min(sf.levels(), ss.levels());
    SemiConjugacy h = buildSemiConjugacy(sf, ss, depth);

    Observable phi = [&](double x) { return S.logDeriv(h(x)) - f.logDeriv(x); };
    PotentialSolution psi = solveCohomological(sf, phi, depth);
    CHECK(cohomologicalResidual(sf, phi, psi, 10000) < 1e-6);

    // psi = log Dh0 + const on a grid
    double offset = psi(0.5) - std::log(h0->deriv(0.5));
    double sup = 0;
    for (int i = 1; i < 500; ++i) {
        double x = i / 500.0;
        sup = std::max(sup, std::abs(psi(x) - std::log(h0->deriv(x)) - offset));
    }
    CHECK(sup < 1e-4);

    // two base levels give solutions differing by a constant
    PotentialSolution psi2 = solveCohomological(sf, phi, depth - 1);
    double c0 = psi2(0.3) - psi(0.3);
    double worst = 0;
    for (int i = 1; i < 300; ++i) {
        double x = i / 300.0;
        worst = std::max(worst, std::abs(psi2(x) - psi(x) - c0));
    }
    CHECK(worst < 1e-5);

    // derivative reconstruction
    auto dh = conjugacyDerivative(sf, ss, h, psi, 10000);
    CHECK(dh.conjResidual < 1e-5);
    CHECK(dh.integralGap < 1e-8);
    double dhSup = 0;
    for (int i = 1; i < 500; ++i) {
        double x = i / 500.0;
        dhSup = std::max(dhSup, std::abs(dh.C * std::exp(psi(x)) - h0->deriv(x)));
    }
    CHECK(dhSup < 1e-3);
    // positivity
    CHECK(dh.C > 0);
}

TEST_CASE("identical maps give unit derivative and unit constant") {
    RenormState a = goldenState(10);
    RenormState b = goldenState(10);
    SemiConjugacy h = buildSemiConjugacy(a, b, 8);
    auto phi = [](double) { return 0.0; };
    PotentialSolution psi = solveCohomological(a, phi, 8);
    auto dh = conjugacyDerivative(a, b, h, psi, 2000);
    CHECK(dh.C == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(dh.dhGap < 1e-9);
    CHECK(dh.conjResidual < 1e-10);
}
