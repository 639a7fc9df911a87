#include <doctest.h>

#include <cmath>

#include "renorm/induction.hpp"
#include "renorm/quad.hpp"

using namespace renorm;

namespace {
Giet randomGiet(Rng& rng, const Permutation& p) { return randomZeroMeanGiet(rng, p, 0.25); }
}  // namespace

TEST_CASE("induction of an IET reproduces the recorded path") {
    Iet t({0.3137, 0.2219, 0.2883, 0.1761}, Permutation::fromMonodromy({4, 3, 2, 1}));
    InductionLog ref = recordInduction(t, 40);
    RenormOptions opt;
    opt.zorichDepth = std::min(6, ref.zorichSize());
    RenormState st(Giet::fromIet(t), opt);
    REQUIRE(st.levels() >= 4);
    // arrows agree with the plain IET induction
    for (int i = 0; i < st.ownLog().rvSize(); ++i) {
        CHECK(st.ownLog().steps[i].epsilon == ref.steps[i].epsilon);
        CHECK(st.ownLog().steps[i].winner == ref.steps[i].winner);
    }
    // lengths agree with the recorded trace
    for (int n = 1; n <= st.levels(); ++n) {
        const LevelData& lv = st.level(n);
        Vec expected = ref.lengthTrace[ref.zorichEnd(n - 1) - 1];
        for (int a = 0; a < 4; ++a) CHECK(lv.u[a] == doctest::Approx(expected[a]).epsilon(1e-10));
        // heights match the big-integer window
        auto q = heightsAtZorich(ref, n);
        for (int a = 0; a < 4; ++a)
            CHECK(BigInt(lv.heights[a]) == q[a]);
    }
}

TEST_CASE("induced map evaluation equals iterating the base map") {
    Rng rng(7);
    Permutation p = Permutation::fromMonodromy({2, 3, 1});
    Giet f = randomGiet(rng, p);
    RenormOptions opt;
    opt.zorichDepth = 5;
    RenormState st(f, opt);
    int n = st.levels();
    const LevelData& lv = st.level(n);
    Vec cuts = lv.domainCuts();
    for (int alpha = 0; alpha < 3; ++alpha) {
        double a = cuts[lv.perm.top(alpha) - 1], b = cuts[lv.perm.top(alpha)];
        for (int k = 1; k <= 10; ++k) {
            double x = a + (b - a) * k / 11.0;
            double byOrbit = x;
            for (long long j = 0; j < lv.heights[alpha]; ++j) byOrbit = f.eval(byOrbit);
            CHECK(st.inducedValue(n, alpha, x) == doctest::Approx(byOrbit).epsilon(1e-10));
        }
    }
    // chain rule: log-derivative of the induced branch is the orbit sum
    double x = cuts[1] + 1e-4;
    int alpha = lv.perm.symbolAtTop(2);
    double h = 1e-7;
    double fd = (st.inducedValue(n, alpha, x + h) - st.inducedValue(n, alpha, x - h)) / (2 * h);
    CHECK(st.inducedLogDeriv(n, alpha, x) == doctest::Approx(std::log(fd)).epsilon(1e-4));
}

TEST_CASE("induced intervals tile and the length relation holds") {
    Rng rng(11);
    for (int trial = 0; trial < 6; ++trial) {
        Permutation p = trial % 2 == 0 ? Permutation::fromMonodromy({2, 3, 1})
                                       : Permutation::fromMonodromy({4, 3, 2, 1});
        Giet f = randomGiet(rng, p);
        RenormOptions opt;
        opt.zorichDepth = 4;
        RenormState st(f, opt);
        for (int n = 1; n <= st.levels(); ++n) {
            const LevelData& lv = st.level(n);
            double sumU = 0, sumW = 0;
            for (int a = 0; a < p.d(); ++a) {
                CHECK(lv.u[a] > 0);
                sumU += lv.u[a];
                sumW += lv.w[a];
            }
            CHECK(sumU == doctest::Approx(lv.total).epsilon(1e-10));
            CHECK(sumW == doctest::Approx(lv.total).epsilon(1e-10));
            // |I(f)| = M |I^n|, entries of M from tower floor lengths
            Mat m = st.returnMatrix(n);
            Vec pred = matVec(m, lv.u);
            for (int a = 0; a < p.d(); ++a)
                CHECK(pred[a] == doctest::Approx(f.domainLengths()[a]).epsilon(1e-9));
        }
    }
}

TEST_CASE("boundary is invariant under renormalization") {
    Rng rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        Permutation p = Permutation::fromMonodromy({2, 3, 1});
        Giet f = randomGiet(rng, p);
        Vec b0 = boundary(f);
        RenormOptions opt;
        opt.zorichDepth = 4;
        RenormState st(f, opt);
        for (int n = 1; n <= st.levels(); ++n) {
            Vec bn = st.boundaryAtLevel(n);
            REQUIRE(bn.size() == b0.size());
            for (std::size_t i = 0; i < bn.size(); ++i)
                CHECK(bn[i] == doctest::Approx(b0[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("average log-slope of an affine exchange transports exactly") {
    Permutation p = Permutation::fromMonodromy({2, 3, 1});
    Vec lambda{0.4, 0.25, 0.35};
    Vec omega{0.1, -0.05, 0.0};
    double tw = 0;
    for (int i = 0; i < 3; ++i) tw += std::exp(omega[i]) * lambda[i];
    for (auto& o : omega) o -= std::log(tw);
    Giet S = Giet::fromAffine(p, lambda, omega);
    RenormOptions opt;
    opt.zorichDepth = 6;
    RenormState st(S, opt);
    Vec L0 = st.level(0).avgLogSlope();
    for (int i = 0; i < 3; ++i) CHECK(L0[i] == doctest::Approx(omega[i]));
    // L^n equals the height transport of omega through the window
    for (int n = 1; n <= st.levels(); ++n) {
        BigMat q = st.window(0, n).matrix;
        Vec transported = applyMixed(q.transpose(), omega);
        Vec Ln = st.level(n).avgLogSlope();
        for (int i = 0; i < 3; ++i)
            CHECK(Ln[i] == doctest::Approx(transported[i]).epsilon(1e-9));
    }
}

TEST_CASE("IET renormalizations have zero log-slope and zero distortion") {
    Iet t({0.3137, 0.2219, 0.4644}, Permutation::fromMonodromy({3, 2, 1}));
    RenormOptions opt;
    opt.zorichDepth = 5;
    RenormState st(Giet::fromIet(t), opt);
    for (int n = 0; n <= st.levels(); ++n) {
        for (double v : st.level(n).avgLogSlope()) CHECK(v == doctest::Approx(0.0));
        CHECK(st.distortion(n, 16) == doctest::Approx(0.0));
        CHECK(st.identityDistance(n, 16) == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("path divergence against a mismatched reference is reported") {
    Iet t({0.6180339887498949, 0.3819660112501051}, Permutation::fromMonodromy({2, 1}));
    InductionLog ref = recordInduction(t, 20);
    // flip one reference arrow
    REQUIRE(ref.rvSize() >= 6);
    ref.steps[4].epsilon = 1 - ref.steps[4].epsilon;
    Giet g = Giet::fromIet(t);
    RenormOptions opt;
    opt.zorichDepth = 15;
    opt.referencePath = &ref;
    bool threw = false;
    try {
        RenormState st(g, opt);
    } catch (const PathDivergence& e) {
        threw = true;
        CHECK(e.rvStep == 4);
    }
    CHECK(threw);
}

TEST_CASE("height cap stops the build early") {
    Iet t({0.6180339887498949, 0.3819660112501051}, Permutation::fromMonodromy({2, 1}));
    RenormOptions opt;
    opt.zorichDepth = 60;
    opt.heightCap = 100;
    RenormState st(Giet::fromIet(t), opt);
    CHECK(st.stoppedAtCap());
    for (long long h : st.level(st.levels()).heights) CHECK(h <= 100);
}

TEST_CASE("dC1 basics: reflexive, symmetric, affine closed form") {
    Permutation p = Permutation::fromMonodromy({2, 3, 1});
    Rng rng(41);
    Giet f = randomGiet(rng, p);
    Giet g = randomGiet(rng, p);
    CHECK(dC1(f, f, 64) == doctest::Approx(0.0));
    CHECK(dC1(f, g, 64) == doctest::Approx(dC1(g, f, 64)));

    // two affine exchanges with the same lengths: zoomed branches are both the
    // identity, so only the length terms contribute
    Vec lambda{0.5, 0.2, 0.3};
    Vec om1{0.0, 0.0, 0.0};
    Vec om2{0.05, -0.02, 0.0};
    double tw = 0;
    for (int i = 0; i < 3; ++i) tw += std::exp(om2[i]) * lambda[i];
    for (auto& o : om2) o -= std::log(tw);
    Giet a1 = Giet::fromAffine(p, lambda, om1);
    Giet a2 = Giet::fromAffine(p, lambda, om2);
    double expected = 0;
    for (int i = 0; i < 3; ++i)
        expected = std::max(expected,
                            std::abs(std::exp(om2[i]) * lambda[i] - lambda[i]));
    CHECK(dC1(a1, a2, 32) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("distortion of an affine exchange vanishes, single point gives zero") {
    Permutation p = Permutation::fromMonodromy({2, 3, 1});
    Vec lambda{0.4, 0.25, 0.35};
    Giet S = Giet::fromAffine(p, {0.4181, 0.2639, 0.318}, {0.0, 0.0, 0.0});
    RenormOptions opt;
    opt.zorichDepth = 4;
    RenormState st(S, opt);
    CHECK(st.distortion(st.levels(), 32) == doctest::Approx(0.0));
    Rng rng(3);
    Giet f = randomGiet(rng, p);
    RenormState stf(f, opt);
    CHECK(stf.distortion(1, 0) == doctest::Approx(0.0));
}
