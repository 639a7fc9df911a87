#include <doctest.h>

#include <cmath>

#include "renorm/shadow.hpp"
#include "test_support.hpp"

using namespace renorm;
using testsupport::PeriodicRig;

TEST_CASE("periodic reference follows its own loop") {
    const PeriodicRig& rig = PeriodicRig::instance();
    // the Perron datum really takes the loop's arrows under plain induction
    Iet t(rig.per.perron, rig.log.startPerm);
    for (int i = 0; i < 3 * static_cast<int>(rig.per.loop.types.size()); ++i) {
        auto [next, rec] = rvStep(t);
        CHECK(rec.epsilon == rig.log.steps[i].epsilon);
        t = next;
    }
    CHECK(rig.per.rho > 1.0);
}

TEST_CASE("pseudo-orbit residuals vanish for standard and affine exchanges") {
    const PeriodicRig& rig = PeriodicRig::instance();
    int levels = std::min(10, rig.sched.levels() - 8);
    RenormState stI = rig.state(rig.normalizedIet(), levels);
    auto resI = pseudoOrbitResiduals(accelerated(stI, rig.sched));
    for (double r : resI.residual) CHECK(r < 1e-10);

    RenormState stA = rig.state(rig.normalizedModel(0.12), levels);
    auto resA = pseudoOrbitResiduals(accelerated(stA, rig.sched));
    for (double r : resA.residual) CHECK(r < 1e-8);
    CHECK_FALSE(resA.flagged);
}

TEST_CASE("decomposition splits exactly and transport is consistent") {
    const PeriodicRig& rig = PeriodicRig::instance();
    int levels = std::min(10, rig.sched.levels() - 8);
    RenormState st = rig.state(rig.normalizedModel(0.1), levels);
    auto acc = accelerated(st, rig.sched);

    ShadowOptions opt;
    opt.splitDepth = 8;
    auto splits = splittingSeries(rig.log, rig.sched, acc.levels(), opt);

    for (int n = 1; n <= acc.levels(); ++n) {
        Vec Ln = acc.level(n).avgLogSlope();
        auto dec = splits[n - 1].decompose(Ln);
        Vec sum = dec.stable + dec.central + dec.unstable;
        for (int i = 0; i < 3; ++i) CHECK(sum[i] == doctest::Approx(Ln[i]).epsilon(1e-9));
    }

    Vec omega = acc.level(0).avgLogSlope();
    Vec stepwise = omega;
    for (int n = 1; n <= acc.levels(); ++n) {
        BigMat q = acc.window(n - 1, n).matrix;
        stepwise = applyMixed(q.transpose(), stepwise);
        Vec direct = applyMixed(acc.window(0, n).matrix.transpose(), omega);
        for (int i = 0; i < 3; ++i)
            CHECK(direct[i] == doctest::Approx(stepwise[i]).epsilon(1e-12));
    }
}

TEST_CASE("extraction on a standard exchange returns zero") {
    const PeriodicRig& rig = PeriodicRig::instance();
    int levels = std::min(9, rig.sched.levels() - 9);
    RenormState st = rig.state(rig.normalizedIet(), levels);
    auto acc = accelerated(st, rig.sched);
    ShadowOptions opt;
    opt.splitDepth = 8;
    auto splits = splittingSeries(rig.log, rig.sched, acc.levels(), opt);
    auto diag = extractOmega(acc, rig.log, rig.sched, splits, opt);
    CHECK(normInf(diag.omega) < 1e-9);
    CHECK(normInf(diag.omegaKernel) < 1e-9);
}

TEST_CASE("extraction recovers the kernel slope of an affine exchange") {
    const PeriodicRig& rig = PeriodicRig::instance();
    int levels = std::min(9, rig.sched.levels() - 9);
    Giet aiet = rig.normalizedModel(0.1);
    Vec omega0 = aiet.logSlopes();
    RenormState st = rig.state(aiet, levels);
    auto acc = accelerated(st, rig.sched);
    ShadowOptions opt;
    opt.splitDepth = 8;
    auto splits = splittingSeries(rig.log, rig.sched, acc.levels(), opt);
    auto diag = extractOmega(acc, rig.log, rig.sched, splits, opt);
    Vec target = kernelProjection(rig.log.startPerm, omega0);
    for (int i = 0; i < 3; ++i)
        CHECK(diag.omegaKernel[i] - target[i] == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(diag.shadowError.back() < 1e-5);
}

TEST_CASE("coboundary perturbation recovers the kernel projection of the model") {
    const PeriodicRig& rig = PeriodicRig::instance();
    int levels = std::min(9, rig.sched.levels() - 9);
    Giet S = rig.normalizedModel(0.1);
    Giet f = conjugateGiet(S, sineWarp(0.25));
    RenormState stF = rig.state(f, levels);
    auto accF = accelerated(stF, rig.sched);
    ShadowOptions opt;
    opt.splitDepth = 8;
    auto splits = splittingSeries(rig.log, rig.sched, accF.levels(), opt);
    auto diag = extractOmega(accF, rig.log, rig.sched, splits, opt);
    Vec target = kernelProjection(rig.log.startPerm, S.logSlopes());
    for (int i = 0; i < 3; ++i)
        CHECK(diag.omegaKernel[i] - target[i] == doctest::Approx(0.0).epsilon(1e-4));
    auto res = pseudoOrbitResiduals(accF);
    CHECK(res.fit.rate < 1.0);
}

TEST_CASE("interval ratio report vanishes for identical states") {
    const PeriodicRig& rig = PeriodicRig::instance();
    int levels = std::min(8, rig.sched.levels() - 8);
    Giet aiet = rig.normalizedModel(0.08);
    RenormState s1 = rig.state(aiet, levels);
    RenormState s2 = rig.state(aiet, levels);
    auto rep = intervalRatioReport(accelerated(s1, rig.sched), accelerated(s2, rig.sched));
    for (double g : rep.intervalGap) CHECK(g == doctest::Approx(0.0));
    for (double g : rep.imageGap) CHECK(g == doctest::Approx(0.0));
    auto rl = ratioLimit(accelerated(s1, rig.sched), accelerated(s2, rig.sched));
    CHECK(rl.constant == doctest::Approx(1.0));
    for (double g : rl.perAlphaGap) CHECK(g == doctest::Approx(0.0));
}

TEST_CASE("ratio limit of a rescaled copy is the scale factor") {
    const PeriodicRig& rig = PeriodicRig::instance();
    int levels = std::min(8, rig.sched.levels() - 8);
    Giet a = rig.normalizedIet();
    Vec scaled = 0.4 * a.domainLengths();
    Giet b = Giet::fromIet(Iet(scaled, rig.log.startPerm));
    RenormState sa = rig.state(a, levels);
    RenormState sb = rig.state(b, levels);
    auto rl = ratioLimit(accelerated(sa, rig.sched), accelerated(sb, rig.sched));
    // exact in exact arithmetic; float drift is amplified along the induction
    CHECK(rl.constant == doctest::Approx(1.0 / 0.4).epsilon(1e-4));
    for (double g : rl.consecutiveGap) CHECK(g < 1e-4);
}

TEST_CASE("gaps against the model decay for a conjugated map") {
    const PeriodicRig& rig = PeriodicRig::instance();
    int levels = std::min(8, rig.sched.levels() - 8);
    Giet S = rig.normalizedModel(0.1);
    Giet f = conjugateGiet(S, sineWarp(0.3));
    RenormState stF = rig.state(f, levels);
    RenormState stS = rig.state(S, levels);
    auto accF = accelerated(stF, rig.sched);
    auto accS = accelerated(stS, rig.sched);
    auto rep = intervalRatioReport(accF, accS);
    CHECK(rep.intervalFit.rate < 1.0);
    CHECK(rep.intervalGap.back() < rep.intervalGap[1]);
    auto rl = ratioLimit(accF, accS);
    CHECK(rl.constant > 0);
    CHECK(rl.consecutiveFit.rate < 1.0);

    ShadowOptions opt;
    opt.splitDepth = 8;
    auto splits = splittingSeries(rig.log, rig.sched, accF.levels(), opt);
    auto ec = ecCheck(accF, splits, 1, 24);
    CHECK(ec.e1Fit.rate < 1.0);
    CHECK(ec.e1.back() < ec.e1.front());
    CHECK(ec.distortionFit.rate < 1.0);

    auto ecS = ecCheck(accS, splits, 1, 24);
    for (double v : ecS.e1) CHECK(v < 1e-9);
}
