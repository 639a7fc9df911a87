// shared fixtures: the self-similar d=3 rotation-type reference and model
// builders used across the shadow/conjugacy/circle/pipeline tests
#pragma once

#include <cmath>

#include "renorm/pipeline.hpp"

namespace testsupport {

using namespace renorm;

struct PeriodicRig {
    PeriodicReference per;
    InductionLog log;
    Schedule sched;
    Vec kernelDir;  // unit kernel direction at level 0

    static const PeriodicRig& instance() {
        static PeriodicRig rig = build();
        return rig;
    }

    static PeriodicRig build(int reps = 120) {
        PeriodicRig r;
        r.per = findPeriodicReference(Permutation::fromMonodromy({2, 3, 1}));
        r.log = periodicLog(r.per, reps);
        r.sched = accelerate(r.log, r.per.loop);
        auto sing = singularityStructure(r.log.startPerm);
        r.kernelDir.assign(3, 0.0);
        double n2 = 0;
        for (int i = 0; i < 3; ++i) {
            r.kernelDir[i] = static_cast<double>(sing.kernelBasis[0][i]);
            n2 += r.kernelDir[i] * r.kernelDir[i];
        }
        for (auto& x : r.kernelDir) x /= std::sqrt(n2);
        return r;
    }

    // slope in the central-stable block with kernel projection along kernelDir
    Vec centralSlope(double slopeScale) const {
        Vec target(3);
        for (int i = 0; i < 3; ++i) target[i] = slopeScale * kernelDir[i];
        auto trans = heightTransitions(log, sched);
        auto sing = singularityStructure(log.startPerm);
        return centralStableLift(trans, std::min<int>(static_cast<int>(trans.size()), 24),
                                 sing.kernelBasis, target);
    }

    // affine model over the reference path, normalized to total length one
    Giet modelWithSlope(const Vec& omega) const {
        auto res = constructAffineModel(log, sched, omega, sched.levels());
        Vec lam = res.model.lambda;
        double tot = 0;
        for (double x : lam) tot += x;
        for (auto& x : lam) x /= tot;
        return Giet::fromAffine(log.startPerm, closeLengths(lam, omega), omega);
    }

    Giet normalizedModel(double slopeScale) const {
        return modelWithSlope(centralSlope(slopeScale));
    }

    Giet normalizedIet() const {
        Vec lam = log.startLengths;
        double tot = 0;
        for (double x : lam) tot += x;
        for (auto& x : lam) x /= tot;
        return Giet::fromIet(Iet(lam, log.startPerm));
    }

    RenormState state(const Giet& g, int levels, long long cap = 10'000'000) const {
        RenormOptions opt;
        opt.zorichDepth = sched.zorichIndex[levels];
        opt.heightCap = cap;
        opt.referencePath = &log;
        return RenormState(g, opt);
    }
};

}  // namespace testsupport
