// shadow.hpp -- extraction of the central log-slope vector tracking the
// renormalized average slopes, with all convergence diagnostics: pseudo
// orbit residuals, exact big-integer pullbacks, interval and image-interval
// gaps against an affine model, and ratio limits.
#pragma once

#include <optional>
#include <vector>

#include "renorm/affine.hpp"

namespace renorm {

// accelerated view of a renormalization state: level k of the schedule is
// Zorich level s.zorichIndex[k] of the state
struct AcceleratedLevels {
    const RenormState* state = nullptr;
    std::vector<int> zorichIndex;  // per accelerated level, within state range

    int levels() const { return static_cast<int>(zorichIndex.size()) - 1; }
    const LevelData& level(int k) const { return state->level(zorichIndex[k]); }
    CocycleWindow window(int m, int n) const {
        return state->window(zorichIndex[m], zorichIndex[n]);
    }
};

inline AcceleratedLevels accelerated(const RenormState& st, const Schedule& s) {
    AcceleratedLevels out;
    out.state = &st;
    for (int idx : s.zorichIndex) {
        if (idx > st.levels()) break;
        out.zorichIndex.push_back(idx);
    }
    return out;
}

struct PseudoOrbitSeries {
    std::vector<int> level;   // n with residual between n and n+1
    Vec residual;             // |L^{n+1} - Z_{n,n+1} L^n|_inf
    Vec normalized;           // residual / ||Z_{n,n+1}||_inf
    DecayFit fit;
    bool flagged = false;     // residuals failed to decrease over 4 levels
};

inline double infNorm(const BigMat& m) {
    double worst = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double row = 0;
        for (std::size_t j = 0; j < m.cols(); ++j)
            row += std::abs(m(i, j).convert_to<double>());
        worst = std::max(worst, row);
    }
    return worst;
}

inline PseudoOrbitSeries pseudoOrbitResiduals(const AcceleratedLevels& acc) {
    PseudoOrbitSeries out;
    for (int n = 0; n + 1 <= acc.levels(); ++n) {
        Vec Ln = acc.level(n).avgLogSlope();
        Vec Lnext = acc.level(n + 1).avgLogSlope();
        BigMat q = acc.window(n, n + 1).matrix;
        Vec transported = applyMixed(q.transpose(), Ln);
        double r = normInf(Lnext - transported);
        out.level.push_back(n);
        out.residual.push_back(r);
        out.normalized.push_back(r / infNorm(q));
    }
    Vec ns(out.level.begin(), out.level.end());
    out.fit = fitDecay(ns, out.residual, 1e-15);
    int rising = 0;
    for (std::size_t i = 0; i + 1 < out.residual.size(); ++i) {
        rising = out.residual[i + 1] > 1e-14 && out.residual[i + 1] >= out.residual[i]
                     ? rising + 1
                     : 0;
        if (rising >= 4) out.flagged = true;
    }
    return out;
}

struct ShadowOptions {
    int splitDepth = 10;
    double condLimit = 1e8;
    int minLevel = 1;  // decompositions need a past
};

struct ShadowDiagnostics {
    Vec omega;                 // central representative at level 0
    Vec omegaKernel;           // orthogonal projection onto the kernel
    std::vector<int> levelsUsed;
    Vec increments;            // |v_{n+1} - v_n|
    Vec shadowError;           // |omega^n - L^n| per level
    Vec stablePart, unstablePart, centralPart;  // |L^{n,s}|, |L^{n,u}|, |L^{n,c}|
    std::vector<double> isoConditions;
    int chosenLevel = 0;
    bool cauchy = false;
    DecayFit shadowFit;
    std::vector<SplittingEstimate> splits;  // aligned with levelsUsed
};

struct ShadowFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Splittings along the accelerated orbit. The transitions come from the
// reference log, which extends beyond the state's own depth so that the
// backward estimates at deep levels still have a future to look at.
inline std::vector<SplittingEstimate> splittingSeries(const InductionLog& refLog,
                                                      const Schedule& s, int upTo,
                                                      const ShadowOptions& opt) {
    auto trans = heightTransitions(refLog, s);
    std::vector<SplittingEstimate> out;
    for (int n = opt.minLevel; n <= upTo; ++n) {
        auto sing = singularityStructure(refLog.permAtZorich(s.zorichIndex[n]));
        out.push_back(estimateSplitting(trans, n, opt.splitDepth, sing.kernelBasis,
                                        opt.condLimit));
    }
    return out;
}

// Extract the shadowing slope vector: decompose L^n along the splitting,
// pull the central part back through the exact integer window inverse, and
// truncate the Cauchy sequence at its smallest increment.
inline ShadowDiagnostics extractOmega(const AcceleratedLevels& acc, const InductionLog& refLog,
                                      const Schedule& s,
                                      const std::vector<SplittingEstimate>& splits,
                                      const ShadowOptions& opt = {}) {
    ShadowDiagnostics out;
    int top = std::min(acc.levels(), opt.minLevel + static_cast<int>(splits.size()) - 1);
    if (top < opt.minLevel + 1) throw ShadowFailure("not enough accepted levels");

    std::vector<Vec> vs;
    for (int n = opt.minLevel; n <= top; ++n) {
        const SplittingEstimate& split = splits[n - opt.minLevel];
        Vec Ln = acc.level(n).avgLogSlope();
        auto dec = split.decompose(Ln);
        out.stablePart.push_back(norm2(dec.stable));
        out.unstablePart.push_back(norm2(dec.unstable));
        out.centralPart.push_back(norm2(dec.central));
        out.isoConditions.push_back(split.isoCondition);
        out.levelsUsed.push_back(n);

        // v_n = (Q_{0,n}^T)^{-1} L^{n,c} through the exact adjugate
        BigMat q = acc.window(0, n).matrix;
        BigInt det = determinant(q);
        if (!(det == 1 || det == -1)) throw ShadowFailure("window is not unimodular");
        BigMat adj = adjugate(q);
        Vec pulled = applyMixed(adj.transpose(), dec.central);
        if (det == -1)
            for (auto& x : pulled) x = -x;
        vs.push_back(pulled);
    }

    for (std::size_t i = 0; i + 1 < vs.size(); ++i)
        out.increments.push_back(normInf(vs[i + 1] - vs[i]));

    // smallest increment marks the best truncation; require the sequence to
    // have actually decreased on the way there (a flat series at rounding
    // level counts as converged)
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.increments.size(); ++i)
        if (out.increments[i] < out.increments[best]) best = i;
    out.cauchy = !out.increments.empty() &&
                 (best > 0 || out.increments[best] < 1e-12 ||
                  out.increments.size() <= 2 || out.increments[0] < out.increments[1] * 4);
    if (!out.cauchy) throw ShadowFailure("pullback increments do not decrease");
    out.chosenLevel = opt.minLevel + static_cast<int>(best) + 1;
    out.omega = vs[best + 1];

    out.omegaKernel = kernelProjection(refLog.startPerm, out.omega);
    out.splits = splits;

    // shadow error per level: |Q_{0,n}^T omega - L^n|
    for (int n = opt.minLevel; n <= top; ++n) {
        BigMat q = acc.window(0, n).matrix;
        Vec trans = applyMixed(q.transpose(), out.omega);
        out.shadowError.push_back(normInf(trans - acc.level(n).avgLogSlope()));
    }
    Vec ns;
    for (int n = opt.minLevel; n <= top; ++n) ns.push_back(n);
    out.shadowFit = fitDecay(ns, out.shadowError, 1e-15);
    return out;
}

// ---- model comparison ----------------------------------------------------

struct IntervalGapSeries {
    std::vector<int> level;
    Vec intervalGap;   // max_a | |I^n_a(f)|/|I^n(f)| - |I^n_a(S)|/|I^n(S)| |
    Vec imageGap;      // same for the image intervals
    Vec projective;    // d_p of the normalized length vectors
    DecayFit intervalFit, imageFit;
};

inline IntervalGapSeries intervalRatioReport(const AcceleratedLevels& f,
                                             const AcceleratedLevels& s) {
    IntervalGapSeries out;
    int top = std::min(f.levels(), s.levels());
    for (int n = 0; n <= top; ++n) {
        const LevelData& lf = f.level(n);
        const LevelData& ls = s.level(n);
        if (lf.perm != ls.perm) throw std::invalid_argument("interval report: path mismatch");
        double ig = 0, wg = 0;
        Vec nf(lf.u.size()), ns(lf.u.size());
        for (std::size_t a = 0; a < lf.u.size(); ++a) {
            nf[a] = lf.u[a] / lf.total;
            ns[a] = ls.u[a] / ls.total;
            ig = std::max(ig, std::abs(nf[a] - ns[a]));
            wg = std::max(wg, std::abs(lf.w[a] / lf.total - ls.w[a] / ls.total));
        }
        out.level.push_back(n);
        out.intervalGap.push_back(ig);
        out.imageGap.push_back(wg);
        out.projective.push_back(hilbertMetric(nf, ns));
    }
    Vec ns2(out.level.begin(), out.level.end());
    out.intervalFit = fitDecay(ns2, out.intervalGap, 1e-15);
    out.imageFit = fitDecay(ns2, out.imageGap, 1e-15);
    return out;
}

struct RatioLimit {
    double constant = 1.0;          // limit of |I^n(f)| / |I^n(S)|
    Vec perAlphaGap;                // per level: max_a |ratio identity - 1|
    Vec consecutiveGap;             // per level: |total ratio step - 1|
    Vec constantSeries;             // |I^n(f)|/|I^n(S)| per level
    DecayFit consecutiveFit;
};

inline RatioLimit ratioLimit(const AcceleratedLevels& f, const AcceleratedLevels& s) {
    RatioLimit out;
    int top = std::min(f.levels(), s.levels());
    double prevRatio = 0;
    for (int n = 0; n <= top; ++n) {
        const LevelData& lf = f.level(n);
        const LevelData& ls = s.level(n);
        double ratio = lf.total / ls.total;
        out.constantSeries.push_back(ratio);
        double per = 0;
        for (std::size_t a = 0; a < lf.u.size(); ++a)
            per = std::max(per, std::abs(ratio * ls.u[a] / lf.u[a] - 1.0));
        out.perAlphaGap.push_back(per);
        if (n > 0) out.consecutiveGap.push_back(std::abs(ratio / prevRatio - 1.0));
        prevRatio = ratio;
    }
    out.constant = out.constantSeries.back();
    Vec ns;
    for (std::size_t i = 1; i < out.constantSeries.size(); ++i)
        ns.push_back(static_cast<double>(i));
    out.consecutiveFit = fitDecay(ns, out.consecutiveGap, 1e-15);
    return out;
}

// ---- exponential-closeness condition ---------------------------------------

struct EcReport {
    std::vector<int> level;
    Vec e1;  // identity distance of the zoomed renormalization
    Vec e2;  // |L^{n,u}|
    Vec e3;  // |L^{n,s}|
    Vec distortionSeries;
    DecayFit e1Fit, e2Fit, e3Fit, distortionFit;
};

inline EcReport ecCheck(const AcceleratedLevels& acc,
                        const std::vector<SplittingEstimate>& splits, int minLevel,
                        int grid = 128) {
    EcReport out;
    int top = std::min(acc.levels(), minLevel + static_cast<int>(splits.size()) - 1);
    for (int n = minLevel; n <= top; ++n) {
        const SplittingEstimate& split = splits[n - minLevel];
        Vec Ln = acc.level(n).avgLogSlope();
        auto dec = split.decompose(Ln);
        out.level.push_back(n);
        out.e1.push_back(acc.state->identityDistance(acc.zorichIndex[n], grid));
        out.e2.push_back(norm2(dec.unstable));
        out.e3.push_back(norm2(dec.stable));
        out.distortionSeries.push_back(acc.state->distortion(acc.zorichIndex[n], grid));
    }
    Vec ns(out.level.begin(), out.level.end());
    out.e1Fit = fitDecay(ns, out.e1, 1e-14);
    out.e2Fit = fitDecay(ns, out.e2, 1e-14);
    out.e3Fit = fitDecay(ns, out.e3, 1e-14);
    out.distortionFit = fitDecay(ns, out.distortionSeries, 1e-14);
    return out;
}

// Zorich-clock variant of the first EC quantity
inline Vec identitySeriesZorich(const RenormState& st, int grid = 64) {
    Vec out;
    for (int m = 0; m <= st.levels(); ++m) out.push_back(st.identityDistance(m, grid));
    return out;
}

}  // namespace renorm
