// circle.hpp -- piecewise smooth circle homeomorphisms with break points,
// identified with rotation-type interval exchanges: jump ratios, the
// boundary dictionary, break equivalence through a conjugacy, and the
// unique stable-slope adjustment removing the spurious break.
#pragma once

#include <map>
#include <optional>
#include <vector>

#include "renorm/conjugacy.hpp"
#include "renorm/oseledets.hpp"

namespace renorm {

struct CircleMap {
    Giet giet;       // rotation-type combinatorics, total length one
    int shift = 0;   // the k of the rotation-type identity

    explicit CircleMap(Giet g) : giet(std::move(g)) {
        auto k = giet.perm().rotationShift();
        if (!k) throw std::invalid_argument("circle map needs rotation-type combinatorics");
        if (std::abs(giet.total() - 1.0) > 1e-9)
            throw std::invalid_argument("circle map needs total length one");
        shift = *k;
    }
};

inline Giet gietOfCircle(const CircleMap& c) { return c.giet; }
inline CircleMap circleOfGiet(const Giet& g) { return CircleMap(g); }

struct BreakPoint {
    int endpoint = 0;     // index j of u_j, 0 <= j < d
    double position = 0;  // u_j as a circle coordinate
    double jumpRatio = 1; // Df_-(x) / Df_+(x) on the circle
};

// one-sided circle derivatives at the partition endpoints; at u_0 the left
// derivative wraps to the left limit at u_d
inline std::vector<BreakPoint> jumpRatios(const CircleMap& c, double breakTol = 1e-10) {
    const Giet& f = c.giet;
    int d = f.d();
    std::vector<BreakPoint> all;
    for (int j = 0; j < d; ++j) {
        double x = f.domainCuts()[j];
        double dMinus = j == 0 ? f.deriv(f.total(), Side::Left) : f.deriv(x, Side::Left);
        double dPlus = f.deriv(x, Side::Right);
        if (!(dMinus > 0) || !(dPlus > 0))
            throw std::runtime_error("vanishing one-sided derivative");
        all.push_back({j, x, dMinus / dPlus});
    }
    std::vector<BreakPoint> breaks;
    for (const auto& bp : all)
        if (std::abs(bp.jumpRatio - 1.0) > breakTol) breaks.push_back(bp);
    return breaks;
}

inline double jumpRatioProduct(const CircleMap& c) {
    const Giet& f = c.giet;
    double prod = 1;
    for (int j = 0; j < f.d(); ++j) {
        double x = f.domainCuts()[j];
        double dMinus = j == 0 ? f.deriv(f.total(), Side::Left) : f.deriv(x, Side::Left);
        prod *= dMinus / f.deriv(x, Side::Right);
    }
    return prod;
}

// membership test for the class with exactly d-1 breaks: no break at
// u_{d-k-1} and every boundary component nonzero
inline bool hasExactBreakCount(const CircleMap& c, double tol = 1e-10) {
    const Giet& f = c.giet;
    int d = f.d();
    int special = d - c.shift - 1;
    if (std::abs(logDerivJump(f, special)) > tol) return false;
    for (double b : boundary(f))
        if (std::abs(b) < tol) return false;
    return true;
}

// boundary components read off as log jump ratios through the index map of
// the rotation-type identification
inline Vec boundaryFromJumps(const CircleMap& c) {
    const Giet& f = c.giet;
    int d = f.d();
    int cut = d - c.shift - 1;
    auto ratioAt = [&](int j) {
        double x = f.domainCuts()[j];
        double dMinus = j == 0 ? f.deriv(f.total(), Side::Left) : f.deriv(x, Side::Left);
        return dMinus / f.deriv(x, Side::Right);
    };
    Vec b(d - 1, 0.0);
    for (int s = 1; s <= d - 1; ++s) {
        int j = s <= cut ? s - 1 : s;
        b[s - 1] = std::log(ratioAt(j));
    }
    return b;
}

struct BreakEquivalenceReport {
    bool equivalent = false;
    double worstPositionGap = 0;
    double worstRatioGap = 0;
};

// break equivalence of two circle maps through a conjugacy h at tower
// resolution: h must match break sets and jump ratios
inline BreakEquivalenceReport breakEquivalent(const CircleMap& f, const CircleMap& g,
                                              const SemiConjugacy& h,
                                              double positionTol, double ratioTol = 1e-8) {
    BreakEquivalenceReport rep;
    auto bf = jumpRatios(f);
    auto bg = jumpRatios(g);
    if (bf.size() != bg.size()) return rep;
    // match h-images of f-breaks to the nearest g-break
    for (const auto& bpf : bf) {
        double target = h(bpf.position);
        const BreakPoint* best = nullptr;
        double bestGap = std::numeric_limits<double>::infinity();
        for (const auto& bpg : bg) {
            double gap = std::abs(bpg.position - target);
            if (gap < bestGap) {
                bestGap = gap;
                best = &bpg;
            }
        }
        rep.worstPositionGap = std::max(rep.worstPositionGap, bestGap);
        rep.worstRatioGap =
            std::max(rep.worstRatioGap, std::abs(best->jumpRatio - bpf.jumpRatio));
    }
    rep.equivalent = rep.worstPositionGap <= positionTol && rep.worstRatioGap <= ratioTol;
    return rep;
}

struct StableAdjustment {
    Vec adjusted;       // omega + v
    Vec v;              // the stable correction
    double a = 0;       // block value of v on the first block
    double t = 0;       // block ratio, v = a on low block, t*a on high block
    double targetRatio = 1;  // jump ratio at u_{d-k-1} before adjustment
};

// Unique stable-direction correction making the jump ratio at u_{d-k-1}
// equal to one for any affine model with slope omega + v.
inline StableAdjustment stableAdjustment(const Vec& lambda, const Permutation& p,
                                         const Vec& omega) {
    auto kOpt = p.rotationShift();
    if (!kOpt) throw std::invalid_argument("stable adjustment needs rotation type");
    int d = p.d();
    int cut = d - *kOpt - 1;

    double sumLow = 0, sumHigh = 0;
    for (int a = 0; a < d; ++a) (p.top(a) <= cut ? sumLow : sumHigh) += lambda[a];
    double t = -sumLow / sumHigh;

    // affine jump ratio at u_cut: slopes of the neighbouring branches
    int leftSym = p.symbolAtTop(cut);
    int rightSym = p.symbolAtTop(cut + 1);
    double rho = std::exp(omega[leftSym] - omega[rightSym]);

    StableAdjustment out;
    out.t = t;
    out.targetRatio = rho;
    out.a = std::log(rho) / (t - 1.0);
    out.v.assign(d, 0.0);
    for (int a = 0; a < d; ++a) out.v[a] = p.top(a) <= cut ? out.a : t * out.a;
    out.adjusted = omega;
    for (int a = 0; a < d; ++a) out.adjusted[a] += out.v[a];
    return out;
}

}  // namespace renorm
