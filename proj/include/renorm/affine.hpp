// affine.hpp -- affine interval exchanges: slope-transfer matrices along a
// path, direct induction, the Hilbert projective metric with its empirical
// contraction check, and construction of affine models by nested cones.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "renorm/induction.hpp"

namespace renorm {

struct Aiet {
    Permutation perm;
    Vec lambda;     // domain lengths
    Vec omega;      // log-slopes

    Aiet() = default;
    Aiet(Permutation p, Vec l, Vec o)
        : perm(std::move(p)), lambda(std::move(l)), omega(std::move(o)) {
        double lu = 0, lw = 0;
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            if (!(lambda[i] > 0)) throw std::invalid_argument("aiet: lengths must be positive");
            lu += lambda[i];
            lw += std::exp(omega[i]) * lambda[i];
        }
        if (std::abs(lu - lw) > kLengthTol * std::max(lu, lw))
            throw std::invalid_argument("aiet: image total differs from domain total");
    }

    Giet toGiet() const { return Giet::fromAffine(perm, lambda, omega); }
};

// rescale lambda inside the closure constraint sum (e^w - 1) lambda = 0;
// used to absorb the finite-depth error of cone limits
inline Vec closeLengths(Vec lambda, const Vec& omega) {
    double gap = 0, norm = 0;
    Vec dir(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        dir[i] = std::expm1(omega[i]);
        gap += dir[i] * lambda[i];
        norm += dir[i] * dir[i];
    }
    if (norm < 1e-30) return lambda;
    for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] -= gap * dir[i] / norm;
    return lambda;
}

// slope-transfer matrix of one induction step: identity pattern except at
// the loser slot; transports lengths backwards, lambda = U lambda'
struct SlopeTransfer {
    Mat u;
    int epsilon = 0;
    int winner = 0, loser = 0;
};

inline SlopeTransfer uMatrix(const StepRecord& step, const Vec& omegaAtStep) {
    int d = static_cast<int>(omegaAtStep.size());
    SlopeTransfer st;
    st.epsilon = step.epsilon;
    st.winner = step.winner;
    st.loser = step.loser;
    st.u = Mat::identity(d);
    st.u(step.loser, step.loser) =
        std::exp(step.epsilon == 1 ? omegaAtStep[step.winner] : 0.0);
    st.u(step.winner, step.loser) =
        std::exp(step.epsilon == 0 ? omegaAtStep[step.loser] : 0.0);
    return st;
}

// slope transport along one step: the loser branch composes behind the
// winner, so omega'_loser = omega_loser + omega_winner
inline Vec transportSlopes(Vec omega, const StepRecord& step) {
    omega[step.loser] += omega[step.winner];
    return omega;
}

// ordered product of per-step transfer matrices over RV indices [from, to),
// with slopes transported along the way
inline Mat vMatrix(const InductionLog& log, int from, int to, Vec omega) {
    int d = log.startPerm.d();
    for (int i = 0; i < from; ++i) omega = transportSlopes(std::move(omega), log.steps[i]);
    Mat v = Mat::identity(d);
    for (int i = from; i < to; ++i) {
        v = v * uMatrix(log.steps[i], omega).u;
        omega = transportSlopes(std::move(omega), log.steps[i]);
    }
    return v;
}

// one direct induction step on an affine exchange
inline std::pair<Aiet, StepRecord> aietRvStep(const Aiet& s, double tieTol = kKeaneTol) {
    int d = s.perm.d();
    int a0 = s.perm.symbolAtTop(d);
    int a1 = s.perm.symbolAtBottom(d);
    double top = s.lambda[a0];
    double bottom = std::exp(s.omega[a1]) * s.lambda[a1];
    if (std::abs(top - bottom) <= tieTol * std::max(top, bottom)) throw KeaneViolation(0);
    StepRecord rec;
    rec.epsilon = top > bottom ? 0 : 1;
    rec.winner = rec.epsilon == 0 ? a0 : a1;
    rec.loser = rec.epsilon == 0 ? a1 : a0;
    Vec lam = s.lambda;
    Vec om = s.omega;
    if (rec.epsilon == 0) {
        lam[a0] -= bottom;
        om[a1] += om[a0];
    } else {
        lam[a0] = s.lambda[a0] / std::exp(s.omega[a1]);
        lam[a1] -= lam[a0];
        om[a0] += om[a1];
    }
    if (!(lam[a0] > 0) || !(lam[a1] > 0)) throw KeaneViolation(0);
    Aiet out;
    out.perm = s.perm.rauzyMove(rec.epsilon);
    out.lambda = std::move(lam);
    out.omega = std::move(om);
    return {std::move(out), rec};
}

inline double hilbertMetric(const Vec& v, const Vec& w) {
    if (v.size() != w.size()) throw std::invalid_argument("hilbert: size mismatch");
    double maxRatio = -std::numeric_limits<double>::infinity();
    double minRatio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0) || !(w[i] > 0))
            throw std::invalid_argument("hilbert: entries must be positive");
        double r = v[i] / w[i];
        maxRatio = std::max(maxRatio, r);
        minRatio = std::min(minRatio, r);
    }
    return std::log(maxRatio / minRatio);
}

struct ContractionReport {
    double factor = 0.0;    // max sampled d_p(Vv,Vw)/d_p(v,w)
    bool positive = false;  // entrywise positive matrix
    int samples = 0;
};

// empirical projective contraction factor over seeded positive pairs; a
// matrix with zero entries is only non-expanding and is reported as such
inline ContractionReport contractionCheck(const Mat& v, int samples, Rng& rng) {
    ContractionReport rep;
    rep.samples = samples;
    rep.positive = true;
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (std::size_t j = 0; j < v.cols(); ++j)
            if (!(v(i, j) > 0)) rep.positive = false;
    std::size_t d = v.cols();
    double worst = 0;
    for (int k = 0; k < samples; ++k) {
        Vec a(d), b(d);
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = rng.uniform(0.05, 1.0);
            b[i] = rng.uniform(0.05, 1.0);
        }
        double before = hilbertMetric(a, b);
        if (before < 1e-12) continue;
        Vec va = matVec(v, a), vb = matVec(v, b);
        worst = std::max(worst, hilbertMetric(va, vb) / before);
    }
    rep.factor = worst;
    return rep;
}

struct AffineModelResult {
    Aiet model;
    int certifiedDepth = 0;     // RV steps the model provably follows
    double coneGap = 0.0;       // projective distance between the last two nests
    bool converged = false;
};

// Affine model with log-slope omega over the recorded path: the length
// vector is the nested-cone limit of the slope-transfer products applied to
// the barycentre, evaluated at increasing depths until the projective gap
// falls below tol. The returned exchange is re-induced against the path to
// certify how far it actually follows it.
inline AffineModelResult constructAffineModel(const InductionLog& log, const Schedule& s,
                                              const Vec& omega, int depthLevels,
                                              double tol = 1e-12) {
    int d = log.startPerm.d();
    double totalRef = 0;
    for (double x : log.startLengths) totalRef += x;

    // grow the nested image level by level until the projective gap between
    // consecutive depths falls below tol; the product is renormalized along
    // the way since its conditioning grows exponentially
    AffineModelResult res;
    int maxLevels = std::min(depthLevels, s.levels());
    Mat prod = Mat::identity(d);
    Vec om = omega;
    Vec bary(d, 1.0 / d);
    Vec prev;
    Vec cur;
    int rvDone = 0;
    int usedLevels = 0;
    for (int level = 1; level <= maxLevels; ++level) {
        for (int i = rvDone; i < s.rvIndex[level]; ++i) {
            prod = prod * uMatrix(log.steps[i], om).u;
            om = transportSlopes(std::move(om), log.steps[i]);
            double mx = 0;
            for (std::size_t r = 0; r < prod.rows(); ++r)
                for (std::size_t c = 0; c < prod.cols(); ++c)
                    mx = std::max(mx, std::abs(prod(r, c)));
            if (mx > 1e50)
                for (std::size_t r = 0; r < prod.rows(); ++r)
                    for (std::size_t c = 0; c < prod.cols(); ++c) prod(r, c) /= mx;
        }
        rvDone = s.rvIndex[level];
        Vec img = matVec(prod, bary);
        double sum = 0;
        for (double x : img) sum += x;
        for (auto& x : img) x *= totalRef / sum;
        prev = cur;
        cur = img;
        usedLevels = level;
        if (!prev.empty()) {
            res.coneGap = hilbertMetric(prev, cur);
            if (res.coneGap < tol) {
                res.converged = true;
                break;
            }
        }
    }
    maxLevels = usedLevels;

    Vec lambda = closeLengths(cur, omega);
    res.model = Aiet(log.startPerm, lambda, omega);

    // certify path following by direct re-induction
    Aiet walk = res.model;
    int rvTarget = s.rvIndex[maxLevels];
    for (int i = 0; i < rvTarget; ++i) {
        StepRecord rec;
        try {
            auto stepped = aietRvStep(walk);
            walk = std::move(stepped.first);
            rec = stepped.second;
        } catch (const KeaneViolation&) {
            break;
        }
        if (rec.epsilon != log.steps[i].epsilon) break;
        res.certifiedDepth = i + 1;
    }
    return res;
}

}  // namespace renorm
