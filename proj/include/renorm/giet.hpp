// giet.hpp -- generalized interval exchange transformations: permutation,
// domain/image lengths and one profile per branch. Provides sided
// evaluation, closed-form inverses, the boundary operator, mean
// non-linearity, the zoom view of a branch, and constructors (standard and
// affine exchanges, prescribed-jump nonlinear maps, smooth conjugates).
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "renorm/iet.hpp"
#include "renorm/unitmap.hpp"

namespace renorm {

enum class Side { Left, Right };

struct Branch {
    double a = 0, b = 1;  // domain interval
    double c = 0, d = 1;  // image interval
    UnitMapPtr profile;

    double width() const { return b - a; }
    double imageWidth() const { return d - c; }
    double value(double x) const { return c + (d - c) * profile->value((x - a) / (b - a)); }
    double deriv(double x) const {
        return (d - c) / (b - a) * profile->deriv((x - a) / (b - a));
    }
    double deriv2(double x) const {
        return (d - c) / ((b - a) * (b - a)) * profile->deriv2((x - a) / (b - a));
    }
    double logDeriv(double x) const {
        return std::log((d - c) / (b - a)) + profile->logDeriv((x - a) / (b - a));
    }
    std::pair<double, double> valueAndLogDeriv(double x) const {
        auto [v, l] = profile->valueAndLogDeriv((x - a) / (b - a));
        return {c + (d - c) * v, std::log((d - c) / (b - a)) + l};
    }
    double inverse(double y) const { return a + (b - a) * profile->inverse((y - c) / (d - c)); }
};

// the zoom of a branch: rescaled to a map of [0,1] fixing the endpoints
struct ZoomedBranch {
    Branch inner;
    double value(double t) const {
        return (inner.value(inner.a + t * inner.width()) - inner.c) / inner.imageWidth();
    }
    double deriv(double t) const {
        return inner.deriv(inner.a + t * inner.width()) * inner.width() / inner.imageWidth();
    }
};

inline ZoomedBranch zoom(const Branch& b) {
    if (!(b.width() > 0) || !(b.imageWidth() > 0))
        throw std::invalid_argument("zoom: degenerate interval");
    return {b};
}

class Giet {
public:
    Giet() = default;
    Giet(Permutation perm, Vec u, Vec w, std::vector<UnitMapPtr> profiles)
        : perm_(std::move(perm)), u_(std::move(u)), w_(std::move(w)),
          profiles_(std::move(profiles)) {
        int d = perm_.d();
        if (static_cast<int>(u_.size()) != d || static_cast<int>(w_.size()) != d ||
            static_cast<int>(profiles_.size()) != d)
            throw std::invalid_argument("giet: size mismatch");
        double tu = 0, tw = 0;
        for (int i = 0; i < d; ++i) {
            if (!(u_[i] > 0) || !(w_[i] > 0))
                throw std::invalid_argument("giet: lengths must be positive");
            tu += u_[i];
            tw += w_[i];
        }
        if (std::abs(tu - tw) > kLengthTol * std::max(tu, tw))
            throw std::invalid_argument("giet: domain and image totals differ");
        rebuildCuts();
    }

    static Giet fromIet(const Iet& t) {
        std::vector<UnitMapPtr> prof(t.perm().d(), identityMap());
        return Giet(t.perm(), t.lengths(), t.lengths(), std::move(prof));
    }

    // affine exchange with log-slopes omega: image lengths e^{omega} * u
    static Giet fromAffine(const Permutation& perm, const Vec& lambda, const Vec& omega) {
        Vec w(lambda.size());
        for (std::size_t i = 0; i < lambda.size(); ++i) w[i] = std::exp(omega[i]) * lambda[i];
        std::vector<UnitMapPtr> prof(perm.d(), identityMap());
        return Giet(perm, lambda, w, std::move(prof));
    }

    int d() const { return perm_.d(); }
    const Permutation& perm() const { return perm_; }
    const Vec& domainLengths() const { return u_; }
    const Vec& imageLengths() const { return w_; }
    const std::vector<UnitMapPtr>& profiles() const { return profiles_; }
    const Vec& domainCuts() const { return xcuts_; }
    const Vec& imageCuts() const { return ycuts_; }
    double total() const { return xcuts_.back(); }

    bool isAffine() const {
        for (const auto& p : profiles_)
            if (!isIdentity(*p)) return false;
        return true;
    }

    Vec logSlopes() const {
        Vec omega(u_.size());
        for (std::size_t i = 0; i < u_.size(); ++i) omega[i] = std::log(w_[i] / u_[i]);
        return omega;
    }

    Branch branch(int symbol) const {
        Branch br;
        br.a = xcuts_[perm_.top(symbol) - 1];
        br.b = xcuts_[perm_.top(symbol)];
        br.c = ycuts_[perm_.bottom(symbol) - 1];
        br.d = ycuts_[perm_.bottom(symbol)];
        br.profile = profiles_[symbol];
        return br;
    }

    // symbol whose branch applies at x from the given side
    int symbolAt(double x, Side side = Side::Right) const {
        return perm_.symbolAtTop(slotAt(xcuts_, x, side) + 1);
    }
    int symbolAtImage(double y, Side side = Side::Right) const {
        return perm_.symbolAtBottom(slotAt(ycuts_, y, side) + 1);
    }

    double eval(double x, Side side = Side::Right) const {
        return branch(symbolAt(x, side)).value(x);
    }
    double evalInverse(double y, Side side = Side::Right) const {
        return branch(symbolAtImage(y, side)).inverse(y);
    }
    double logDeriv(double x, Side side = Side::Right) const {
        return branch(symbolAt(x, side)).logDeriv(x);
    }
    double deriv(double x, Side side = Side::Right) const {
        return branch(symbolAt(x, side)).deriv(x);
    }

    // length of the shortest branch derivative on a grid; sanity guard
    double minDerivOnGrid(int grid = 64) const {
        double mn = std::numeric_limits<double>::infinity();
        for (int s = 0; s < d(); ++s) {
            Branch br = branch(s);
            for (int i = 0; i <= grid; ++i) {
                double t = static_cast<double>(i) / grid;
                mn = std::min(mn, br.profile->deriv(t) * br.imageWidth() / br.width());
            }
        }
        return mn;
    }

private:
    static int slotAt(const Vec& cuts, double x, Side side) {
        int n = static_cast<int>(cuts.size()) - 1;
        int idx;
        if (side == Side::Right)
            idx = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), x) -
                                   cuts.begin()) - 1;
        else
            idx = static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), x) -
                                   cuts.begin()) - 1;
        return std::clamp(idx, 0, n - 1);
    }

    void rebuildCuts() {
        int d = perm_.d();
        xcuts_.assign(d + 1, 0.0);
        ycuts_.assign(d + 1, 0.0);
        for (int pos = 1; pos <= d; ++pos) {
            xcuts_[pos] = xcuts_[pos - 1] + u_[perm_.symbolAtTop(pos)];
            ycuts_[pos] = ycuts_[pos - 1] + w_[perm_.symbolAtBottom(pos)];
        }
    }

    Permutation perm_;
    Vec u_, w_;
    std::vector<UnitMapPtr> profiles_;
    Vec xcuts_, ycuts_;
};

// total of D log Df over the interval; telescopes branchwise to the
// difference of endpoint log-derivatives, no quadrature involved
inline double meanNonlinearity(const Giet& f) {
    double total = 0;
    for (int s = 0; s < f.d(); ++s) {
        const UnitMap& p = *f.profiles()[s];
        total += p.logDeriv(1.0) - p.logDeriv(0.0);
    }
    return total;
}

// Log-derivative jump at partition endpoint index i (0..d): left limit minus
// right limit, with log Df treated as zero outside the interval. This
// orientation makes the affine dictionary read B_s = <omega, lambda(O)> and
// the circle dictionary read B_j = log(jump ratio).
inline double logDerivJump(const Giet& f, int i) {
    int d = f.d();
    if (i == 0) return -f.logDeriv(0.0, Side::Right);
    if (i == d) return f.logDeriv(f.total(), Side::Left);
    double x = f.domainCuts()[i];
    return f.logDeriv(x, Side::Left) - f.logDeriv(x, Side::Right);
}

// boundary of a GIET: per-singularity sums of log-derivative jumps
inline Vec boundary(const Giet& f) {
    auto sing = singularityStructure(f.perm());
    Vec b(sing.kappa, 0.0);
    for (int i = 0; i <= f.d(); ++i) b[sing.singularityOf(i)] += logDerivJump(f, i);
    return b;
}

// boundary of an affine exchange from its log-slope vector: kernel pairings
// for the orbits avoiding 0, with the remaining component fixed by the
// zero-sum identity
inline Vec boundaryFromSlopes(const Permutation& perm, const Vec& omega) {
    auto sing = singularityStructure(perm);
    Vec b(sing.kappa, 0.0);
    double others = 0;
    std::size_t kv = 0;
    for (int o = 0; o < sing.kappa; ++o) {
        if (sing.orbits[o].front() == 0) continue;
        double s = 0;
        for (int i = 0; i < perm.d(); ++i)
            s += omega[i] * static_cast<double>(sing.kernelBasis[kv][i]);
        b[o] = s;
        others += s;
        ++kv;
    }
    for (int o = 0; o < sing.kappa; ++o)
        if (sing.orbits[o].front() == 0) b[o] = -others;
    return b;
}

// ---- prescribed-jump construction --------------------------------------

struct JumpSolveReport {
    Vec left, right;  // endpoint log-derivatives per symbol, relative to the frame
    double residual = 0.0;
    bool converged = false;
};

// Solve the linear jump system for the endpoint log-derivatives of each
// branch profile: d+1 equations (one per partition endpoint) in 2d unknowns,
// full row rank, solved in minimum norm through the Gram matrix.
inline JumpSolveReport solveJumpParameters(const Permutation& perm, const Vec& u, const Vec& w,
                                           const Vec& targets) {
    int d = perm.d();
    if (static_cast<int>(targets.size()) != d + 1)
        throw std::invalid_argument("need one jump target per endpoint");
    Vec base(d);
    for (int s = 0; s < d; ++s) base[s] = std::log(w[s] / u[s]);

    // unknowns z = (p_0..p_{d-1}, q_0..q_{d-1}); rows of the jump map:
    //   t_0 = -(base + p)_{top 1}
    //   t_i = (base + q)_{top i} - (base + p)_{top i+1}
    //   t_d = (base + q)_{top d}
    Mat J(static_cast<std::size_t>(d + 1), static_cast<std::size_t>(2 * d));
    Vec rhs(d + 1, 0.0);
    {
        int sym = perm.symbolAtTop(1);
        J(0, sym) = -1.0;
        rhs[0] = targets[0] + base[sym];
    }
    for (int i = 1; i < d; ++i) {
        int l = perm.symbolAtTop(i), r = perm.symbolAtTop(i + 1);
        J(i, d + l) = 1.0;
        J(i, r) = -1.0;
        rhs[i] = targets[i] - base[l] + base[r];
    }
    {
        int sym = perm.symbolAtTop(d);
        J(d, d + sym) = 1.0;
        rhs[d] = targets[d] - base[sym];
    }

    Mat gram(static_cast<std::size_t>(d + 1), static_cast<std::size_t>(d + 1));
    for (int a = 0; a <= d; ++a)
        for (int b = 0; b <= d; ++b) {
            double acc = 0;
            for (int k = 0; k < 2 * d; ++k) acc += J(a, k) * J(b, k);
            gram(a, b) = acc;
        }
    Vec mu = renorm::solve(gram, rhs);
    Vec z(2 * d, 0.0);
    for (int k = 0; k < 2 * d; ++k)
        for (int a = 0; a <= d; ++a) z[k] += J(a, k) * mu[a];

    JumpSolveReport rep;
    rep.left.assign(d, 0.0);
    rep.right.assign(d, 0.0);
    for (int s = 0; s < d; ++s) {
        rep.left[s] = z[s];
        rep.right[s] = z[d + s];
    }
    // verify
    double worst = 0;
    worst = std::max(worst, std::abs(-(base[perm.symbolAtTop(1)] + rep.left[perm.symbolAtTop(1)]) -
                                     targets[0]));
    for (int i = 1; i < d; ++i) {
        int l = perm.symbolAtTop(i), r = perm.symbolAtTop(i + 1);
        worst = std::max(worst, std::abs((base[l] + rep.right[l]) - (base[r] + rep.left[r]) -
                                         targets[i]));
    }
    worst = std::max(worst, std::abs(base[perm.symbolAtTop(d)] +
                                     rep.right[perm.symbolAtTop(d)] - targets[d]));
    rep.residual = worst;
    rep.converged = worst < 1e-10;
    return rep;
}

// GIET with the given lengths and prescribed endpoint jumps
inline Giet gietWithJumps(const Permutation& perm, const Vec& u, const Vec& w,
                          const Vec& targets, JumpSolveReport* reportOut = nullptr) {
    auto rep = solveJumpParameters(perm, u, w, targets);
    if (reportOut) *reportOut = rep;
    if (!rep.converged) throw std::runtime_error("jump system is inconsistent");
    std::vector<UnitMapPtr> prof;
    for (int s = 0; s < perm.d(); ++s) {
        if (std::abs(rep.left[s]) < 1e-14 && std::abs(rep.right[s]) < 1e-14)
            prof.push_back(identityMap());
        else
            prof.push_back(logLinearMap(rep.left[s], rep.right[s]));
    }
    return Giet(perm, u, w, std::move(prof));
}

// seeded random GIET with zero mean non-linearity: simplex lengths,
// uniform jump targets recentred to sum zero
inline Giet randomZeroMeanGiet(Rng& rng, const Permutation& perm, double jumpScale = 0.3) {
    int d = perm.d();
    Vec u = rng.simplex(d);
    Vec targets(d + 1);
    double mean = 0;
    for (auto& t : targets) {
        t = rng.uniform(-jumpScale, jumpScale);
        mean += t;
    }
    mean /= (d + 1);
    for (auto& t : targets) t -= mean;
    return gietWithJumps(perm, u, u, targets);
}

// ---- smooth conjugation --------------------------------------------------

namespace detail {
// zoomed branch of h^{-1} o S o h restricted to one continuity interval
class ConjugateUnit final : public UnitMap {
public:
    ConjugateUnit(UnitMapPtr h, Branch sBranch, double af, double bf, double cf, double df)
        : h_(std::move(h)), s_(std::move(sBranch)), af_(af), bf_(bf), cf_(cf), df_(df) {}

    double value(double t) const override {
        return (map(af_ + t * (bf_ - af_)) - cf_) / (df_ - cf_);
    }
    double deriv(double t) const override {
        double x = af_ + t * (bf_ - af_);
        return mapDeriv(x) * (bf_ - af_) / (df_ - cf_);
    }
    double deriv2(double t) const override {
        double x = af_ + t * (bf_ - af_);
        double w = bf_ - af_;
        return mapDeriv2(x) * w * w / (df_ - cf_);
    }
    double logDeriv(double t) const override {
        double x = af_ + t * (bf_ - af_);
        double hx = h_->value(x);
        double fx = map(x);
        return s_.logDeriv(hx) + h_->logDeriv(x) - h_->logDeriv(fx) +
               std::log((bf_ - af_) / (df_ - cf_));
    }
    std::pair<double, double> valueAndLogDeriv(double t) const override {
        double x = af_ + t * (bf_ - af_);
        auto [hx, lhx] = h_->valueAndLogDeriv(x);
        auto [sy, lsy] = s_.valueAndLogDeriv(hx);
        double fx = h_->inverse(sy);
        double ld = lsy + lhx - h_->logDeriv(fx) + std::log((bf_ - af_) / (df_ - cf_));
        return {(fx - cf_) / (df_ - cf_), ld};
    }
    double inverse(double yn) const override {
        double y = cf_ + yn * (df_ - cf_);
        double x = h_->inverse(s_.inverse(h_->value(y)));
        return (x - af_) / (bf_ - af_);
    }

private:
    double map(double x) const { return h_->inverse(s_.value(h_->value(x))); }
    double mapDeriv(double x) const {
        double hx = h_->value(x);
        double fx = map(x);
        return s_.deriv(hx) * h_->deriv(x) / h_->deriv(fx);
    }
    double mapDeriv2(double x) const {
        // F = hinv o g with g = S o h
        double hx = h_->value(x);
        double gp = s_.deriv(hx) * h_->deriv(x);
        double gpp = s_.deriv2(hx) * h_->deriv(x) * h_->deriv(x) + s_.deriv(hx) * h_->deriv2(x);
        double fx = map(x);
        double hp = h_->deriv(fx);
        double hpp = h_->deriv2(fx);
        return -hpp * gp * gp / (hp * hp * hp) + gpp / hp;
    }

    UnitMapPtr h_;
    Branch s_;
    double af_, bf_, cf_, df_;
};
}  // namespace detail

// the conjugated exchange h^{-1} o S o h for a diffeo h of [0,1] fixing the
// endpoints; combinatorics and symbolic dynamics are those of S
inline Giet conjugateGiet(const Giet& S, const UnitMapPtr& h) {
    if (std::abs(S.total() - 1.0) > 1e-9)
        throw std::invalid_argument("conjugation assumes total length one");
    int d = S.d();
    Vec u(d), w(d);
    Vec xf(d + 1), yf(d + 1);
    for (int i = 0; i <= d; ++i) {
        xf[i] = h->inverse(S.domainCuts()[i]);
        yf[i] = h->inverse(S.imageCuts()[i]);
    }
    for (int s = 0; s < d; ++s) {
        u[s] = xf[S.perm().top(s)] - xf[S.perm().top(s) - 1];
        w[s] = yf[S.perm().bottom(s)] - yf[S.perm().bottom(s) - 1];
    }
    std::vector<UnitMapPtr> prof;
    for (int s = 0; s < d; ++s) {
        double af = xf[S.perm().top(s) - 1], bf = xf[S.perm().top(s)];
        double cf = yf[S.perm().bottom(s) - 1], df = yf[S.perm().bottom(s)];
        prof.push_back(std::make_shared<detail::ConjugateUnit>(h, S.branch(s), af, bf, cf, df));
    }
    return Giet(S.perm(), u, w, std::move(prof));
}

}  // namespace renorm
