// conjugacy.hpp -- dynamical towers, special Birkhoff sums, the tower-matched
// semi-conjugacy, the Gottschalk-Hedlund style solution of the cohomological
// equation, and the derivative reconstruction Dh = C e^psi with verification.
#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "renorm/induction.hpp"

namespace renorm {

struct TowerFloor {
    int alpha = 0;
    long long j = 0;
    double left = 0, right = 0;

    double width() const { return right - left; }
};

struct TowerPartition {
    int level = 0;
    std::vector<TowerFloor> floors;   // in spatial order
    double mesh = 0;                  // max floor width
    double coverGap = 0;              // worst adjacent-floor mismatch

    long long floorCount() const { return static_cast<long long>(floors.size()); }
};

// floors f^j(I^n_alpha) for 0 <= j < q^n_alpha, enumerated by iterating the
// interval endpoints; sorted spatially with the tiling checked
inline TowerPartition towers(const RenormState& st, int n) {
    const LevelData& lv = st.level(n);
    const Giet& f = st.base();
    TowerPartition part;
    part.level = n;
    for (int alpha = 0; alpha < f.d(); ++alpha) {
        long long j = 0;
        rideFloor(f, lv.interval(alpha), lv.heights[alpha],
                  [&](int, const Branch&, const FloorCursor& c) {
                      part.floors.push_back({alpha, j++, c.a, c.b});
                  });
    }
    std::sort(part.floors.begin(), part.floors.end(),
              [](const TowerFloor& a, const TowerFloor& b) { return a.left < b.left; });
    double prevRight = 0;
    for (const auto& fl : part.floors) {
        part.mesh = std::max(part.mesh, fl.width());
        part.coverGap = std::max(part.coverGap, std::abs(fl.left - prevRight));
        prevRight = fl.right;
    }
    part.coverGap = std::max(part.coverGap, std::abs(prevRight - f.total()));
    return part;
}

// branchwise-continuous observable evaluated along orbits
using Observable = std::function<double(double)>;

struct BirkhoffBound {
    std::vector<int> level;
    Vec specialSum;        // max_alpha sup over samples of |S_{q^n_alpha} phi|
    Vec weight;            // ||Z_{n,n+1}||_inf
    Vec partialSums;       // partial sums of weight * specialSum
    double total = 0;
};

inline double specialBirkhoffSup(const RenormState& st, int n, const Observable& phi,
                                 int samplesPerInterval = 5) {
    const LevelData& lv = st.level(n);
    const Giet& f = st.base();
    Vec cuts = lv.domainCuts();
    double worst = 0;
    for (int alpha = 0; alpha < f.d(); ++alpha) {
        double a = cuts[lv.perm.top(alpha) - 1];
        double b = cuts[lv.perm.top(alpha)];
        for (int k = 0; k < samplesPerInterval; ++k) {
            double x = a + (b - a) * (k + 0.5) / samplesPerInterval;
            CompensatedSum acc;
            for (long long j = 0; j < lv.heights[alpha]; ++j) {
                acc.add(phi(x));
                x = f.eval(x);
            }
            worst = std::max(worst, std::abs(acc.value()));
        }
    }
    return worst;
}

inline BirkhoffBound birkhoffBound(const RenormState& st,
                                   const std::vector<int>& zorichLevels,
                                   const Observable& phi) {
    BirkhoffBound out;
    double running = 0;
    for (std::size_t k = 0; k + 1 < zorichLevels.size(); ++k) {
        int n = zorichLevels[k];
        double sup = specialBirkhoffSup(st, n, phi);
        BigMat q = st.window(zorichLevels[k], zorichLevels[k + 1]).matrix;
        double w = 0;
        for (std::size_t i = 0; i < q.rows(); ++i) {
            double row = 0;
            for (std::size_t j = 0; j < q.cols(); ++j)
                row += std::abs(q(i, j).convert_to<double>());
            w = std::max(w, row);
        }
        running += w * sup;
        out.level.push_back(n);
        out.specialSum.push_back(sup);
        out.weight.push_back(w);
        out.partialSums.push_back(running);
    }
    out.total = running;
    return out;
}

// piecewise-affine interpolation through tower floor endpoints
class SemiConjugacy {
public:
    SemiConjugacy() = default;
    SemiConjugacy(Vec xs, Vec ys) : xs_(std::move(xs)), ys_(std::move(ys)) {}

    double operator()(double x) const {
        if (x <= xs_.front()) return ys_.front();
        if (x >= xs_.back()) return ys_.back();
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return ys_[i] + t * (ys_[i + 1] - ys_[i]);
    }

    double inverse(double y) const {
        if (y <= ys_.front()) return xs_.front();
        if (y >= ys_.back()) return xs_.back();
        auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
        std::size_t i = static_cast<std::size_t>(it - ys_.begin()) - 1;
        double t = (y - ys_[i]) / (ys_[i + 1] - ys_[i]);
        return xs_[i] + t * (xs_[i + 1] - xs_[i]);
    }

    // slope of the affine piece containing x
    double slopeAt(double x) const {
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - xs_.begin()),
                                                1, xs_.size() - 1) - 1;
        return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
    }

    const Vec& sources() const { return xs_; }
    const Vec& targets() const { return ys_; }

    double resolution() const {
        double m = 0;
        for (std::size_t i = 0; i + 1 < xs_.size(); ++i) m = std::max(m, xs_[i + 1] - xs_[i]);
        return m;
    }
    double supRatio() const {
        double m = 0;
        for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
            m = std::max(m, (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]));
        return m;
    }
    double infRatio() const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
            m = std::min(m, (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]));
        return m;
    }

private:
    Vec xs_, ys_;
};

struct CombinatorialMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// match floors (alpha, j) of the two towers in spatial order
inline SemiConjugacy buildSemiConjugacy(const RenormState& fs, const RenormState& ss,
                                        int depth) {
    TowerPartition tf = towers(fs, depth);
    TowerPartition ts = towers(ss, depth);
    if (tf.floorCount() != ts.floorCount())
        throw CombinatorialMismatch("tower floor counts differ");
    Vec xs, ys;
    xs.reserve(tf.floors.size() + 1);
    ys.reserve(ts.floors.size() + 1);
    for (std::size_t i = 0; i < tf.floors.size(); ++i) {
        if (tf.floors[i].alpha != ts.floors[i].alpha || tf.floors[i].j != ts.floors[i].j)
            throw CombinatorialMismatch("tower tags disagree in spatial order");
        xs.push_back(tf.floors[i].left);
        ys.push_back(ts.floors[i].left);
    }
    xs.push_back(fs.base().total());
    ys.push_back(ss.base().total());
    return SemiConjugacy(std::move(xs), std::move(ys));
}

struct PotentialSolution {
    Vec xs, values;            // orbit samples of psi, sorted by position
    double psiAtZero = 0;
    double wrapGap = 0;        // |psi(1^-) - psi(0^+)|, relevant in circle mode
    long long orbitLength = 0;

    double operator()(double x) const {
        if (x <= xs.front()) return values.front();
        if (x >= xs.back()) return values.back();
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
        double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return values[i] + t * (values[i + 1] - values[i]);
    }
};

struct CohomologicalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solve phi = psi o f - psi along a single long orbit: the value transported
// from the base point is a Birkhoff sum, and the orbit's closure fills the
// interval, so interpolation between consecutive orbit points converges with
// the special-sum decay. Base point: midpoint of the widest floor of the
// deepest tower, which keeps the whole orbit away from the cut points.
inline PotentialSolution solveCohomological(const RenormState& st, const Observable& phi,
                                            int depth, long long orbitLength = 0) {
    TowerPartition part = towers(st, depth);
    const TowerFloor* widest = &part.floors.front();
    for (const auto& fl : part.floors)
        if (fl.width() > widest->width()) widest = &fl;
    double x0 = 0.5 * (widest->left + widest->right);

    if (orbitLength == 0) {
        long long floorsTotal = part.floorCount();
        orbitLength = std::min<long long>(6 * floorsTotal + 1000, 12'000'000);
    }

    const Giet& f = st.base();
    std::vector<std::pair<double, double>> samples;
    samples.reserve(orbitLength);
    double x = x0;
    CompensatedSum acc;
    for (long long k = 0; k < orbitLength; ++k) {
        samples.emplace_back(x, acc.value());
        acc.add(phi(x));
        x = f.eval(x);
    }
    std::sort(samples.begin(), samples.end());
    PotentialSolution psi;
    psi.orbitLength = orbitLength;
    psi.xs.reserve(samples.size());
    psi.values.reserve(samples.size());
    for (const auto& [pos, val] : samples) {
        if (!psi.xs.empty() && pos - psi.xs.back() < 1e-15) continue;
        psi.xs.push_back(pos);
        psi.values.push_back(val);
    }
    if (psi.xs.size() < 100) throw CohomologicalFailure("orbit did not spread");
    psi.psiAtZero = psi.values.front();
    psi.wrapGap = std::abs(psi.values.back() - psi.values.front());
    return psi;
}

// residual of the identity phi = psi o f - psi on a uniform grid, skipping
// points whose image or preimage falls outside the sampled range
inline double cohomologicalResidual(const RenormState& st, const Observable& phi,
                                    const PotentialSolution& psi, int grid) {
    const Giet& f = st.base();
    double worst = 0;
    for (int i = 1; i < grid; ++i) {
        double x = f.total() * i / grid;
        double r = phi(x) - (psi(f.eval(x)) - psi(x));
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

struct ConjugacyDerivative {
    double C = 1.0;
    double dhGap = 0;         // sup |slope of tower h - C e^psi| on the grid
    double conjResidual = 0;  // sup |h(f(x)) - S(h(x))|
    double integralGap = 0;   // | int C e^psi - |I_S| |
};

// Dh := C e^psi with C fixed by total length; verified against the
// tower-matched map and the conjugacy identity
inline ConjugacyDerivative conjugacyDerivative(const RenormState& fs, const RenormState& ss,
                                               const SemiConjugacy& h,
                                               const PotentialSolution& psi, int grid) {
    const Giet& f = fs.base();
    const Giet& s = ss.base();
    ConjugacyDerivative out;
    // trapezoid for int e^psi over the f-domain
    CompensatedSum integral;
    double T = f.total();
    double prev = std::exp(psi(0.0));
    for (int i = 1; i <= grid; ++i) {
        double x = T * i / grid;
        double cur = std::exp(psi(x));
        integral.add(0.5 * (prev + cur) * (T / grid));
        prev = cur;
    }
    out.C = s.total() / integral.value();

    double dg = 0, cr = 0;
    for (int i = 1; i < grid; ++i) {
        double x = T * i / grid;
        dg = std::max(dg, std::abs(h.slopeAt(x) - out.C * std::exp(psi(x))));
        cr = std::max(cr, std::abs(h(f.eval(x)) - s.eval(h(x))));
    }
    out.dhGap = dg;
    out.conjResidual = cr;

    CompensatedSum check;
    prev = out.C * std::exp(psi(0.0));
    int fine = 2 * grid;
    for (int i = 1; i <= fine; ++i) {
        double x = T * i / fine;
        double cur = out.C * std::exp(psi(x));
        check.add(0.5 * (prev + cur) * (T / fine));
        prev = cur;
    }
    out.integralGap = std::abs(check.value() - s.total());
    return out;
}

}  // namespace renorm
