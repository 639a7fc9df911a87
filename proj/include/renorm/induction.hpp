// induction.hpp -- Rauzy-Veech induction of generalized interval exchanges.
// Levels are recorded per Zorich step; induced branches are never composed
// symbolically, evaluation iterates the base map for the recorded heights.
// All level-bound orbits ride a tower floor as an interval and select the
// branch by the floor midpoint, which keeps endpoint orbits on the correct
// side of the cuts regardless of rounding.
#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "renorm/giet.hpp"
#include "renorm/oseledets.hpp"
#include "renorm/path.hpp"

namespace renorm {

struct PathDivergence : std::runtime_error {
    PathDivergence(int rvStep, int expected, int got)
        : std::runtime_error("induced type diverges from the reference path at step " +
                             std::to_string(rvStep) + " (expected " +
                             std::to_string(expected) + ", got " + std::to_string(got) + ")"),
          rvStep(rvStep) {}
    int rvStep;
};

struct FloorCursor {
    double a = 0, b = 0;
    double width() const { return b - a; }
};

// forward ride of a floor [a,b]; the callback sees the branch and the floor
// before each step
template <class PerStep>
FloorCursor rideFloor(const Giet& f, FloorCursor c, long long steps, PerStep&& per) {
    for (long long j = 0; j < steps; ++j) {
        int sym = f.symbolAt(0.5 * (c.a + c.b), Side::Right);
        Branch br = f.branch(sym);
        per(sym, br, c);
        c.a = br.value(c.a);
        c.b = br.value(c.b);
    }
    return c;
}

inline FloorCursor rideFloor(const Giet& f, FloorCursor c, long long steps) {
    return rideFloor(f, c, steps, [](int, const Branch&, const FloorCursor&) {});
}

// backward ride through the inverse, selecting by the image midpoint
inline FloorCursor rideFloorInverse(const Giet& f, FloorCursor c, long long steps) {
    for (long long j = 0; j < steps; ++j) {
        int sym = f.symbolAtImage(0.5 * (c.a + c.b), Side::Right);
        Branch br = f.branch(sym);
        c.a = br.inverse(c.a);
        c.b = br.inverse(c.b);
    }
    return c;
}

// plain orbit sums for generic interior points (potential solving etc.)
inline double orbitValue(const Giet& f, double x, long long steps) {
    for (long long j = 0; j < steps; ++j) x = f.eval(x);
    return x;
}

struct LevelData {
    Permutation perm;
    Vec u, w;                      // induced domain / image lengths
    std::vector<long long> heights;
    double total = 0;              // |I^n|
    int rvIndex = 0;               // RV steps consumed to reach this level

    Vec domainCuts() const {
        Vec x(u.size() + 1, 0.0);
        for (std::size_t pos = 1; pos < x.size(); ++pos)
            x[pos] = x[pos - 1] + u[perm.symbolAtTop(static_cast<int>(pos))];
        return x;
    }
    Vec imageCuts() const {
        Vec y(w.size() + 1, 0.0);
        for (std::size_t pos = 1; pos < y.size(); ++pos)
            y[pos] = y[pos - 1] + w[perm.symbolAtBottom(static_cast<int>(pos))];
        return y;
    }
    Vec avgLogSlope() const {
        Vec L(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) L[i] = std::log(w[i] / u[i]);
        return L;
    }
    FloorCursor interval(int alpha) const {
        Vec x = domainCuts();
        return {x[perm.top(alpha) - 1], x[perm.top(alpha)]};
    }
};

struct RenormOptions {
    int zorichDepth = 20;
    long long heightCap = 10'000'000;
    double tieTol = kKeaneTol;
    const InductionLog* referencePath = nullptr;  // verify types against this when set
};

class RenormState {
public:
    RenormState(Giet base, const RenormOptions& opt) : base_(std::move(base)) { build(opt); }

    const Giet& base() const { return base_; }
    int levels() const { return static_cast<int>(levels_.size()) - 1; }
    const LevelData& level(int n) const { return levels_.at(n); }
    const InductionLog& ownLog() const { return ownLog_; }
    bool stoppedAtCap() const { return cappedAt_ >= 0; }

    // big-integer window of the Zorich cocycle between levels m <= n
    CocycleWindow window(int m, int n) const { return cocycleWindow(ownLog_, m, n); }

    // induced map on interval alpha of level n, evaluated by riding the floor
    double inducedValue(int n, int alpha, double x) const {
        const LevelData& lv = levels_[n];
        double y = x;
        rideFloor(base_, lv.interval(alpha), lv.heights[alpha],
                  [&](int, const Branch& br, const FloorCursor&) { y = br.value(y); });
        return y;
    }
    double inducedLogDeriv(int n, int alpha, double x) const {
        const LevelData& lv = levels_[n];
        CompensatedSum acc;
        double y = x;
        rideFloor(base_, lv.interval(alpha), lv.heights[alpha],
                  [&](int, const Branch& br, const FloorCursor&) {
                      auto [v, l] = br.valueAndLogDeriv(y);
                      acc.add(l);
                      y = v;
                  });
        return acc.value();
    }

    struct ZoomSamples {
        Vec value, deriv;  // on the uniform grid of [0,1]
    };

    // zoomed induced branch on a uniform grid; the whole grid rides the floor
    ZoomSamples sampleZoomedBranch(int n, int alpha, int grid) const {
        if (base_.isAffine()) {
            // compositions of affine branches zoom to the identity
            ZoomSamples out;
            int denom = std::max(grid, 1);
            for (int i = 0; i <= grid; ++i) {
                out.value.push_back(static_cast<double>(i) / denom);
                out.deriv.push_back(1.0);
            }
            return out;
        }
        const LevelData& lv = levels_[n];
        FloorCursor fc = lv.interval(alpha);
        Vec icuts = lv.imageCuts();
        double c = icuts[lv.perm.bottom(alpha) - 1];
        double dIm = icuts[lv.perm.bottom(alpha)];
        int denom = std::max(grid, 1);
        Vec pts(grid + 1), logs(grid + 1, 0.0);
        for (int i = 0; i <= grid; ++i)
            pts[i] = fc.a + fc.width() * static_cast<double>(i) / denom;
        rideFloor(base_, fc, lv.heights[alpha],
                  [&](int, const Branch& br, const FloorCursor&) {
                      for (int i = 0; i <= grid; ++i) {
                          auto [v, l] = br.valueAndLogDeriv(pts[i]);
                          logs[i] += l;
                          pts[i] = v;
                      }
                  });
        ZoomSamples out;
        out.value.resize(grid + 1);
        out.deriv.resize(grid + 1);
        for (int i = 0; i <= grid; ++i) {
            out.value[i] = (pts[i] - c) / (dIm - c);
            out.deriv[i] = std::exp(logs[i]) * fc.width() / (dIm - c);
        }
        return out;
    }

    // max over branches of the C1 distance between the zoomed branch and the identity
    double identityDistance(int n, int grid) const {
        double worst = 0;
        int denom = std::max(grid, 1);
        for (int alpha = 0; alpha < base_.d(); ++alpha) {
            ZoomSamples s = sampleZoomedBranch(n, alpha, grid);
            double dv = 0, dd = 0;
            for (int i = 0; i <= grid; ++i) {
                double t = static_cast<double>(i) / denom;
                dv = std::max(dv, std::abs(s.value[i] - t));
                dd = std::max(dd, std::abs(s.deriv[i] - 1.0));
            }
            worst = std::max(worst, dv + dd);
        }
        return worst;
    }

    // max_alpha sup ratio of induced-branch derivatives minus one
    double distortion(int n, int grid) const {
        if (base_.isAffine()) return 0.0;
        double worst = 0;
        const LevelData& lv = levels_[n];
        for (int alpha = 0; alpha < base_.d(); ++alpha) {
            FloorCursor fc = lv.interval(alpha);
            int denom = std::max(grid, 1);
            Vec pts(grid + 1), logs(grid + 1, 0.0);
            for (int i = 0; i <= grid; ++i)
                pts[i] = fc.a + fc.width() * static_cast<double>(i) / denom;
            rideFloor(base_, fc, lv.heights[alpha],
                      [&](int, const Branch& br, const FloorCursor&) {
                          for (int i = 0; i <= grid; ++i) {
                              auto [v, l] = br.valueAndLogDeriv(pts[i]);
                              logs[i] += l;
                              pts[i] = v;
                          }
                      });
            double mn = logs[0], mx = logs[0];
            for (double v : logs) {
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            worst = std::max(worst, std::expm1(mx - mn));
        }
        return worst;
    }

    // boundary of the level-n renormalization via orbit log-derivative jumps
    Vec boundaryAtLevel(int n) const {
        const LevelData& lv = levels_[n];
        auto sing = singularityStructure(lv.perm);
        int d = base_.d();
        // per interval: orbit log-derivative sums at both endpoints
        Vec leftSum(d, 0.0), rightSum(d, 0.0);
        for (int alpha = 0; alpha < d; ++alpha) {
            FloorCursor fc = lv.interval(alpha);
            CompensatedSum la, lb;
            double xa = fc.a, xb = fc.b;
            rideFloor(base_, fc, lv.heights[alpha],
                      [&](int, const Branch& br, const FloorCursor&) {
                          la.add(br.logDeriv(xa));
                          lb.add(br.logDeriv(xb));
                          xa = br.value(xa);
                          xb = br.value(xb);
                      });
            leftSum[alpha] = la.value();   // right-limit at the left endpoint
            rightSum[alpha] = lb.value();  // left-limit at the right endpoint
        }
        Vec jumps(d + 1, 0.0);
        jumps[0] = -leftSum[lv.perm.symbolAtTop(1)];
        for (int i = 1; i < d; ++i)
            jumps[i] = rightSum[lv.perm.symbolAtTop(i)] - leftSum[lv.perm.symbolAtTop(i + 1)];
        jumps[d] = rightSum[lv.perm.symbolAtTop(d)];
        Vec b(sing.kappa, 0.0);
        for (int i = 0; i <= d; ++i) b[sing.singularityOf(i)] += jumps[i];
        return b;
    }

    // return-time length matrix: entry (beta, alpha) sums |f^j(I^n_alpha)| / |I^n_alpha|
    // over the tower floors of alpha inside I_beta of the base map
    Mat returnMatrix(int n) const {
        const LevelData& lv = levels_[n];
        int d = base_.d();
        Mat m(d, d);
        for (int alpha = 0; alpha < d; ++alpha) {
            FloorCursor fc = lv.interval(alpha);
            double w0 = fc.width();
            rideFloor(base_, fc, lv.heights[alpha],
                      [&](int sym, const Branch&, const FloorCursor& c) {
                          m(sym, alpha) += c.width() / w0;
                      });
        }
        return m;
    }

private:
    void build(const RenormOptions& opt) {
        const Giet& f = base_;
        int d = f.d();
        LevelData cur;
        cur.perm = f.perm();
        cur.u = f.domainLengths();
        cur.w = f.imageLengths();
        cur.heights.assign(d, 1);
        cur.total = f.total();
        cur.rvIndex = 0;
        levels_.push_back(cur);

        ownLog_.startPerm = f.perm();
        ownLog_.startLengths = cur.u;
        ownLog_.perms.push_back(cur.perm);

        bool affine = f.isAffine();
        int lastType = -1;
        int rv = 0;
        while (true) {
            int a0 = cur.perm.symbolAtTop(d);
            int a1 = cur.perm.symbolAtBottom(d);
            double top = cur.u[a0], bottom = cur.w[a1];
            if (std::abs(top - bottom) <= opt.tieTol * std::max(top, bottom))
                throw KeaneViolation(rv);
            int eps = top > bottom ? 0 : 1;
            if (opt.referencePath) {
                if (rv >= opt.referencePath->rvSize()) break;
                int expected = opt.referencePath->steps[rv].epsilon;
                if (eps != expected) throw PathDivergence(rv, expected, eps);
            }
            if (eps != lastType) {
                if (lastType != -1) {
                    levels_.push_back(cur);  // state at the start of the new Zorich run
                    if (static_cast<int>(levels_.size()) - 1 >= opt.zorichDepth) {
                        ownLog_.zorichStart.push_back(rv);  // closes the last recorded run
                        return;
                    }
                }
                ownLog_.zorichStart.push_back(rv);
                lastType = eps;
            }
            int winner = eps == 0 ? a0 : a1;
            int loser = eps == 0 ? a1 : a0;
            long long newHeight = cur.heights[winner] + cur.heights[loser];
            if (newHeight > opt.heightCap) {
                cappedAt_ = static_cast<int>(levels_.size()) - 1;
                break;
            }

            if (eps == 0) {
                // remove the last image interval; the loser branch composes
                // behind the winner branch
                double newW1;
                if (affine) {
                    newW1 = (cur.w[a0] / cur.u[a0]) * cur.w[a1];
                } else {
                    FloorCursor img = rideFloor(f, {cur.total - cur.w[a1], cur.total},
                                                cur.heights[a0]);
                    newW1 = img.width();
                }
                cur.u[a0] -= cur.w[a1];
                cur.w[a0] -= newW1;
                cur.w[a1] = newW1;
                cur.heights[a1] = newHeight;
            } else {
                // remove the last domain interval; the winner branch splits
                double newU0;
                if (affine) {
                    newU0 = cur.u[a0] * cur.u[a1] / cur.w[a1];
                } else {
                    FloorCursor pre = rideFloorInverse(f, {cur.total - cur.u[a0], cur.total},
                                                       cur.heights[a1]);
                    newU0 = pre.width();
                }
                cur.w[a1] -= cur.u[a0];
                cur.u[a1] -= newU0;
                cur.u[a0] = newU0;
                cur.heights[a0] = newHeight;
            }
            cur.total -= eps == 0 ? bottom : top;
            cur.perm = cur.perm.rauzyMove(eps);
            for (int i = 0; i < d; ++i)
                if (!(cur.u[i] > 0) || !(cur.w[i] > 0)) throw KeaneViolation(rv);

            StepRecord rec;
            rec.epsilon = eps;
            rec.winner = winner;
            rec.loser = loser;
            ownLog_.steps.push_back(rec);
            ownLog_.perms.push_back(cur.perm);
            ownLog_.lengthTrace.push_back(cur.u);
            ++rv;
            cur.rvIndex = rv;
        }
    }

    Giet base_;
    std::vector<LevelData> levels_;
    InductionLog ownLog_;
    int cappedAt_ = -1;
};

// C1 distance of two exchanges with the same permutation: per branch, the
// grid sup of the zoomed difference (values and derivatives) plus the
// domain- and image-length gaps; maximum over branches
inline double dC1(const Giet& f, const Giet& g, int grid = 512) {
    if (f.perm() != g.perm()) throw std::invalid_argument("dC1: permutation mismatch");
    double worst = 0;
    int denom = std::max(grid, 1);
    for (int alpha = 0; alpha < f.d(); ++alpha) {
        auto zf = zoom(f.branch(alpha));
        auto zg = zoom(g.branch(alpha));
        double dv = 0, dd = 0;
        for (int i = 0; i <= grid; ++i) {
            double t = static_cast<double>(i) / denom;
            dv = std::max(dv, std::abs(zf.value(t) - zg.value(t)));
            dd = std::max(dd, std::abs(zf.deriv(t) - zg.deriv(t)));
        }
        double term = dv + dd +
                      std::abs(f.domainLengths()[alpha] - g.domainLengths()[alpha]) +
                      std::abs(f.imageLengths()[alpha] - g.imageLengths()[alpha]);
        worst = std::max(worst, term);
    }
    return worst;
}

// same distance between level-n renormalizations, lengths normalized by the
// level totals
inline double dC1(const RenormState& fs, const RenormState& gs, int n, int grid = 512) {
    const LevelData& lf = fs.level(n);
    const LevelData& lg = gs.level(n);
    if (lf.perm != lg.perm) throw std::invalid_argument("dC1: permutation mismatch");
    double worst = 0;
    for (int alpha = 0; alpha < lf.perm.d(); ++alpha) {
        auto sf = fs.sampleZoomedBranch(n, alpha, grid);
        auto sg = gs.sampleZoomedBranch(n, alpha, grid);
        double dv = 0, dd = 0;
        for (int i = 0; i <= grid; ++i) {
            dv = std::max(dv, std::abs(sf.value[i] - sg.value[i]));
            dd = std::max(dd, std::abs(sf.deriv[i] - sg.deriv[i]));
        }
        double term = dv + dd + std::abs(lf.u[alpha] / lf.total - lg.u[alpha] / lg.total) +
                      std::abs(lf.w[alpha] / lf.total - lg.w[alpha] / lg.total);
        worst = std::max(worst, term);
    }
    return worst;
}

}  // namespace renorm
