// oseledets.hpp -- numerical splitting of the height cocycle along a
// recorded path: unstable basis by forward frame iteration, stable basis by
// backward iteration with the inverse steps, central basis anchored to the
// kernel of the translation matrix. Includes the closed-form stable space
// for rotation-type data and central lifts of kernel vectors.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "renorm/path.hpp"

namespace renorm {

struct SplittingEstimate {
    std::vector<Vec> basisS, basisC, basisU;  // unit vectors
    Vec exponents;                            // all d, descending
    double fitResidual = 0.0;                 // rms residual of the growth regression
    double instability = 0.0;                 // basis angle between two estimation depths
    double conditionNumber = 0.0;             // of the assembled [S C U] matrix
    double isoCondition = 0.0;  // conditioning of the projection of E^c onto the kernel
    int at = 0;

    int dimS() const { return static_cast<int>(basisS.size()); }
    int dimC() const { return static_cast<int>(basisC.size()); }
    int dimU() const { return static_cast<int>(basisU.size()); }

    Mat assembled() const {
        std::size_t d = basisS.empty()
                            ? (basisC.empty() ? basisU.front().size() : basisC.front().size())
                            : basisS.front().size();
        Mat m(d, static_cast<std::size_t>(dimS() + dimC() + dimU()));
        std::size_t col = 0;
        for (const auto* block : {&basisS, &basisC, &basisU})
            for (const auto& v : *block) {
                for (std::size_t i = 0; i < d; ++i) m(i, col) = v[i];
                ++col;
            }
        return m;
    }

    // coordinates of x split by block; s + c + u == x up to solve error
    struct Decomposition {
        Vec stable, central, unstable;
    };
    Decomposition decompose(const Vec& x) const {
        Mat m = assembled();
        if (m.cols() != m.rows()) throw std::runtime_error("splitting is not a full frame");
        Vec coef = renorm::solve(m, x);
        Decomposition out;
        std::size_t d = x.size();
        out.stable.assign(d, 0.0);
        out.central.assign(d, 0.0);
        out.unstable.assign(d, 0.0);
        std::size_t k = 0;
        for (const auto& v : basisS) {
            for (std::size_t i = 0; i < d; ++i) out.stable[i] += coef[k] * v[i];
            ++k;
        }
        for (const auto& v : basisC) {
            for (std::size_t i = 0; i < d; ++i) out.central[i] += coef[k] * v[i];
            ++k;
        }
        for (const auto& v : basisU) {
            for (std::size_t i = 0; i < d; ++i) out.unstable[i] += coef[k] * v[i];
            ++k;
        }
        return out;
    }
};

struct SplittingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Mat frameFromColumns(const std::vector<Vec>& cols, std::size_t d) {
    Mat m(d, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < d; ++i) m(i, j) = cols[j][i];
    return m;
}

inline std::vector<Vec> firstColumns(const Mat& m, int k) {
    std::vector<Vec> out;
    for (int j = 0; j < k; ++j) {
        Vec v(m.rows());
        for (std::size_t i = 0; i < m.rows(); ++i) v[i] = m(i, j);
        out.push_back(v);
    }
    return out;
}

// push an identity frame through transitions[from..to) and collect
// per-column log growth; transitions act as x_{k+1} = T_k x_k
inline std::pair<Mat, std::vector<Vec>> iterateFrame(const std::vector<Mat>& transitions,
                                                     int from, int to, bool inverse) {
    std::size_t d = transitions.front().rows();
    Mat frame = Mat::identity(d);
    std::vector<Vec> logGrowth(d);
    if (!inverse) {
        for (int k = from; k < to; ++k) {
            frame = transitions[k] * frame;
            Vec diag = orthonormalizeColumns(frame);
            for (std::size_t j = 0; j < d; ++j) logGrowth[j].push_back(std::log(diag[j]));
        }
    } else {
        for (int k = to - 1; k >= from; --k) {
            // solve T_k y = x column by column instead of forming the inverse
            Mat next(d, d);
            for (std::size_t j = 0; j < d; ++j) {
                Vec col(d);
                for (std::size_t i = 0; i < d; ++i) col[i] = frame(i, j);
                Vec y = renorm::solve(transitions[k], col);
                for (std::size_t i = 0; i < d; ++i) next(i, j) = y[i];
            }
            frame = next;
            Vec diag = orthonormalizeColumns(frame);
            for (std::size_t j = 0; j < d; ++j) logGrowth[j].push_back(std::log(diag[j]));
        }
    }
    return {frame, logGrowth};
}

inline double growthRate(const Vec& logs) {
    // average over the last half to skip transients
    std::size_t n = logs.size();
    if (n == 0) return 0.0;
    std::size_t from = n / 2;
    double s = 0;
    for (std::size_t i = from; i < n; ++i) s += logs[i];
    return s / static_cast<double>(n - from);
}

inline Mat inverseTranspose(const Mat& t) {
    std::size_t d = t.rows();
    Mat tt = t.transpose();
    Mat out(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        Vec e(d, 0.0);
        e[j] = 1.0;
        Vec col = renorm::solve(tt, e);
        for (std::size_t i = 0; i < d; ++i) out(i, j) = col[i];
    }
    return out;
}

// orthonormal basis of the orthogonal complement of the given columns
inline std::vector<Vec> orthogonalComplement(const std::vector<Vec>& span, std::size_t d,
                                             int want) {
    Mat f = frameFromColumns(span, d);
    if (!span.empty()) orthonormalizeColumns(f);
    std::vector<Vec> kept;
    for (std::size_t c = 0; c < d && static_cast<int>(kept.size()) < want; ++c) {
        Vec v(d, 0.0);
        v[c] = 1.0;
        for (std::size_t j = 0; j < f.cols(); ++j) {
            double proj = 0;
            for (std::size_t i = 0; i < d; ++i) proj += f(i, j) * v[i];
            for (std::size_t i = 0; i < d; ++i) v[i] -= proj * f(i, j);
        }
        for (const auto& k : kept) {
            double proj = dot(k, v);
            for (std::size_t i = 0; i < d; ++i) v[i] -= proj * k[i];
        }
        double n = norm2(v);
        if (n > 1e-6) {
            for (auto& x : v) x /= n;
            kept.push_back(v);
        }
    }
    if (static_cast<int>(kept.size()) != want)
        throw SplittingError("complement extraction failed");
    return kept;
}

}  // namespace detail

// Estimate the splitting at index `at` of the cocycle given by
// `transitions` (x_{k+1} = T_k x_k). kernelBasis spans the exact kernel of
// the translation matrix at `at` and anchors the central block.
inline SplittingEstimate estimateSplitting(const std::vector<Mat>& transitions, int at,
                                           int depth,
                                           const std::vector<std::vector<long long>>& kernelBasis,
                                           double condLimit = 1e8) {
    int total = static_cast<int>(transitions.size());
    if (at < 0 || at > total) throw std::invalid_argument("estimateSplitting: index");
    std::size_t d = transitions.front().rows();
    int kc = static_cast<int>(kernelBasis.size());
    if ((static_cast<int>(d) - kc) % 2 != 0)
        throw SplittingError("stable/unstable dimensions do not balance");
    int g = (static_cast<int>(d) - kc) / 2;

    int back = std::min(at, depth);
    int fwd = std::min(total - at, depth);
    if (g > 0 && (back < 1 || fwd < 3))
        throw SplittingError("insufficient depth around the requested index");

    SplittingEstimate est;
    est.at = at;

    // unstable: forward from at-back to at
    auto [fFrame, fLogs] = detail::iterateFrame(transitions, at - back, at, false);
    est.basisU = detail::firstColumns(fFrame, g);

    // stable: backward from at+fwd down to at using the inverse steps
    auto [bFrame, bLogs] = detail::iterateFrame(transitions, at, at + fwd, true);
    est.basisS = detail::firstColumns(bFrame, g);

    // central space by duality: the orthogonal complement of the stable and
    // unstable spaces of the length cocycle, whose steps are the inverse
    // transposes of the height steps. The kernel of the translation matrix
    // anchors the dimension count and the isomorphism check below.
    if (kc > 0) {
        std::vector<Mat> lengthSteps;
        lengthSteps.reserve(transitions.size());
        for (const auto& t : transitions) lengthSteps.push_back(detail::inverseTranspose(t));
        auto [luFrame, luLogs] = detail::iterateFrame(lengthSteps, at - back, at, false);
        auto [lsFrame, lsLogs] = detail::iterateFrame(lengthSteps, at, at + fwd, true);
        (void)luLogs;
        (void)lsLogs;
        std::vector<Vec> hyperbolic = detail::firstColumns(luFrame, g);
        for (auto& v : detail::firstColumns(lsFrame, g)) hyperbolic.push_back(std::move(v));
        est.basisC = detail::orthogonalComplement(hyperbolic, d, kc);

        // conditioning of the kernel projection restricted to the central block
        Mat kf(d, static_cast<std::size_t>(kc));
        for (int j = 0; j < kc; ++j)
            for (std::size_t i = 0; i < d; ++i)
                kf(i, j) = static_cast<double>(kernelBasis[j][i]);
        orthonormalizeColumns(kf);
        Mat mix(static_cast<std::size_t>(kc), static_cast<std::size_t>(kc));
        for (int r = 0; r < kc; ++r)
            for (int c = 0; c < kc; ++c) {
                double s = 0;
                for (std::size_t i = 0; i < d; ++i) s += kf(i, r) * est.basisC[c][i];
                mix(r, c) = s;
            }
        est.isoCondition = conditionNumber(mix);
        if (!(est.isoCondition < condLimit))
            throw SplittingError("central block does not project onto the kernel");
    }

    // exponents from the forward run over [at, at+fwd), sorted descending
    auto [eFrame, eLogs] = detail::iterateFrame(transitions, at, at + fwd, false);
    (void)eFrame;
    Vec expo;
    for (std::size_t j = 0; j < d; ++j) expo.push_back(detail::growthRate(eLogs[j]));
    std::sort(expo.rbegin(), expo.rend());
    est.exponents = expo;

    // regression residual of the dominant forward growth
    if (!eLogs.empty() && eLogs[0].size() >= 2) {
        Vec ns, ys;
        CompensatedSum cum;
        for (std::size_t i = 0; i < eLogs[0].size(); ++i) {
            cum.add(eLogs[0][i]);
            ns.push_back(static_cast<double>(i + 1));
            ys.push_back(std::exp(cum.value() / static_cast<double>(i + 1)));
        }
        double mean = 0;
        for (std::size_t i = eLogs[0].size() / 2; i < eLogs[0].size(); ++i) mean += eLogs[0][i];
        mean /= static_cast<double>(eLogs[0].size() - eLogs[0].size() / 2);
        double rss = 0;
        int cnt = 0;
        for (std::size_t i = eLogs[0].size() / 2; i < eLogs[0].size(); ++i, ++cnt)
            rss += (eLogs[0][i] - mean) * (eLogs[0][i] - mean);
        est.fitResidual = cnt > 0 ? std::sqrt(rss / cnt) : 0.0;
    }

    // instability: compare the unstable estimate against a shallower depth
    if (g > 0 && back > 4) {
        auto [fFrame2, l2] = detail::iterateFrame(transitions, at - back + 3, at, false);
        (void)l2;
        Mat a = detail::frameFromColumns(est.basisU, d);
        Mat b = detail::frameFromColumns(detail::firstColumns(fFrame2, g), d);
        est.instability = subspaceAngle(a, b);
        auto [bFrame2, l3] = detail::iterateFrame(transitions, at, at + fwd - 3, true);
        (void)l3;
        Mat c = detail::frameFromColumns(est.basisS, d);
        Mat e = detail::frameFromColumns(detail::firstColumns(bFrame2, g), d);
        est.instability = std::max(est.instability, subspaceAngle(c, e));
    }

    est.conditionNumber = conditionNumber(est.assembled());
    if (est.conditionNumber > condLimit)
        throw SplittingError("splitting condition number above threshold");
    return est;
}

// Stable basis alone; usable at index 0 where no past is recorded and the
// full splitting is not defined.
inline std::vector<Vec> stableBasisEstimate(const std::vector<Mat>& transitions, int at,
                                            int depth, int g) {
    int fwd = std::min(static_cast<int>(transitions.size()) - at, depth);
    if (g > 0 && fwd < 3) throw SplittingError("insufficient forward depth");
    auto [frame, logs] = detail::iterateFrame(transitions, at, at + fwd, true);
    (void)logs;
    return detail::firstColumns(frame, g);
}

// Central-stable representative at index 0 with the prescribed kernel
// projection: the least-norm combination of the slowest backward-frame
// directions whose kernel projection matches the target. Vectors produced
// this way stay bounded under forward height transport up to the estimation
// depth, which is what affine-model slopes need.
inline Vec centralStableLift(const std::vector<Mat>& transitions, int depth,
                             const std::vector<std::vector<long long>>& kernelBasis,
                             const Vec& target) {
    std::size_t d = transitions.front().rows();
    int kc = static_cast<int>(kernelBasis.size());
    if (kc == 0) return Vec(d, 0.0);
    int g = (static_cast<int>(d) - kc) / 2;
    int m = g + kc;  // dim of the central-stable block
    int fwd = std::min(static_cast<int>(transitions.size()), depth);
    auto [frame, logs] = detail::iterateFrame(transitions, 0, fwd, true);
    (void)logs;
    std::vector<Vec> basis = detail::firstColumns(frame, m);

    Mat kf(d, static_cast<std::size_t>(kc));
    for (int j = 0; j < kc; ++j)
        for (std::size_t i = 0; i < d; ++i) kf(i, j) = static_cast<double>(kernelBasis[j][i]);
    orthonormalizeColumns(kf);

    // min-norm c with (K^T B) c = K^T target
    Mat a(static_cast<std::size_t>(kc), static_cast<std::size_t>(m));
    Vec rhs(kc, 0.0);
    for (int r = 0; r < kc; ++r) {
        for (int c = 0; c < m; ++c) {
            double s = 0;
            for (std::size_t i = 0; i < d; ++i) s += kf(i, r) * basis[c][i];
            a(r, c) = s;
        }
        for (std::size_t i = 0; i < d; ++i) rhs[r] += kf(i, r) * target[i];
    }
    Mat gram(static_cast<std::size_t>(kc), static_cast<std::size_t>(kc));
    for (int r = 0; r < kc; ++r)
        for (int q = 0; q < kc; ++q) {
            double s = 0;
            for (int c = 0; c < m; ++c) s += a(r, c) * a(q, c);
            gram(r, q) = s;
        }
    Vec mu = renorm::solve(gram, rhs);
    Vec coef(m, 0.0);
    for (int c = 0; c < m; ++c)
        for (int r = 0; r < kc; ++r) coef[c] += a(r, c) * mu[r];
    Vec omega(d, 0.0);
    for (int c = 0; c < m; ++c)
        for (std::size_t i = 0; i < d; ++i) omega[i] += coef[c] * basis[c][i];
    return omega;
}

// Closed-form generator of the one-dimensional stable space for
// rotation-type data: two blocks of constant entries, orthogonal to the
// lengths and to the kernel of the translation matrix.
inline Vec rotationTypeStableSpace(const Vec& lambda, const Permutation& p) {
    auto k = p.rotationShift();
    if (!k) throw std::invalid_argument("stable space formula needs rotation type");
    int cut = p.d() - *k - 1;
    double sumLow = 0, sumHigh = 0;
    for (int a = 0; a < p.d(); ++a)
        (p.top(a) <= cut ? sumLow : sumHigh) += lambda[a];
    double t = -sumLow / sumHigh;
    Vec v(p.d());
    for (int a = 0; a < p.d(); ++a) v[a] = p.top(a) <= cut ? 1.0 : t;
    double n = norm2(v);
    for (auto& x : v) x /= n;
    return v;
}

// Unique omega in span(basisC) whose orthogonal projection onto the exact
// kernel equals `target`; least squares over the central coefficients.
inline Vec centralFromKernel(const Permutation& p, const Vec& target,
                             const SplittingEstimate& split, double* residual = nullptr) {
    auto sing = singularityStructure(p);
    int kc = static_cast<int>(sing.kernelBasis.size());
    if (split.dimC() != kc) throw std::invalid_argument("central dimension mismatch");
    std::size_t d = target.size();
    if (kc == 0) {
        if (residual) *residual = norm2(target);
        return Vec(d, 0.0);
    }
    // orthonormal kernel frame
    Mat kf(d, static_cast<std::size_t>(kc));
    for (int j = 0; j < kc; ++j)
        for (std::size_t i = 0; i < d; ++i)
            kf(i, j) = static_cast<double>(sing.kernelBasis[j][i]);
    orthonormalizeColumns(kf);

    // solve (K^T C) coef = K^T target
    Mat sys(static_cast<std::size_t>(kc), static_cast<std::size_t>(kc));
    Vec rhs(kc, 0.0);
    for (int r = 0; r < kc; ++r) {
        for (int c = 0; c < kc; ++c) {
            double s = 0;
            for (std::size_t i = 0; i < d; ++i) s += kf(i, r) * split.basisC[c][i];
            sys(r, c) = s;
        }
        for (std::size_t i = 0; i < d; ++i) rhs[r] += kf(i, r) * target[i];
    }
    Vec coef = renorm::solve(sys, rhs);
    Vec omega(d, 0.0);
    for (int c = 0; c < kc; ++c)
        for (std::size_t i = 0; i < d; ++i) omega[i] += coef[c] * split.basisC[c][i];
    if (residual) {
        // reproject and compare
        Vec proj(d, 0.0);
        for (int r = 0; r < kc; ++r) {
            double s = 0;
            for (std::size_t i = 0; i < d; ++i) s += kf(i, r) * omega[i];
            for (std::size_t i = 0; i < d; ++i) proj[i] += s * kf(i, r);
        }
        *residual = norm2(proj - target);
    }
    return omega;
}

// orthogonal projection onto the exact kernel of the translation matrix
inline Vec kernelProjection(const Permutation& p, const Vec& x) {
    auto sing = singularityStructure(p);
    int kc = static_cast<int>(sing.kernelBasis.size());
    std::size_t d = x.size();
    if (kc == 0) return Vec(d, 0.0);
    Mat kf(d, static_cast<std::size_t>(kc));
    for (int j = 0; j < kc; ++j)
        for (std::size_t i = 0; i < d; ++i)
            kf(i, j) = static_cast<double>(sing.kernelBasis[j][i]);
    orthonormalizeColumns(kf);
    Vec out(d, 0.0);
    for (int j = 0; j < kc; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < d; ++i) s += kf(i, j) * x[i];
        for (std::size_t i = 0; i < d; ++i) out[i] += s * kf(i, j);
    }
    return out;
}

// height-cocycle transition matrices (transposes of the window matrices)
inline std::vector<Mat> heightTransitions(const InductionLog& log, const Schedule& s) {
    std::vector<Mat> out;
    for (int n = 0; n + 1 <= s.levels(); ++n) {
        CocycleWindow w = scheduleWindow(log, s, n, n + 1);
        out.push_back(toMat(w.matrix.transpose()));
    }
    return out;
}

inline std::vector<Mat> heightTransitionsZorich(const InductionLog& log) {
    std::vector<Mat> out;
    for (int m = 0; m < log.zorichSize(); ++m)
        out.push_back(toMat(cocycleWindow(log, m, m + 1).matrix.transpose()));
    return out;
}

}  // namespace renorm
