// path.hpp -- recorded induction paths, big-integer cocycle windows over
// them (products of Zorich matrices, heights), the search for a positive
// loop in the Rauzy graph and the acceleration schedule built from it.
#pragma once

#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "renorm/iet.hpp"

namespace renorm {

// Full record of a Rauzy-Veech run from a starting IET. Zorich steps group
// maximal runs of equal type; zorichStart[m] is the RV index where Zorich
// step m begins (and zorichStart[0] == 0).
struct InductionLog {
    Permutation startPerm;
    std::vector<StepRecord> steps;
    std::vector<Permutation> perms;   // perms[i] before step i; size steps+1
    std::vector<int> zorichStart;
    Vec startLengths;
    std::vector<Vec> lengthTrace;     // lambda after each RV step (double snapshot)

    int rvSize() const { return static_cast<int>(steps.size()); }
    int zorichSize() const {
        // complete Zorich steps only: the trailing run may be truncated
        return static_cast<int>(zorichStart.size()) - 1;
    }
    int zorichBegin(int m) const { return zorichStart[m]; }
    int zorichEnd(int m) const {
        return m + 1 < static_cast<int>(zorichStart.size()) ? zorichStart[m + 1] : rvSize();
    }
    int zorichTime(int m) const { return zorichEnd(m) - zorichBegin(m); }

    const Permutation& permAtRv(int i) const { return perms[i]; }
    const Permutation& permAtZorich(int m) const { return perms[zorichBegin(m)]; }
};

template <class S>
InductionLog recordInduction(BasicIet<S> t, int rvDepth, double tieTol = kKeaneTol) {
    InductionLog log;
    log.startPerm = t.perm();
    log.startLengths = t.lengthsAsDouble();
    log.perms.push_back(t.perm());
    int lastType = -1;
    for (int i = 0; i < rvDepth; ++i) {
        StepRecord rec;
        try {
            auto stepped = rvStep(t, tieTol, i);
            t = std::move(stepped.first);
            rec = stepped.second;
        } catch (const KeaneViolation&) {
            break;  // rational data: keep what was recorded
        }
        if (rec.epsilon != lastType) {
            log.zorichStart.push_back(i);
            lastType = rec.epsilon;
        }
        log.steps.push_back(rec);
        log.perms.push_back(t.perm());
        log.lengthTrace.push_back(t.lengthsAsDouble());
    }
    return log;
}

// Record until either `zorichSteps` complete Zorich steps are available or a
// relative length floor is reached (floating-point reference paths degrade
// once the shortest interval gets close to the precision of the scalar).
template <class S>
InductionLog recordZorichSteps(BasicIet<S> t, int zorichSteps, double relFloor = 0.0,
                               double tieTol = kKeaneTol, int rvCap = 100000) {
    InductionLog log;
    log.startPerm = t.perm();
    log.startLengths = t.lengthsAsDouble();
    log.perms.push_back(t.perm());
    int lastType = -1;
    for (int i = 0; i < rvCap; ++i) {
        if (static_cast<int>(log.zorichStart.size()) > zorichSteps) break;
        if (relFloor > 0) {
            double mn = asDouble(t.lengths()[0]), tot = 0;
            for (const auto& l : t.lengths()) {
                mn = std::min(mn, asDouble(l));
                tot += asDouble(l);
            }
            if (mn / tot < relFloor || tot < relFloor) break;
        }
        StepRecord rec;
        try {
            auto stepped = rvStep(t, tieTol, i);
            t = std::move(stepped.first);
            rec = stepped.second;
        } catch (const KeaneViolation&) {
            break;
        }
        if (rec.epsilon != lastType) {
            log.zorichStart.push_back(i);
            lastType = rec.epsilon;
        }
        log.steps.push_back(rec);
        log.perms.push_back(t.perm());
        log.lengthTrace.push_back(t.lengthsAsDouble());
    }
    return log;
}

// Window of the cocycle over Zorich steps [start, end). Q is the ordered
// product of the per-step matrices, so lengths transport backwards as
// lambda_start = Q lambda_end and heights forward as q_end = Q^T q_start.
struct CocycleWindow {
    int start = 0;
    int end = 0;
    BigMat matrix;

    std::vector<BigInt> heightsFromStart(const std::vector<BigInt>& qStart) const {
        return matVec(matrix.transpose(), qStart);
    }
    std::vector<BigInt> heightsFromOnes() const {
        std::vector<BigInt> ones(matrix.rows(), BigInt(1));
        return heightsFromStart(ones);
    }
};

inline BigMat rvProduct(const InductionLog& log, int rvBegin, int rvEnd) {
    if (rvBegin < 0 || rvEnd < rvBegin || rvEnd > log.rvSize())
        throw std::out_of_range("rv window out of recorded range");
    int d = log.startPerm.d();
    BigMat q = BigMat::identity(d);
    // right-multiplying by Id + E_{w,l} adds column w into column l
    for (int i = rvBegin; i < rvEnd; ++i) q.addCol(log.steps[i].loser, log.steps[i].winner);
    return q;
}

inline CocycleWindow cocycleWindow(const InductionLog& log, int zorichBegin, int zorichEnd) {
    if (zorichBegin < 0 || zorichEnd < zorichBegin || zorichEnd > log.zorichSize())
        throw std::out_of_range("cocycle window out of recorded range");
    CocycleWindow w;
    w.start = zorichBegin;
    w.end = zorichEnd;
    w.matrix = rvProduct(log, log.zorichBegin(zorichBegin),
                         zorichEnd == zorichBegin ? log.zorichBegin(zorichBegin)
                                                  : log.zorichEnd(zorichEnd - 1));
    return w;
}

inline std::vector<BigInt> heightsAtZorich(const InductionLog& log, int zorichIndex) {
    return cocycleWindow(log, 0, zorichIndex).heightsFromOnes();
}

// A finite loop in the Rauzy graph, stored as its arrow types.
struct RauzyLoop {
    Permutation base;
    std::vector<int> types;
    IMat matrix;  // ordered product of the arrow matrices

    bool positive() const {
        for (std::size_t i = 0; i < matrix.rows(); ++i)
            for (std::size_t j = 0; j < matrix.cols(); ++j)
                if (matrix(i, j) <= 0) return false;
        return true;
    }
};

// Shortest loop at `base` whose matrix is entrywise positive, by breadth
// first search over (vertex, zero pattern) states. Arrow type 0 is expanded
// first, which makes the result deterministic.
inline std::optional<RauzyLoop> shortestPositiveLoop(const Permutation& base, int maxLen = 24) {
    struct Node {
        Permutation perm;
        IMat mat;
        std::vector<int> types;
    };
    int d = base.d();
    auto zeroMask = [d](const IMat& m) {
        std::vector<char> mask(static_cast<std::size_t>(d) * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) mask[i * d + j] = m(i, j) > 0 ? 1 : 0;
        return mask;
    };
    std::deque<Node> queue{{base, IMat::identity(d), {}}};
    std::map<std::pair<Permutation, std::vector<char>>, bool> seen;
    while (!queue.empty()) {
        Node cur = std::move(queue.front());
        queue.pop_front();
        if (static_cast<int>(cur.types.size()) >= maxLen) continue;
        for (int eps : {0, 1}) {
            Node next;
            next.perm = cur.perm.rauzyMove(eps);
            int winner = eps == 0 ? cur.perm.symbolAtTop(d) : cur.perm.symbolAtBottom(d);
            int loser = eps == 0 ? cur.perm.symbolAtBottom(d) : cur.perm.symbolAtTop(d);
            next.mat = cur.mat;
            next.mat.addCol(loser, winner);
            next.types = cur.types;
            next.types.push_back(eps);
            RauzyLoop loop{base, next.types, next.mat};
            if (next.perm == base && loop.positive()) return loop;
            auto key = std::make_pair(next.perm, zeroMask(next.mat));
            if (seen.emplace(key, true).second) queue.push_back(std::move(next));
        }
    }
    return std::nullopt;
}

struct GammaNotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All positive loops at `base` up to the given length, by plain enumeration
// of arrow sequences (2^maxLen of them; fine for the short loops used here).
inline std::vector<RauzyLoop> positiveLoops(const Permutation& base, int maxLen) {
    std::vector<RauzyLoop> out;
    int d = base.d();
    for (int len = 1; len <= maxLen; ++len) {
        for (std::uint64_t mask = 0; mask < (1ULL << len); ++mask) {
            Permutation p = base;
            IMat m = IMat::identity(d);
            std::vector<int> types;
            for (int k = 0; k < len; ++k) {
                int eps = (mask >> k) & 1;
                int winner = eps == 0 ? p.symbolAtTop(d) : p.symbolAtBottom(d);
                int loser = eps == 0 ? p.symbolAtBottom(d) : p.symbolAtTop(d);
                m.addCol(loser, winner);
                p = p.rauzyMove(eps);
                types.push_back(eps);
            }
            if (!(p == base)) continue;
            RauzyLoop loop{base, types, m};
            if (loop.positive()) out.push_back(std::move(loop));
        }
    }
    return out;
}

// Self-similar reference datum: the periodic path of a positive loop with
// the smallest Perron root (slowest height growth), lengths given by the
// Perron eigenvector. The combinatorics repeat exactly, so the recorded
// path is correct to arbitrary depth.
struct PeriodicReference {
    RauzyLoop loop;
    Vec perron;     // positive eigenvector, normalized to total one
    double rho = 0; // Perron root of the loop matrix
};

inline PeriodicReference findPeriodicReference(const Permutation& base, int maxLen = 9) {
    auto loops = positiveLoops(base, maxLen);
    if (loops.empty()) throw GammaNotFound("no positive loop up to the requested length");
    PeriodicReference best;
    for (const auto& loop : loops) {
        // Perron data by power iteration
        std::size_t d = loop.matrix.rows();
        Vec v(d, 1.0);
        double rho = 0;
        for (int it = 0; it < 200; ++it) {
            Vec w(d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    w[i] += static_cast<double>(loop.matrix(i, j)) * v[j];
            double n = 0;
            for (double x : w) n += x;
            rho = n / [&] {
                double s = 0;
                for (double x : v) s += x;
                return s;
            }();
            for (auto& x : w) x /= n;
            v = std::move(w);
        }
        if (best.rho == 0 || rho < best.rho - 1e-12 ||
            (std::abs(rho - best.rho) < 1e-12 &&
             loop.types.size() < best.loop.types.size())) {
            best.loop = loop;
            best.perron = v;
            best.rho = rho;
        }
    }
    return best;
}

// synthetic log of the exactly periodic path; length data transported from
// the Perron vector (used for display only, the arrows are what matter)
inline InductionLog periodicLog(const PeriodicReference& ref, int repetitions) {
    InductionLog log;
    log.startPerm = ref.loop.base;
    log.startLengths = ref.perron;
    log.perms.push_back(ref.loop.base);
    Vec lam = ref.perron;
    int lastType = -1;
    int rv = 0;
    for (int rep = 0; rep < repetitions; ++rep) {
        Permutation p = ref.loop.base;
        for (int eps : ref.loop.types) {
            StepRecord rec;
            rec.epsilon = eps;
            rec.winner = eps == 0 ? p.symbolAtTop(p.d()) : p.symbolAtBottom(p.d());
            rec.loser = eps == 0 ? p.symbolAtBottom(p.d()) : p.symbolAtTop(p.d());
            if (eps != lastType) {
                log.zorichStart.push_back(rv);
                lastType = eps;
            }
            lam[rec.winner] -= lam[rec.loser];
            p = p.rauzyMove(eps);
            log.steps.push_back(rec);
            log.perms.push_back(p);
            log.lengthTrace.push_back(lam);
            ++rv;
        }
    }
    return log;
}

// Acceleration schedule: Zorich indices n_0 = 0 < n_1 < ... such that the
// arrows between consecutive marks contain one full occurrence of gamma.
struct Schedule {
    std::vector<int> zorichIndex;
    std::vector<int> rvIndex;
    RauzyLoop gamma;

    int levels() const { return static_cast<int>(zorichIndex.size()) - 1; }
    double sublinearityBound() const {
        double worst = 0;
        for (std::size_t k = 1; k < rvIndex.size(); ++k)
            worst = std::max(worst, rvIndex[k] / static_cast<double>(k));
        return worst;
    }
};

inline Schedule accelerate(const InductionLog& log, const RauzyLoop& gamma) {
    if (!gamma.positive()) throw std::invalid_argument("acceleration loop must be positive");
    Schedule s;
    s.gamma = gamma;
    s.zorichIndex.push_back(0);
    s.rvIndex.push_back(0);
    int glen = static_cast<int>(gamma.types.size());
    int scanFrom = 0;
    while (true) {
        // first full occurrence of gamma at or after scanFrom
        int occEnd = -1;
        for (int i = scanFrom; i + glen <= log.rvSize(); ++i) {
            if (log.permAtRv(i) != gamma.base) continue;
            bool match = true;
            for (int k = 0; k < glen; ++k)
                if (log.steps[i + k].epsilon != gamma.types[k]) {
                    match = false;
                    break;
                }
            if (match) {
                occEnd = i + glen;
                break;
            }
        }
        if (occEnd < 0) break;
        // next mark: first Zorich boundary at or after the occurrence end
        int mark = -1;
        for (int m = 1; m <= log.zorichSize(); ++m)
            if (log.zorichBegin(m) >= occEnd) {
                mark = m;
                break;
            }
        if (mark < 0) break;
        s.zorichIndex.push_back(mark);
        s.rvIndex.push_back(log.zorichBegin(mark));
        scanFrom = log.zorichBegin(mark);
    }
    if (s.levels() < 1)
        throw GammaNotFound("acceleration loop does not occur in the recorded path");
    return s;
}

// Shortest positive loop that actually occurs in the recorded path: scan
// block lengths in increasing order and return the first block whose start
// and end permutations agree and whose matrix is positive.
inline std::optional<RauzyLoop> pathDerivedLoop(const InductionLog& log, int maxLen = 40) {
    int d = log.startPerm.d();
    for (int len = 1; len <= std::min(maxLen, log.rvSize()); ++len) {
        for (int i = 0; i + len <= log.rvSize(); ++i) {
            if (log.permAtRv(i) != log.permAtRv(i + len)) continue;
            IMat m = IMat::identity(d);
            for (int k = i; k < i + len; ++k) m.addCol(log.steps[k].loser, log.steps[k].winner);
            RauzyLoop loop;
            loop.base = log.permAtRv(i);
            loop.matrix = m;
            for (int k = i; k < i + len; ++k) loop.types.push_back(log.steps[k].epsilon);
            if (loop.positive()) return loop;
        }
    }
    return std::nullopt;
}

// Default acceleration: prefer the breadth-first loop when it recurs in the
// recorded path, otherwise fall back to a loop carved out of the path itself.
inline Schedule accelerate(const InductionLog& log) {
    auto gamma = shortestPositiveLoop(log.startPerm);
    if (gamma) {
        try {
            Schedule s = accelerate(log, *gamma);
            if (s.levels() >= 2) return s;
        } catch (const GammaNotFound&) {
        }
    }
    auto fromPath = pathDerivedLoop(log);
    if (!fromPath) throw GammaNotFound("no positive loop occurs in the recorded path");
    return accelerate(log, *fromPath);
}

// window of the accelerated cocycle between schedule levels m <= n
inline CocycleWindow scheduleWindow(const InductionLog& log, const Schedule& s, int m, int n) {
    return cocycleWindow(log, s.zorichIndex[m], s.zorichIndex[n]);
}

}  // namespace renorm
