// iet.hpp -- interval exchange data and the elementary induction step:
// type/winner/loser, one Rauzy-Veech step, the Zorich grouping, a finite
// depth Keane check and suspension data. Lengths are templated so the same
// code runs on doubles, long doubles and exact fractions.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "renorm/permutation.hpp"

namespace renorm {

// exact fraction on int64, reduced; enough headroom for induction of
// rational length data (denominators only ever shrink under the updates)
struct Frac {
    long long num = 0;
    long long den = 1;

    Frac() = default;
    Frac(long long n, long long d = 1) : num(n), den(d) { reduce(); }

    void reduce() {
        if (den < 0) {
            den = -den;
            num = -num;
        }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        if (den == 0) throw std::domain_error("Frac: zero denominator");
    }

    friend Frac operator-(const Frac& a, const Frac& b) {
        __int128 n = static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den;
        __int128 d = static_cast<__int128>(a.den) * b.den;
        __int128 g = gcd128(n < 0 ? -n : n, d);
        return fromReduced(n / g, d / g);
    }
    friend Frac operator+(const Frac& a, const Frac& b) {
        __int128 n = static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den;
        __int128 d = static_cast<__int128>(a.den) * b.den;
        __int128 g = gcd128(n < 0 ? -n : n, d);
        return fromReduced(n / g, d / g);
    }
    friend bool operator<(const Frac& a, const Frac& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator>(const Frac& a, const Frac& b) { return b < a; }
    friend bool operator==(const Frac& a, const Frac& b) {
        return a.num == b.num && a.den == b.den;
    }

    double toDouble() const { return static_cast<double>(num) / static_cast<double>(den); }

private:
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }
    static Frac fromReduced(__int128 n, __int128 d) {
        Frac f;
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("Frac overflow");
        f.num = static_cast<long long>(n);
        f.den = static_cast<long long>(d);
        return f;
    }
};

template <class S>
double asDouble(const S& x) {
    return static_cast<double>(x);
}
inline double asDouble(const Frac& x) { return x.toDouble(); }

struct KeaneViolation : std::runtime_error {
    explicit KeaneViolation(int step)
        : std::runtime_error("length tie during induction at step " + std::to_string(step)),
          step(step) {}
    int step;
};

struct StepRecord {
    int epsilon = 0;  // 0: top length wins, 1: bottom
    int winner = 0;   // symbol indices
    int loser = 0;

    // the elementary matrix Id + E_{winner,loser}
    IMat matrix(int d) const {
        IMat a = IMat::identity(d);
        a(winner, loser) += 1;
        return a;
    }
};

template <class S>
class BasicIet {
public:
    BasicIet() = default;
    BasicIet(std::vector<S> lengths, Permutation perm)
        : lengths_(std::move(lengths)), perm_(std::move(perm)) {
        if (static_cast<int>(lengths_.size()) != perm_.d())
            throw std::invalid_argument("iet: length/permutation size mismatch");
        S zero{};
        for (const auto& l : lengths_)
            if (!(l > zero)) throw std::invalid_argument("iet: lengths must be positive");
    }

    const std::vector<S>& lengths() const { return lengths_; }
    const Permutation& perm() const { return perm_; }

    S total() const {
        S s{};
        for (const auto& l : lengths_) s = s + l;
        return s;
    }

    bool normalized(double tol = kLengthTol) const {
        return std::abs(asDouble(total()) - 1.0) <= tol;
    }

    Vec lengthsAsDouble() const {
        Vec v;
        for (const auto& l : lengths_) v.push_back(asDouble(l));
        return v;
    }

private:
    std::vector<S> lengths_;
    Permutation perm_;
};

using Iet = BasicIet<double>;

inline bool lengthsTied(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}
inline bool lengthsTied(long double a, long double b, double tol) {
    long double m = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= static_cast<long double>(tol) * m;
}
inline bool lengthsTied(const Frac& a, const Frac& b, double) { return a == b; }

template <class S>
StepRecord rvType(const BasicIet<S>& t, double tieTol = kKeaneTol, int atStep = 0) {
    const auto& p = t.perm();
    int a0 = p.symbolAtTop(p.d());
    int a1 = p.symbolAtBottom(p.d());
    const S& l0 = t.lengths()[a0];
    const S& l1 = t.lengths()[a1];
    if (lengthsTied(l0, l1, tieTol)) throw KeaneViolation(atStep);
    StepRecord r;
    r.epsilon = l0 > l1 ? 0 : 1;
    r.winner = r.epsilon == 0 ? a0 : a1;
    r.loser = r.epsilon == 0 ? a1 : a0;
    return r;
}

// one Rauzy-Veech step: winner length loses the loser length, the
// permutation follows the arrow of the same type
template <class S>
std::pair<BasicIet<S>, StepRecord> rvStep(const BasicIet<S>& t, double tieTol = kKeaneTol,
                                          int atStep = 0) {
    StepRecord r = rvType(t, tieTol, atStep);
    std::vector<S> l = t.lengths();
    l[r.winner] = l[r.winner] - l[r.loser];
    S zero{};
    if (!(l[r.winner] > zero)) throw KeaneViolation(atStep);
    return {BasicIet<S>(std::move(l), t.perm().rauzyMove(r.epsilon)), r};
}

struct KeaneReport {
    bool ok = true;
    int violationStep = -1;
};

template <class S>
KeaneReport keaneCheck(const BasicIet<S>& t, int depth, double tol = kKeaneTol) {
    BasicIet<S> cur = t;
    for (int i = 0; i < depth; ++i) {
        try {
            cur = rvStep(cur, tol, i).first;
        } catch (const KeaneViolation& v) {
            return {false, v.step};
        }
    }
    return {true, -1};
}

// Suspension data over a permutation.
struct SuspensionData {
    Vec tau;
};

inline bool suspensionValid(const SuspensionData& s, const Permutation& p) {
    if (static_cast<int>(s.tau.size()) != p.d()) return false;
    for (int k = 1; k <= p.d() - 1; ++k) {
        double topSum = 0, bottomSum = 0;
        for (int a = 0; a < p.d(); ++a) {
            if (p.top(a) <= k) topSum += s.tau[a];
            if (p.bottom(a) <= k) bottomSum += s.tau[a];
        }
        if (!(topSum > 0) || !(bottomSum < 0)) return false;
    }
    return true;
}

// tau update of the extended induction across one recorded step: tau' = B^{-1} tau,
// realized as the per-step inverse elementary updates
inline Vec suspensionStep(Vec tau, const StepRecord& r) {
    tau[r.winner] -= tau[r.loser];
    return tau;
}

// continued fraction digits of x starting from the first nonzero quotient;
// oracle for the d=2 equivalence of Zorich times and partial quotients
inline std::vector<long long> continuedFraction(double x, int maxDigits) {
    std::vector<long long> out;
    for (int guard = 0; guard < maxDigits + 2 && static_cast<int>(out.size()) < maxDigits;
         ++guard) {
        double fl = std::floor(x);
        long long a = static_cast<long long>(fl);
        if (a > 0 || !out.empty()) out.push_back(a);
        double frac = x - fl;
        if (frac < 1e-15) break;
        x = 1.0 / frac;
    }
    return out;
}

inline std::vector<long long> continuedFraction(long long num, long long den, int maxDigits) {
    std::vector<long long> out;
    while (den != 0 && static_cast<int>(out.size()) < maxDigits) {
        long long a = num / den;
        if (a > 0 || !out.empty()) out.push_back(a);
        long long r = num % den;
        num = den;
        den = r;
    }
    return out;
}

}  // namespace renorm
