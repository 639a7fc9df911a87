// numeric.hpp -- scalar utilities shared across the toolkit: seeded RNG,
// compensated summation, log-linear decay fits, deterministic formatting.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace renorm {

// Deterministic generator (splitmix64). We do not use std:: distributions
// anywhere: report bytes must not depend on the standard library vendor.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t below(std::uint64_t n) { return next() % n; }

    // point of the open simplex {x_i > 0, sum = 1} via exponential spacings
    std::vector<double> simplex(std::size_t d) {
        std::vector<double> x(d);
        double s = 0.0;
        for (auto& v : x) {
            v = -std::log(1.0 - uniform());
            if (v < 1e-12) v = 1e-12;
            s += v;
        }
        for (auto& v : x) v /= s;
        return x;
    }

private:
    std::uint64_t state_;
};

// Neumaier variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

struct DecayFit {
    double rate = 0.0;      // fitted c in y ~ a * c^n
    double logIntercept = 0.0;
    double r2 = 0.0;        // quality of the log-linear regression
    int points = 0;
};

// Least-squares fit of log y against n over samples with y > floor.
inline DecayFit fitDecay(const std::vector<double>& ns, const std::vector<double>& ys,
                         double floor = 1e-300) {
    if (ns.size() != ys.size()) throw std::invalid_argument("fitDecay: size mismatch");
    std::vector<double> xs, ls;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ys[i] > floor && std::isfinite(ys[i])) {
            xs.push_back(ns[i]);
            ls.push_back(std::log(ys[i]));
        }
    }
    DecayFit fit;
    fit.points = static_cast<int>(xs.size());
    if (xs.size() < 2) return fit;
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ls[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ls[i];
    }
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) return fit;
    double b = (n * sxy - sx * sy) / denom;
    double a = (sy - b * sx) / n;
    fit.rate = std::exp(b);
    fit.logIntercept = a;
    double ssTot = 0, ssRes = 0, mean = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double pred = a + b * xs[i];
        ssRes += (ls[i] - pred) * (ls[i] - pred);
        ssTot += (ls[i] - mean) * (ls[i] - mean);
    }
    fit.r2 = ssTot > 0 ? 1.0 - ssRes / ssTot : 1.0;
    return fit;
}

// Shortest decimal round-trip representation; used for all report output so
// repeated runs are byte-identical.
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    // prefer the shortest form that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char t[40];
        std::snprintf(t, sizeof t, "%.*g", prec, x);
        if (std::strtod(t, nullptr) == x) return t;
    }
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline constexpr double kLengthTol = 1e-12;   // |u| == |w| and normalization checks
inline constexpr double kKeaneTol = 1e-14;    // relative tie tolerance in induction

}  // namespace renorm
