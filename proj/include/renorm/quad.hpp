// quad.hpp -- exact arithmetic in Z[sqrt(5)], used for length data of
// golden-type interval exchanges. Subtractive induction in floating point
// loses the type decisions after a few dozen steps; with exact coefficients
// the recorded path is correct to any depth.
#pragma once

#include <cmath>
#include <stdexcept>

#include "renorm/iet.hpp"
#include "renorm/smallmat.hpp"

namespace renorm {

struct Quad {
    BigInt a, b;  // a + b*sqrt(5)

    Quad() : a(0), b(0) {}
    Quad(long long x) : a(x), b(0) {}
    Quad(BigInt x, BigInt y) : a(std::move(x)), b(std::move(y)) {}

    static Quad sqrt5() { return Quad(BigInt(0), BigInt(1)); }

    friend Quad operator+(const Quad& x, const Quad& y) { return Quad(x.a + y.a, x.b + y.b); }
    friend Quad operator-(const Quad& x, const Quad& y) { return Quad(x.a - y.a, x.b - y.b); }

    int sign() const {
        if (a == 0 && b == 0) return 0;
        if (a >= 0 && b >= 0) return 1;
        if (a <= 0 && b <= 0) return -1;
        BigInt lhs = a * a, rhs = 5 * b * b;
        if (a > 0) return lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
        return rhs > lhs ? 1 : (rhs < lhs ? -1 : 0);
    }

    friend bool operator<(const Quad& x, const Quad& y) { return (x - y).sign() < 0; }
    friend bool operator>(const Quad& x, const Quad& y) { return (x - y).sign() > 0; }
    friend bool operator==(const Quad& x, const Quad& y) { return x.a == y.a && x.b == y.b; }

    double toDouble() const {
        return a.convert_to<double>() + b.convert_to<double>() * std::sqrt(5.0);
    }
};

inline double asDouble(const Quad& x) { return x.toDouble(); }

inline bool lengthsTied(const Quad& a, const Quad& b, double) { return a == b; }

// golden-type interval exchanges with exact coefficients; lengths scaled to
// integer coefficients in Z[sqrt(5)], which induction preserves
inline BasicIet<Quad> goldenIetExact() {
    // (sqrt5 - 1, 3 - sqrt5), proportional to (1/phi, 1/phi^2)
    return BasicIet<Quad>({Quad(BigInt(-1), BigInt(1)), Quad(BigInt(3), BigInt(-1))},
                          Permutation::fromMonodromy({2, 1}));
}

// d=3 rotation-type datum over the golden rotation, marker at a point whose
// orbit never meets the rotation orbit of the endpoints (exactness argument:
// the sqrt5-coefficients cannot match)
inline BasicIet<Quad> goldenThreeExact() {
    // 14 * (lambda_A, lambda_B, lambda_C) with lambda_C = phi^{-2},
    // lambda_A = (2/7) phi^{-1}
    return BasicIet<Quad>({Quad(BigInt(-2), BigInt(2)), Quad(BigInt(-5), BigInt(5)),
                           Quad(BigInt(21), BigInt(-7))},
                          Permutation::fromMonodromy({2, 3, 1}));
}

}  // namespace renorm
