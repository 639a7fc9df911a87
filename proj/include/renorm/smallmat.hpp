// smallmat.hpp -- dense linear algebra for the small dimensions that occur
// here (d <= 8): double matrices, exact big-integer matrices for cocycle
// windows, Gram-Schmidt frames and a Jacobi eigensolver.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "renorm/numeric.hpp"

namespace renorm {

using BigInt = boost::multiprecision::cpp_int;
using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double normInf(const Vec& a) {
    double m = 0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline Vec operator+(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vec operator-(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Vec operator*(double c, Vec a) {
    for (auto& x : a) x *= c;
    return a;
}

template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, T fill = T(0)) : r_(r), c_(c), a_(r * c, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }

    T& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }

    Matrix operator*(const Matrix& o) const {
        if (c_ != o.r_) throw std::invalid_argument("matrix product shape");
        Matrix out(r_, o.c_);
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t k = 0; k < c_; ++k) {
                const T& v = (*this)(i, k);
                if (v == T(0)) continue;
                for (std::size_t j = 0; j < o.c_; ++j) out(i, j) += v * o(k, j);
            }
        return out;
    }

    Matrix transpose() const {
        Matrix out(c_, r_);
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t j = 0; j < c_; ++j) out(j, i) = (*this)(i, j);
        return out;
    }

    bool operator==(const Matrix& o) const { return r_ == o.r_ && c_ == o.c_ && a_ == o.a_; }

    // row_i += row_k  and  col_j += col_k, the elementary updates used when
    // accumulating products of induction matrices
    void addRow(std::size_t dst, std::size_t src) {
        for (std::size_t j = 0; j < c_; ++j) (*this)(dst, j) += (*this)(src, j);
    }
    void addCol(std::size_t dst, std::size_t src) {
        for (std::size_t i = 0; i < r_; ++i) (*this)(i, dst) += (*this)(i, src);
    }

private:
    std::size_t r_ = 0, c_ = 0;
    std::vector<T> a_;
};

using Mat = Matrix<double>;
using IMat = Matrix<long long>;
using BigMat = Matrix<BigInt>;

template <class T>
std::vector<T> matVec(const Matrix<T>& m, const std::vector<T>& v) {
    if (m.cols() != v.size()) throw std::invalid_argument("apply shape");
    std::vector<T> out(m.rows(), T(0));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
    return out;
}

inline Vec matVec(const Mat& m, const Vec& v) { return matVec<double>(m, v); }

inline Mat toMat(const BigMat& b) {
    Mat m(b.rows(), b.cols());
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) m(i, j) = b(i, j).convert_to<double>();
    return m;
}

// big-integer matrix applied to a double vector, accumulated in long double
inline Vec applyMixed(const BigMat& m, const Vec& v) {
    Vec out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        long double s = 0.0L;
        for (std::size_t j = 0; j < m.cols(); ++j)
            s += m(i, j).convert_to<long double>() * static_cast<long double>(v[j]);
        out[i] = static_cast<double>(s);
    }
    return out;
}

namespace detail {
template <class T>
T detByExpansion(const Matrix<T>& m, std::vector<std::size_t>& cols, std::size_t row) {
    if (cols.size() == 1) return m(row, cols[0]);
    T acc(0);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const T& pivot = m(row, cols[k]);
        if (pivot == T(0)) continue;
        std::size_t c = cols[k];
        cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(k));
        T sub = detByExpansion(m, cols, row + 1);
        cols.insert(cols.begin() + static_cast<std::ptrdiff_t>(k), c);
        if (k % 2 == 0)
            acc += pivot * sub;
        else
            acc -= pivot * sub;
    }
    return acc;
}
}  // namespace detail

// Exact determinant by cofactor expansion; fine for the d <= 8 matrices used.
template <class T>
T determinant(const Matrix<T>& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("determinant: square only");
    if (m.rows() > 9) throw std::invalid_argument("determinant: dimension too large");
    std::vector<std::size_t> cols(m.cols());
    std::iota(cols.begin(), cols.end(), 0);
    return detail::detByExpansion(m, cols, 0);
}

// adj(M) with M * adj(M) = det(M) * Id, entries exact
template <class T>
Matrix<T> adjugate(const Matrix<T>& m) {
    std::size_t n = m.rows();
    if (n == 1) {
        Matrix<T> out(1, 1);
        out(0, 0) = T(1);
        return out;
    }
    Matrix<T> out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Matrix<T> minor(n - 1, n - 1);
            for (std::size_t r = 0, rr = 0; r < n; ++r) {
                if (r == j) continue;
                for (std::size_t c = 0, cc = 0; c < n; ++c) {
                    if (c == i) continue;
                    minor(rr, cc++) = m(r, c);
                }
                ++rr;
            }
            T d = determinant(minor);
            out(i, j) = ((i + j) % 2 == 0) ? d : T(0) - d;
        }
    return out;
}

// exact integer rank by fraction-free elimination (Bareiss)
inline int integerRank(Matrix<long long> m) {
    std::size_t n = m.rows(), c = m.cols();
    long long prev = 1;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < c && rank < n; ++col) {
        std::size_t piv = rank;
        while (piv < n && m(piv, col) == 0) ++piv;
        if (piv == n) continue;
        if (piv != rank)
            for (std::size_t j = 0; j < c; ++j) std::swap(m(piv, j), m(rank, j));
        for (std::size_t i = rank + 1; i < n; ++i) {
            for (std::size_t j = col + 1; j < c; ++j)
                m(i, j) = (m(rank, col) * m(i, j) - m(i, col) * m(rank, j)) / prev;
            m(i, col) = 0;
        }
        prev = m(rank, col);
        ++rank;
    }
    return static_cast<int>(rank);
}

// Modified Gram-Schmidt on the columns; returns the diagonal "R" entries
// (column norms before normalization), which feed Lyapunov-exponent sums.
inline Vec orthonormalizeColumns(Mat& m) {
    std::size_t n = m.rows(), k = m.cols();
    Vec diag(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t p = 0; p < j; ++p) {
            double proj = 0;
            for (std::size_t i = 0; i < n; ++i) proj += m(i, p) * m(i, j);
            for (std::size_t i = 0; i < n; ++i) m(i, j) -= proj * m(i, p);
        }
        double nn = 0;
        for (std::size_t i = 0; i < n; ++i) nn += m(i, j) * m(i, j);
        nn = std::sqrt(nn);
        diag[j] = nn;
        if (nn < 1e-300) throw std::runtime_error("orthonormalize: rank collapse");
        for (std::size_t i = 0; i < n; ++i) m(i, j) /= nn;
    }
    return diag;
}

// Gaussian elimination with partial pivoting.
inline Vec solve(Mat a, Vec b) {
    std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve shape");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < n; ++i)
            if (std::abs(a(i, col)) > std::abs(a(piv, col))) piv = i;
        if (std::abs(a(piv, col)) < 1e-300) throw std::runtime_error("solve: singular system");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
            std::swap(b[piv], b[col]);
        }
        for (std::size_t i = col + 1; i < n; ++i) {
            double f = a(i, col) / a(col, col);
            if (f == 0) continue;
            for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
            b[i] -= f * b[col];
        }
    }
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

// eigenvalues of a symmetric matrix by cyclic Jacobi rotations
inline Vec symmetricEigenvalues(Mat a) {
    std::size_t n = a.rows();
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-28) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1));
                double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    Vec ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

// 2-norm condition number via singular values of the column matrix
inline double conditionNumber(const Mat& m) {
    Mat g(m.cols(), m.cols());
    for (std::size_t i = 0; i < m.cols(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            double s = 0;
            for (std::size_t k = 0; k < m.rows(); ++k) s += m(k, i) * m(k, j);
            g(i, j) = s;
        }
    Vec ev = symmetricEigenvalues(g);
    double lo = std::max(ev.front(), 0.0), hi = ev.back();
    if (lo <= 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(hi / lo);
}

// largest principal angle between equal-dimension column spans
inline double subspaceAngle(Mat a, Mat b) {
    orthonormalizeColumns(a);
    orthonormalizeColumns(b);
    Mat g(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.cols(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0;
            for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * b(k, j);
            g(i, j) = s;
        }
    Mat gtg(b.cols(), b.cols());
    for (std::size_t i = 0; i < b.cols(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += g(k, i) * g(k, j);
            gtg(i, j) = s;
        }
    Vec ev = symmetricEigenvalues(gtg);
    double c2 = std::clamp(ev.front(), 0.0, 1.0);
    return std::acos(std::sqrt(c2));
}

}  // namespace renorm
