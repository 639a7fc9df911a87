// unitmap.hpp -- increasing C^2 diffeomorphisms of [0,1] fixing the
// endpoints. Branches of generalized interval exchanges are affine frames
// around these profiles. The workhorse is the constant-nonlinearity family
// t -> (e^{st}-1)/(e^s-1), whose log-derivative is affine in t; compositions
// and smooth warps cover the non-closed-form cases.
#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>

namespace renorm {

class UnitMap {
public:
    virtual ~UnitMap() = default;
    virtual double value(double t) const = 0;
    virtual double deriv(double t) const = 0;
    virtual double deriv2(double t) const = 0;
    virtual double logDeriv(double t) const { return std::log(deriv(t)); }

    // value and log-derivative together; the orbit samplers live on this
    virtual std::pair<double, double> valueAndLogDeriv(double t) const {
        return {value(t), logDeriv(t)};
    }

    // monotone inverse; subclasses with closed forms override
    virtual double inverse(double y) const {
        double lo = 0.0, hi = 1.0, t = y;
        for (int it = 0; it < 200; ++it) {
            double v = value(t);
            if (v < y)
                lo = t;
            else
                hi = t;
            double dv = deriv(t);
            double step = dv > 1e-12 ? (y - v) / dv : 0.0;
            double next = t + step;
            if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - t) < 1e-16) return next;
            t = next;
        }
        return t;
    }
};

using UnitMapPtr = std::shared_ptr<const UnitMap>;

class IdentityMap final : public UnitMap {
public:
    double value(double t) const override { return t; }
    double deriv(double) const override { return 1.0; }
    double deriv2(double) const override { return 0.0; }
    double logDeriv(double) const override { return 0.0; }
    double inverse(double y) const override { return y; }
};

// t -> (e^{st}-1)/(e^s-1); log Df affine with slope s, so the endpoint
// log-derivative difference is exactly s
class NonlinMap final : public UnitMap {
public:
    explicit NonlinMap(double s) : s_(s) {}

    double parameter() const { return s_; }

    double value(double t) const override {
        if (small()) return t + s_ * t * (t - 1.0) / 2.0;
        return std::expm1(s_ * t) / std::expm1(s_);
    }
    double deriv(double t) const override {
        if (small()) return 1.0 + s_ * (t - 0.5);
        return s_ * std::exp(s_ * t) / std::expm1(s_);
    }
    double deriv2(double t) const override {
        if (small()) return s_;
        return s_ * s_ * std::exp(s_ * t) / std::expm1(s_);
    }
    double logDeriv(double t) const override {
        if (small()) return std::log1p(s_ * (t - 0.5));
        return std::log(s_ / std::expm1(s_)) + s_ * t;
    }
    double inverse(double y) const override {
        if (small()) {
            double t = y;
            for (int i = 0; i < 4; ++i) t = y - s_ * t * (t - 1.0) / 2.0;
            return t;
        }
        return std::log1p(y * std::expm1(s_)) / s_;
    }

private:
    bool small() const { return std::abs(s_) < 1e-9; }
    double s_;
};

// Profile defined by its log-derivative: piecewise linear through the node
// values (p, m, q) at t = 0, 1/2, 1, with m fixed by the normalization
// int_0^1 Df = 1. Gives free and exact control of the endpoint
// log-derivatives, which is what prescribed-jump constructions need.
class LogLinearMap final : public UnitMap {
public:
    LogLinearMap(double p, double q) : p_(p), q_(q) {
        // the first-piece area grows monotonically in m; bisection + Newton
        double lo = std::min(p, q) - 60, hi = std::max(p, q) + 60;
        double m = 0.5 * (p + q);
        for (int it = 0; it < 200; ++it) {
            double g = area1(m) + area2(m) - 1.0;
            if (g > 0)
                hi = m;
            else
                lo = m;
            double next = 0.5 * (lo + hi);
            if (std::abs(next - m) < 1e-16 * (1 + std::abs(m))) {
                m = next;
                break;
            }
            m = next;
        }
        m_ = m;
        a1_ = area1(m_);
    }

    double logDeriv(double t) const override {
        return t <= 0.5 ? p_ + 2 * t * (m_ - p_) : m_ + (2 * t - 1) * (q_ - m_);
    }
    double deriv(double t) const override { return std::exp(logDeriv(t)); }
    double deriv2(double t) const override {
        double slope = t <= 0.5 ? 2 * (m_ - p_) : 2 * (q_ - m_);
        return slope * deriv(t);
    }
    double value(double t) const override {
        if (t <= 0.5) return segIntegral(p_, m_ - p_, t);
        return a1_ + segIntegral(m_, q_ - m_, t - 0.5);
    }
    double inverse(double y) const override {
        if (y <= a1_) return segInverse(p_, m_ - p_, y);
        return 0.5 + segInverse(m_, q_ - m_, y - a1_);
    }

    double leftLog() const { return p_; }
    double rightLog() const { return q_; }

private:
    // integral of exp(base + 2 s * slope) over s in [0, t], t <= 1/2
    static double segIntegral(double base, double slope, double t) {
        if (std::abs(slope) < 1e-9)
            return std::exp(base) * t * (1 + slope * t);
        return std::exp(base) * std::expm1(2 * t * slope) / (2 * slope);
    }
    static double segInverse(double base, double slope, double y) {
        if (std::abs(slope) < 1e-9) {
            double t = y * std::exp(-base);
            return t * (1 - slope * t);
        }
        return std::log1p(y * 2 * slope * std::exp(-base)) / (2 * slope);
    }
    double area1(double m) const { return segIntegral(p_, m - p_, 0.5); }
    double area2(double m) const { return segIntegral(m, q_ - m, 0.5); }

    double p_, q_, m_ = 0, a1_ = 0.5;
};

// t + beta sin(2 pi t) / (2 pi); a circle-smooth warp (derivative matches at
// the endpoints), used to manufacture conjugated test maps
class SineWarpMap final : public UnitMap {
public:
    explicit SineWarpMap(double beta) : beta_(beta) {
        if (std::abs(beta) >= 1.0) throw std::invalid_argument("sine warp needs |beta| < 1");
    }

    double value(double t) const override {
        return t + beta_ * std::sin(2 * M_PI * t) / (2 * M_PI);
    }
    double deriv(double t) const override { return 1.0 + beta_ * std::cos(2 * M_PI * t); }
    double deriv2(double t) const override {
        return -2 * M_PI * beta_ * std::sin(2 * M_PI * t);
    }

private:
    double beta_;
};

class ComposeMap final : public UnitMap {
public:
    ComposeMap(UnitMapPtr outer, UnitMapPtr inner)
        : outer_(std::move(outer)), inner_(std::move(inner)) {}

    double value(double t) const override { return outer_->value(inner_->value(t)); }
    double deriv(double t) const override {
        return outer_->deriv(inner_->value(t)) * inner_->deriv(t);
    }
    double deriv2(double t) const override {
        double iv = inner_->value(t), id1 = inner_->deriv(t);
        return outer_->deriv2(iv) * id1 * id1 + outer_->deriv(iv) * inner_->deriv2(t);
    }
    double logDeriv(double t) const override {
        return outer_->logDeriv(inner_->value(t)) + inner_->logDeriv(t);
    }
    double inverse(double y) const override { return inner_->inverse(outer_->inverse(y)); }

private:
    UnitMapPtr outer_, inner_;
};

inline UnitMapPtr identityMap() {
    static const auto instance = std::make_shared<IdentityMap>();
    return instance;
}

inline UnitMapPtr nonlinMap(double s) { return std::make_shared<NonlinMap>(s); }
inline UnitMapPtr logLinearMap(double p, double q) {
    return std::make_shared<LogLinearMap>(p, q);
}
inline UnitMapPtr sineWarp(double beta) { return std::make_shared<SineWarpMap>(beta); }
inline UnitMapPtr compose(UnitMapPtr outer, UnitMapPtr inner) {
    return std::make_shared<ComposeMap>(std::move(outer), std::move(inner));
}

inline bool isIdentity(const UnitMap& m) { return dynamic_cast<const IdentityMap*>(&m); }

}  // namespace renorm
