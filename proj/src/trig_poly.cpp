#include "spinavg/trig_poly.hpp"

#include <cmath>
#include <stdexcept>

namespace spinavg {

namespace {

using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly out(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

void poly_add_to(Poly& a, const Poly& b, double scale = 1.0) {
    if (a.size() < b.size()) a.resize(b.size(), 0.0);
    for (size_t i = 0; i < b.size(); ++i) a[i] += scale * b[i];
}

double poly_eval(const Poly& p, double t) {
    double acc = 0.0;
    for (size_t i = p.size(); i-- > 0;) acc = acc * t + p[i];
    return acc;
}

Poly poly_integrate(const Poly& p) {
    Poly out(p.size() + 1, 0.0);
    for (size_t i = 0; i < p.size(); ++i) out[i + 1] = p[i] / double(i + 1);
    return out;
}

// Antiderivatives of t^m cos(ct) and t^m sin(ct) as (cos-poly, sin-poly) pairs.
void monomial_antiderivative(int m, double c, bool sine, Poly& cos_out, Poly& sin_out,
                             double scale) {
    if (!sine) {
        // int t^m cos = t^m sin/c - (m/c) int t^{m-1} sin
        Poly mono(m + 1, 0.0);
        mono[m] = scale / c;
        poly_add_to(sin_out, mono);
        if (m > 0) monomial_antiderivative(m - 1, c, true, cos_out, sin_out, -scale * m / c);
    } else {
        // int t^m sin = -t^m cos/c + (m/c) int t^{m-1} cos
        Poly mono(m + 1, 0.0);
        mono[m] = -scale / c;
        poly_add_to(cos_out, mono);
        if (m > 0) monomial_antiderivative(m - 1, c, false, cos_out, sin_out, scale * m / c);
    }
}

}  // namespace

bool TrigPoly::poly_zero(const Poly& p) {
    for (double v : p)
        if (v != 0.0) return false;
    return true;
}

void TrigPoly::ensure_channel(int k) {
    if (static_cast<int>(cosp_.size()) <= k) {
        cosp_.resize(k + 1);
        sinp_.resize(k + 1);
    }
}

void TrigPoly::add_term(int k, bool sine, const Poly& p) {
    if (poly_zero(p)) return;
    if (k > 0 && omega_ == 0.0)
        throw std::invalid_argument("TrigPoly: harmonic term requires a frequency");
    ensure_channel(k);
    poly_add_to(sine ? sinp_[k] : cosp_[k], p);
}

TrigPoly TrigPoly::constant(double value, double omega) {
    TrigPoly p;
    p.omega_ = omega;
    p.add_term(0, false, {value});
    return p;
}

TrigPoly TrigPoly::monomial(int degree, double coeff, double omega) {
    if (degree < 0) throw std::invalid_argument("TrigPoly::monomial: negative degree");
    TrigPoly p;
    p.omega_ = omega;
    Poly mono(degree + 1, 0.0);
    mono[degree] = coeff;
    p.add_term(0, false, mono);
    return p;
}

TrigPoly TrigPoly::harmonic_cos(int k, double coeff, double omega) {
    if (k < 0) throw std::invalid_argument("TrigPoly: negative harmonic");
    TrigPoly p;
    p.omega_ = omega;
    p.add_term(k, false, {coeff});
    return p;
}

TrigPoly TrigPoly::harmonic_sin(int k, double coeff, double omega) {
    if (k < 1) throw std::invalid_argument("TrigPoly: sine harmonic needs k >= 1");
    TrigPoly p;
    p.omega_ = omega;
    p.add_term(k, true, {coeff});
    return p;
}

bool TrigPoly::is_zero() const {
    for (const auto& p : cosp_)
        if (!poly_zero(p)) return false;
    for (const auto& p : sinp_)
        if (!poly_zero(p)) return false;
    return true;
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& other) {
    if (!other.is_zero() && !is_zero() && omega_ != other.omega_) {
        // compatible only if one side is purely polynomial
        const bool this_poly = cosp_.size() <= 1 && sinp_.size() <= 1;
        const bool other_poly = other.cosp_.size() <= 1 && other.sinp_.size() <= 1;
        if (!this_poly && !other_poly)
            throw std::invalid_argument("TrigPoly: frequency mismatch");
        if (this_poly) omega_ = other.omega_;
    } else if (is_zero()) {
        omega_ = other.omega_;
    }
    for (size_t k = 0; k < other.cosp_.size(); ++k) add_term(int(k), false, other.cosp_[k]);
    for (size_t k = 0; k < other.sinp_.size(); ++k) add_term(int(k), true, other.sinp_[k]);
    return *this;
}

TrigPoly operator*(double s, TrigPoly a) {
    for (auto& p : a.cosp_)
        for (double& v : p) v *= s;
    for (auto& p : a.sinp_)
        for (double& v : p) v *= s;
    return a;
}

TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
    TrigPoly out;
    out.omega_ = a.omega_ != 0.0 ? a.omega_ : b.omega_;
    if (a.omega_ != 0.0 && b.omega_ != 0.0 && a.omega_ != b.omega_ && !a.is_zero() &&
        !b.is_zero())
        throw std::invalid_argument("TrigPoly: frequency mismatch in product");

    // channel (k1, trig1) x (k2, trig2) lands on |k1-k2| and k1+k2
    auto emit = [&](int k, bool sine, const Poly& p, double scale) {
        if (k < 0) {
            k = -k;
            if (sine) scale = -scale;  // sin is odd, cos even
        }
        if (sine && k == 0) return;  // sin(0) = 0
        TrigPoly term;
        term.omega_ = out.omega_;
        Poly scaled = p;
        for (double& v : scaled) v *= scale;
        term.add_term(k, sine, scaled);
        out += term;
    };

    for (size_t k1 = 0; k1 < std::max(a.cosp_.size(), a.sinp_.size()); ++k1) {
        for (size_t k2 = 0; k2 < std::max(b.cosp_.size(), b.sinp_.size()); ++k2) {
            const Poly* c1 = k1 < a.cosp_.size() ? &a.cosp_[k1] : nullptr;
            const Poly* s1 = k1 < a.sinp_.size() ? &a.sinp_[k1] : nullptr;
            const Poly* c2 = k2 < b.cosp_.size() ? &b.cosp_[k2] : nullptr;
            const Poly* s2 = k2 < b.sinp_.size() ? &b.sinp_[k2] : nullptr;
            const int kd = int(k1) - int(k2), ks = int(k1 + k2);
            if (c1 && c2 && !TrigPoly::poly_zero(*c1) && !TrigPoly::poly_zero(*c2)) {
                const Poly p = poly_mul(*c1, *c2);
                emit(kd, false, p, 0.5);
                emit(ks, false, p, 0.5);
            }
            if (s1 && s2 && !TrigPoly::poly_zero(*s1) && !TrigPoly::poly_zero(*s2)) {
                const Poly p = poly_mul(*s1, *s2);
                emit(kd, false, p, 0.5);
                emit(ks, false, p, -0.5);
            }
            if (s1 && c2 && !TrigPoly::poly_zero(*s1) && !TrigPoly::poly_zero(*c2)) {
                const Poly p = poly_mul(*s1, *c2);
                emit(kd, true, p, 0.5);
                emit(ks, true, p, 0.5);
            }
            if (c1 && s2 && !TrigPoly::poly_zero(*c1) && !TrigPoly::poly_zero(*s2)) {
                const Poly p = poly_mul(*c1, *s2);
                emit(kd, true, p, -0.5);
                emit(ks, true, p, 0.5);
            }
        }
    }
    return out;
}

TrigPoly TrigPoly::antiderivative_from_zero() const {
    TrigPoly out;
    out.omega_ = omega_;
    if (!cosp_.empty() && !poly_zero(cosp_[0])) out.add_term(0, false, poly_integrate(cosp_[0]));
    for (size_t k = 1; k < std::max(cosp_.size(), sinp_.size()); ++k) {
        const double c = double(k) * omega_;
        Poly cos_acc, sin_acc;
        if (k < cosp_.size())
            for (size_t m = 0; m < cosp_[k].size(); ++m)
                if (cosp_[k][m] != 0.0)
                    monomial_antiderivative(int(m), c, false, cos_acc, sin_acc, cosp_[k][m]);
        if (k < sinp_.size())
            for (size_t m = 0; m < sinp_[k].size(); ++m)
                if (sinp_[k][m] != 0.0)
                    monomial_antiderivative(int(m), c, true, cos_acc, sin_acc, sinp_[k][m]);
        out.add_term(int(k), false, cos_acc);
        out.add_term(int(k), true, sin_acc);
    }
    // pin the constant so the antiderivative vanishes at t = 0
    const double at_zero = out(0.0);
    out.add_term(0, false, {-at_zero});
    return out;
}

double TrigPoly::operator()(double t) const {
    double acc = 0.0;
    for (size_t k = 0; k < cosp_.size(); ++k)
        if (!poly_zero(cosp_[k])) acc += poly_eval(cosp_[k], t) * std::cos(double(k) * omega_ * t);
    for (size_t k = 1; k < sinp_.size(); ++k)
        if (!poly_zero(sinp_[k])) acc += poly_eval(sinp_[k], t) * std::sin(double(k) * omega_ * t);
    return acc;
}

}  // namespace spinavg
