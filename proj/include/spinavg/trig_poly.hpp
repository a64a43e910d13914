#pragma once

#include <vector>

namespace spinavg {

// Closed algebra of functions sum_k [p_k(t) cos(k w t) + q_k(t) sin(k w t)]
// with polynomial coefficients: closed under products and antiderivatives,
// which is exactly what the nested weak-disorder time integrals need.
// w == 0 degenerates to plain polynomials (harmonic channels forbidden).
class TrigPoly {
  public:
    TrigPoly() = default;  // zero with unset frequency

    static TrigPoly constant(double value, double omega);
    static TrigPoly monomial(int degree, double coeff, double omega);
    // coeff * cos(k w t) or coeff * sin(k w t); k >= 1 requires omega != 0.
    static TrigPoly harmonic_cos(int k, double coeff, double omega);
    static TrigPoly harmonic_sin(int k, double coeff, double omega);

    TrigPoly& operator+=(const TrigPoly& other);
    friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
    friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b);
    friend TrigPoly operator*(double s, TrigPoly a);

    // F with F' = this and F(0) = 0.
    TrigPoly antiderivative_from_zero() const;

    double operator()(double t) const;
    double omega() const { return omega_; }
    bool is_zero() const;

  private:
    using Poly = std::vector<double>;  // coefficients, ascending degree
    double omega_ = 0.0;
    std::vector<Poly> cosp_;  // channel k: coefficient of cos(k w t); k=0 is the polynomial part
    std::vector<Poly> sinp_;  // channel k >= 1: coefficient of sin(k w t)

    void ensure_channel(int k);
    void add_term(int k, bool sine, const Poly& p);
    static bool poly_zero(const Poly& p);
};

}  // namespace spinavg
