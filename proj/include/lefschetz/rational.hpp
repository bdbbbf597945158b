#pragma once
// Exact scalar arithmetic: arbitrary-precision rationals (GMP) and Gaussian
// rationals a+bi used wherever results must be exact rather than floating.

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lefschetz {

using Rational = mpq_class;

// Parses "3", "-7/4", "1.25", "2.5e-3" into an exact rational.
Rational rational_from_string(const std::string& text);

std::string rational_to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

inline Rational rational_floor(const Rational& q) {
  mpz_class z;
  mpz_fdiv_q(z.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(z);
}

inline Rational rational_ceil(const Rational& q) {
  mpz_class z;
  mpz_cdiv_q(z.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(z);
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

inline long floor_long(const Rational& q) {
  return mpz_get_si(rational_floor(q).get_num_mpz_t());
}

inline long ceil_long(const Rational& q) {
  return mpz_get_si(rational_ceil(q).get_num_mpz_t());
}

struct GaussianRational {
  Rational re{0}, im{0};

  GaussianRational() = default;
  GaussianRational(int v) : re(v) {}                       // NOLINT implicit
  GaussianRational(const Rational& r) : re(r) {}           // NOLINT implicit
  GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  static GaussianRational unit_im() { return {Rational(0), Rational(1)}; }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  GaussianRational conj() const { return {re, -im}; }
  Rational norm() const { return re * re + im * im; }

  std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }

  friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  GaussianRational operator-() const { return {-re, -im}; }
  friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
    Rational n = b.norm();
    if (n == 0) throw std::domain_error("GaussianRational: division by zero");
    GaussianRational c = a * b.conj();
    return {c.re / n, c.im / n};
  }
  GaussianRational& operator+=(const GaussianRational& o) { return *this = *this + o; }
  GaussianRational& operator-=(const GaussianRational& o) { return *this = *this - o; }
  GaussianRational& operator*=(const GaussianRational& o) { return *this = *this * o; }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

}  // namespace lefschetz
