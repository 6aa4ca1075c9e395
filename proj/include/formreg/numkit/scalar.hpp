#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <string>
#include <type_traits>

#include <boost/multiprecision/gmp.hpp>

#include "formreg/error.hpp"

namespace formreg::numkit {

enum class Field { Real, Complex };
enum class Arithmetic { Exact, Float };

/// Field plus arithmetic: the four scalar backends.
struct ScalarSpec {
  Field field = Field::Real;
  Arithmetic arithmetic = Arithmetic::Exact;

  friend bool operator==(const ScalarSpec&, const ScalarSpec&) = default;
};

/// Arbitrary-precision rational; always kept in lowest terms by GMP.
using Rational = boost::multiprecision::mpq_rational;

/// Gaussian rational a + b i with a, b rational. Equality is exact.
class GaussianRational {
 public:
  GaussianRational() = default;
  GaussianRational(Rational re) : re_(std::move(re)) {}  // NOLINT(google-explicit-constructor)
  GaussianRational(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {}
  GaussianRational(long re) : re_(re) {}  // NOLINT(google-explicit-constructor)
  GaussianRational(int re) : re_(re) {}  // NOLINT(google-explicit-constructor)

  const Rational& real() const { return re_; }
  const Rational& imag() const { return im_; }

  GaussianRational conj() const { return {re_, -im_}; }
  Rational norm() const { return re_ * re_ + im_ * im_; }
  bool is_zero() const { return re_ == 0 && im_ == 0; }

  GaussianRational& operator+=(const GaussianRational& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  GaussianRational& operator-=(const GaussianRational& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  GaussianRational& operator*=(const GaussianRational& o) {
    Rational re = re_ * o.re_ - im_ * o.im_;
    Rational im = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(re);
    im_ = std::move(im);
    return *this;
  }
  GaussianRational& operator/=(const GaussianRational& o) {
    Rational n = o.norm();
    if (n == 0) throw DomainError("division by zero Gaussian rational");
    Rational re = (re_ * o.re_ + im_ * o.im_) / n;
    Rational im = (im_ * o.re_ - re_ * o.im_) / n;
    re_ = std::move(re);
    im_ = std::move(im);
    return *this;
  }

  friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
  friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
  friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
  friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }
  friend GaussianRational operator-(const GaussianRational& a) { return {-a.re_, -a.im_}; }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }
  friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }

  friend std::ostream& operator<<(std::ostream& os, const GaussianRational& z) {
    os << z.re_ << (z.im_ < 0 ? "-" : "+") << boost::multiprecision::abs(z.im_) << "i";
    return os;
  }

 private:
  Rational re_{0};
  Rational im_{0};
};

inline const GaussianRational kImagUnit{Rational(0), Rational(1)};

/// Compile-time description of a scalar backend.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr bool complex = false;
  static constexpr ScalarSpec spec{Field::Real, Arithmetic::Float};
  static double conj(double x) { return x; }
  static bool is_zero(double x) { return x == 0.0; }
  static double abs(double x) { return std::abs(x); }
  static double from_int(long v) { return static_cast<double>(v); }
};

template <>
struct ScalarTraits<std::complex<double>> {
  static constexpr bool exact = false;
  static constexpr bool complex = true;
  static constexpr ScalarSpec spec{Field::Complex, Arithmetic::Float};
  static std::complex<double> conj(const std::complex<double>& x) { return std::conj(x); }
  static bool is_zero(const std::complex<double>& x) { return x == std::complex<double>{}; }
  static double abs(const std::complex<double>& x) { return std::abs(x); }
  static std::complex<double> from_int(long v) { return {static_cast<double>(v), 0.0}; }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr bool complex = false;
  static constexpr ScalarSpec spec{Field::Real, Arithmetic::Exact};
  static Rational conj(const Rational& x) { return x; }
  static bool is_zero(const Rational& x) { return x == 0; }
  static double abs(const Rational& x) { return std::abs(x.convert_to<double>()); }
  static Rational from_int(long v) { return Rational(v); }
};

template <>
struct ScalarTraits<GaussianRational> {
  static constexpr bool exact = true;
  static constexpr bool complex = true;
  static constexpr ScalarSpec spec{Field::Complex, Arithmetic::Exact};
  static GaussianRational conj(const GaussianRational& x) { return x.conj(); }
  static bool is_zero(const GaussianRational& x) { return x.is_zero(); }
  static double abs(const GaussianRational& x) {
    return std::hypot(x.real().convert_to<double>(), x.imag().convert_to<double>());
  }
  static GaussianRational from_int(long v) { return GaussianRational(Rational(v)); }
};

template <class T>
concept Scalar = requires { ScalarTraits<T>::exact; };

template <class T>
concept ExactScalar = Scalar<T> && ScalarTraits<T>::exact;

template <class T>
concept FloatScalar = Scalar<T> && !ScalarTraits<T>::exact;

template <class T>
concept ComplexScalar = Scalar<T> && ScalarTraits<T>::complex;

}  // namespace formreg::numkit
