#pragma once

/**
 * Formal power series in the deformation parameter nu with polynomial
 * coefficients, kept modulo nu^{order+1}. All arithmetic truncates at the
 * series order, and binary operations require both operands to share the
 * chart dimension and the order.
 */

#include <stdexcept>
#include <string>
#include <vector>

#include "fedosov/poly.hpp"

namespace fedosov {

class FormalFunction {
 public:
  FormalFunction(int dim, int order)
      : order_(checked_order(order)), c_(static_cast<std::size_t>(order) + 1, Poly(dim)) {}

  static FormalFunction from_poly(const Poly& p, int order) {
    FormalFunction f(p.dim(), order);
    f.c_[0] = p;
    return f;
  }

  int dim() const { return c_.front().dim(); }
  int order() const { return order_; }

  const Poly& at(int k) const { return c_.at(static_cast<std::size_t>(k)); }
  Poly& at(int k) { return c_.at(static_cast<std::size_t>(k)); }

  bool is_zero() const {
    for (const auto& p : c_)
      if (!p.is_zero()) return false;
    return true;
  }

  FormalFunction& operator+=(const FormalFunction& o) {
    check_shape(o);
    for (int k = 0; k <= order_; ++k) c_[k] += o.c_[k];
    return *this;
  }
  FormalFunction& operator-=(const FormalFunction& o) {
    check_shape(o);
    for (int k = 0; k <= order_; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  FormalFunction operator+(const FormalFunction& o) const { return FormalFunction(*this) += o; }
  FormalFunction operator-(const FormalFunction& o) const { return FormalFunction(*this) -= o; }
  FormalFunction operator-() const {
    FormalFunction f = *this;
    for (auto& p : f.c_) p = -p;
    return f;
  }

  /** Pointwise product, truncated at the series order. */
  FormalFunction operator*(const FormalFunction& o) const {
    check_shape(o);
    FormalFunction f(dim(), order_);
    for (int a = 0; a <= order_; ++a)
      for (int b = 0; a + b <= order_; ++b) f.c_[a + b] += c_[a] * o.c_[b];
    return f;
  }

  FormalFunction operator*(const Rational& s) const {
    FormalFunction f = *this;
    for (auto& p : f.c_) p *= s;
    return f;
  }

  /** Multiplication by nu^k (drops the coefficients pushed past the order). */
  FormalFunction shifted(int k) const {
    if (k < 0) throw std::invalid_argument("nu shift must be nonnegative");
    FormalFunction f(dim(), order_);
    for (int a = 0; a + k <= order_; ++a) f.c_[a + k] = c_[a];
    return f;
  }

  bool operator==(const FormalFunction& o) const { return order_ == o.order_ && c_ == o.c_; }

  /** Canonical text "p0 + nu*(p1) + nu^2*(p2)", skipping zero coefficients. */
  std::string to_string() const {
    std::string s;
    for (int k = 0; k <= order_; ++k) {
      if (c_[k].is_zero()) continue;
      if (!s.empty()) s += " + ";
      if (k == 0) {
        s += c_[k].to_string();
      } else {
        s += k == 1 ? "nu" : "nu^" + std::to_string(k);
        s += "*(" + c_[k].to_string() + ")";
      }
    }
    return s.empty() ? "0" : s;
  }

 private:
  static int checked_order(int order) {
    if (order < 0) throw std::invalid_argument("series order must be nonnegative");
    return order;
  }
  void check_shape(const FormalFunction& o) const {
    if (order_ != o.order_ || dim() != o.dim())
      throw std::invalid_argument("formal series shape mismatch");
  }

  int order_;
  std::vector<Poly> c_;
};

inline FormalFunction operator*(const Rational& s, const FormalFunction& f) { return f * s; }

}  // namespace fedosov
