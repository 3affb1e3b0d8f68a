#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace krein {

/// Dense polynomial in z, coefficients stored lowest degree first.
template <class T>
struct Polynomial {
  std::vector<T> c;

  Polynomial() = default;
  explicit Polynomial(std::vector<T> coeffs) : c(std::move(coeffs)) { trim(); }
  static Polynomial constant(const T& v) { return Polynomial(std::vector<T>{v}); }

  int degree() const { return c.empty() ? -1 : static_cast<int>(c.size()) - 1; }
  const T& lead() const { return c.back(); }
  bool is_zero() const { return c.empty(); }

  void trim() {
    while (!c.empty() && c.back() == T(0)) c.pop_back();
  }

  /// Drops the leading coefficient regardless of its value (used after an
  /// elimination step whose leading term cancels in exact arithmetic).
  void drop_lead() {
    if (!c.empty()) c.pop_back();
  }

  template <class Z>
  Z operator()(const Z& z) const {
    Z v = Z(0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * z + Z(*it);
    return v;
  }

  Polynomial derivative() const {
    std::vector<T> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * T(static_cast<long>(k)));
    return Polynomial(std::move(d));
  }

  friend Polynomial operator+(const Polynomial& p, const Polynomial& q) {
    std::vector<T> r(std::max(p.c.size(), q.c.size()), T(0));
    for (std::size_t k = 0; k < p.c.size(); ++k) r[k] += p.c[k];
    for (std::size_t k = 0; k < q.c.size(); ++k) r[k] += q.c[k];
    return Polynomial(std::move(r));
  }
  friend Polynomial operator-(const Polynomial& p, const Polynomial& q) {
    std::vector<T> r(std::max(p.c.size(), q.c.size()), T(0));
    for (std::size_t k = 0; k < p.c.size(); ++k) r[k] += p.c[k];
    for (std::size_t k = 0; k < q.c.size(); ++k) r[k] -= q.c[k];
    return Polynomial(std::move(r));
  }
  friend Polynomial operator*(const T& s, const Polynomial& p) {
    std::vector<T> r(p.c);
    for (auto& v : r) v *= s;
    return Polynomial(std::move(r));
  }
  friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    if (p.is_zero() || q.is_zero()) return {};
    std::vector<T> r(p.c.size() + q.c.size() - 1, T(0));
    for (std::size_t i = 0; i < p.c.size(); ++i)
      for (std::size_t j = 0; j < q.c.size(); ++j) r[i + j] += p.c[i] * q.c[j];
    return Polynomial(std::move(r));
  }
  /// Multiplication by z.
  Polynomial shifted() const {
    if (is_zero()) return {};
    std::vector<T> r;
    r.reserve(c.size() + 1);
    r.push_back(T(0));
    r.insert(r.end(), c.begin(), c.end());
    return Polynomial(std::move(r));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;
};

}  // namespace krein
