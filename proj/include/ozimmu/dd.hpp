#pragma once

// Double-double arithmetic: a value is the unevaluated sum hi + lo of two
// binary64 numbers with |lo| <= ulp(hi)/2. The kernels follow the usual
// error-free transformations; dd_add is the accurate (IEEE-style) variant.

#include <cmath>
#include <optional>

namespace ozimmu {

struct DdValue {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DdValue() = default;
  constexpr DdValue(double h) : hi(h), lo(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr DdValue(double h, double l) : hi(h), lo(l) {}

  double to_double() const { return hi + lo; }

  friend constexpr bool operator==(const DdValue&, const DdValue&) = default;
};

/// hi = fl(a + b), hi + lo = a + b exactly.
inline DdValue two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

/// Requires |a| >= |b| or a == 0.
inline DdValue fast_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

/// hi = fl(a * b), hi + lo = a * b exactly unless the product overflows or
/// its low part underflows (see two_prod_checked).
inline DdValue two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

/// two_prod, or nullopt when the exact product is not representable as a
/// double-double: overflow of the high part or loss of the low part to
/// gradual underflow.
inline std::optional<DdValue> two_prod_checked(double a, double b) {
  const DdValue r = two_prod(a, b);
  if (!std::isfinite(r.hi)) return std::nullopt;
  if (a != 0.0 && b != 0.0) {
    // The error term is exact when e_a + e_b >= emin + p - 1 = -1022 + 52.
    if (std::ilogb(a) + std::ilogb(b) < -1022 + 52) return std::nullopt;
  }
  return r;
}

inline DdValue dd_neg(DdValue a) { return {-a.hi, -a.lo}; }

inline DdValue dd_add(DdValue a, DdValue b) {
  DdValue s = two_sum(a.hi, b.hi);
  const DdValue t = two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = fast_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return fast_two_sum(s.hi, s.lo);
}

inline DdValue dd_sub(DdValue a, DdValue b) { return dd_add(a, dd_neg(b)); }

inline DdValue dd_mul(DdValue a, DdValue b) {
  DdValue p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return fast_two_sum(p.hi, p.lo);
}

inline DdValue dd_abs(DdValue a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? dd_neg(a) : a; }

}  // namespace ozimmu
