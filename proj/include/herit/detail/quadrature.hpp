#pragma once

#include <array>
#include <cmath>

namespace herit {
namespace detail {

// Kronrod 15 / Gauss 7 abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Gk15Result {
  double value;
  double error;
};

template <class F>
Gk15Result gk15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int k = 0; k < 7; ++k) {
    const double dx = half * kXgk[k];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kWgk[k] * pair;
    if (k % 2 == 1) gauss += kWg[k / 2] * pair;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

template <class F>
double adaptive_gk15(F& f, double a, double b, double tol, int depth, Gk15Result whole) {
  if (whole.error <= tol || depth <= 0) return whole.value;
  const double mid = 0.5 * (a + b);
  const Gk15Result left = gk15(f, a, mid);
  const Gk15Result right = gk15(f, mid, b);
  if (left.error + right.error <= 0.5 * tol) return left.value + right.value;
  return adaptive_gk15(f, a, mid, 0.5 * tol, depth - 1, left) +
         adaptive_gk15(f, mid, b, 0.5 * tol, depth - 1, right);
}

}  // namespace detail

template <class F>
double integrate_gk15(F&& f, double a, double b, double abs_tol, int max_depth) {
  if (!(a < b)) return 0.0;
  const detail::Gk15Result whole = detail::gk15(f, a, b);
  return detail::adaptive_gk15(f, a, b, abs_tol, max_depth, whole);
}

}  // namespace herit
