#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration on a finite interval:
// the subinterval with the largest error estimate is bisected until the
// summed error meets the tolerance.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace smoothbandit::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct Segment {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;

  bool operator<(const Segment& other) const { return error < other.error; }
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
Segment gauss_kronrod_15(F& f, double a, double b, int& evaluations) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[static_cast<std::size_t>(i)];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[static_cast<std::size_t>(i)] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[static_cast<std::size_t>(i / 2)] * pair;
  }
  evaluations += 15;
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Integrates f over [a, b] to max(absolute, relative * |value|).
template <class F>
Result integrate(F f, double a, double b, double relative = 1e-10, double absolute = 0.0, int max_segments = 2000) {
  Result result;
  if (!(b > a)) return {0.0, 0.0, 0, true};

  std::priority_queue<Segment> heap;
  heap.push(detail::gauss_kronrod_15(f, a, b, result.evaluations));
  result.value = heap.top().value;
  result.error = heap.top().error;

  const double tiny = 64.0 * std::numeric_limits<double>::epsilon();
  while (result.error > std::max(absolute, relative * std::abs(result.value)) &&
         static_cast<int>(heap.size()) < max_segments) {
    const Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.b - worst.a <= tiny * std::max(std::abs(worst.a), std::abs(worst.b))) break;
    heap.pop();
    const auto left = detail::gauss_kronrod_15(f, worst.a, mid, result.evaluations);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.b, result.evaluations);
    heap.push(left);
    heap.push(right);
    result.value += left.value + right.value - worst.value;
    result.error += left.error + right.error - worst.error;
  }
  // Re-sum from scratch; the running totals drift by rounding.
  result.value = 0.0;
  result.error = 0.0;
  for (; !heap.empty(); heap.pop()) {
    result.value += heap.top().value;
    result.error += heap.top().error;
  }
  result.converged = result.error <= std::max(absolute, relative * std::abs(result.value));
  return result;
}

}  // namespace smoothbandit::quadrature
