#include "gm3/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "gm3/errors.hpp"

namespace gm3 {

namespace {

// Kronrod nodes on [0, 1]; odd indices are shared with the Gauss rule.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double lo, hi, value, error;
  bool operator<(const Interval& other) const { return error < other.error; }
};

Interval gk15(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

QuadratureResult integrate_gk15(const std::function<double(double)>& f, double lo, double hi,
                                double abs_tol, double rel_tol, int max_intervals) {
  QuadratureResult out;
  if (hi == lo) return out;
  std::priority_queue<Interval> queue;
  Interval first = gk15(f, lo, hi);
  double total = first.value;
  double total_err = first.error;
  queue.push(first);
  int count = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (count >= max_intervals) {
      std::ostringstream os;
      os << "adaptive quadrature on [" << lo << ", " << hi << "] stalled with error estimate "
         << total_err;
      throw Error(ErrorKind::QuadratureNotConverged, os.str());
    }
    Interval worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    Interval left = gk15(f, worst.lo, mid);
    Interval right = gk15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++count;
    // error estimates below roundoff cannot be refined further
    if (total_err <= 50.0 * std::numeric_limits<double>::epsilon() * std::abs(total)) break;
  }
  // recompute the sum to shed accumulated update roundoff
  total = 0.0;
  total_err = 0.0;
  while (!queue.empty()) {
    total += queue.top().value;
    total_err += queue.top().error;
    queue.pop();
  }
  out.value = total;
  out.error = total_err;
  out.evaluations = 15 * (2 * count - 1);
  return out;
}

}  // namespace gm3
