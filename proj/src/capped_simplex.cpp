#include "resbal/capped_simplex.hpp"

#include <algorithm>
#include <vector>

#include "resbal/errors.hpp"

namespace resbal {

Vector project_capped_simplex(const Vector& v, double lo, double hi, double total) {
  const Index n = v.size();
  if (n == 0) throw UsageError("cannot project an empty vector");
  const double slack = 1e-12 * std::max(1.0, std::abs(total));
  if (lo > hi || static_cast<double>(n) * lo > total + slack || static_cast<double>(n) * hi < total - slack)
    throw UsageError("capped simplex is empty");

  // sum_i clip(v_i - theta, lo, hi) is piecewise linear and nonincreasing in
  // theta with kinks at v_i - hi (leaves the cap) and v_i - lo (hits the floor).
  struct Event {
    double at;
    bool to_floor;
    Index i;
  };
  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(2 * n));
  for (Index i = 0; i < n; ++i) {
    events.push_back({v(i) - hi, false, i});
    events.push_back({v(i) - lo, true, i});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.at < b.at || (a.at == b.at && !a.to_floor && b.to_floor);
  });

  double n_up = static_cast<double>(n), n_mid = 0.0, n_low = 0.0, sum_mid = 0.0;
  double theta = events.back().at;
  bool found = false;
  for (const Event& e : events) {
    const double value = n_up * hi + (sum_mid - n_mid * e.at) + n_low * lo;
    if (value <= total) {
      theta = n_mid > 0 ? (n_up * hi + sum_mid + n_low * lo - total) / n_mid : e.at;
      found = true;
      break;
    }
    if (e.to_floor) {
      n_mid -= 1;
      sum_mid -= v(e.i);
      n_low += 1;
    } else {
      n_up -= 1;
      n_mid += 1;
      sum_mid += v(e.i);
    }
  }
  if (!found) theta = events.back().at;
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = std::clamp(v(i) - theta, lo, hi);
  return x;
}

void project_linf_epigraph(const Vector& v, double s, Vector& z, double& t) {
  const double vmax = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  if (vmax <= s) {
    z = v;
    t = s;
    return;
  }
  // Optimal t solves t = s + sum_j (|v_j| - t)_+ ; scan |v| in decreasing order.
  std::vector<double> a(v.data(), v.data() + v.size());
  for (double& x : a) x = std::abs(x);
  std::sort(a.begin(), a.end(), std::greater<>());
  double partial = 0.0;
  t = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    partial += a[k];
    const double candidate = (s + partial) / static_cast<double>(k + 2);
    const double next = k + 1 < a.size() ? a[k + 1] : 0.0;
    if (candidate >= next) {
      t = candidate;
      break;
    }
  }
  if (t <= 0.0) {
    t = 0.0;
    z = Vector::Zero(v.size());
    return;
  }
  z = v.cwiseMax(-t).cwiseMin(t);
}

}  // namespace resbal
