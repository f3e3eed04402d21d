/* Copyright 2026 The p1echo Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "p1echo/common.hpp"

// Revival detection and envelope fits on sampled echo curves.
namespace p1echo {

struct Revival {
  int n = 0;
  double time = 0.0;  // s
  double amplitude = 0.0;
};

struct RevivalSearch {
  std::vector<Revival> revivals;
  std::vector<std::string> warnings;

  std::vector<double> times() const {
    std::vector<double> t;
    for (const auto& r : revivals) t.push_back(r.time);
    return t;
  }
};

namespace detail {

/// Vertex of the parabola through three points (abscissae need not be equal
/// spaced). Falls back to the middle point when the points are collinear.
inline std::pair<double, double> parabola_vertex(double x0, double y0, double x1, double y1, double x2,
                                                 double y2) {
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (!(a < 0.0)) return {x1, y1};
  // Newton form: y = y0 + d01 (x - x0) + a (x - x0)(x - x1).
  const double b = d01 - a * (x0 + x1);
  const double xv = std::clamp(-b / (2.0 * a), x0, x2);
  return {xv, y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1)};
}

}  // namespace detail

/// Maximum of the curve inside each window [n - 0.4, n + 0.4] * period. A
/// window whose maximum sits on its edge (no interior peak) or holds fewer
/// than three samples is skipped with a warning.
inline RevivalSearch detect_revivals(const std::vector<double>& tau, const std::vector<double>& signal,
                                     double period) {
  if (tau.size() != signal.size()) throw Error("tau and signal differ in length");
  if (!(period > 0.0)) throw Error("expected period must be > 0");
  RevivalSearch out;
  if (tau.empty()) return out;
  const double tmax = tau.back();
  for (int n = 1; (n - 0.4) * period <= tmax; ++n) {
    const double lo = (n - 0.4) * period, hi = (n + 0.4) * period;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < tau.size(); ++i)
      if (tau[i] >= lo && tau[i] <= hi) idx.push_back(i);
    if (idx.size() < 3) {
      out.warnings.push_back("revival " + std::to_string(n) + ": fewer than 3 samples in window");
      continue;
    }
    std::size_t best = idx.front();
    for (std::size_t i : idx)
      if (signal[i] > signal[best]) best = i;
    if (best == idx.front() || best == idx.back()) {
      out.warnings.push_back("revival " + std::to_string(n) + ": no interior maximum in window");
      continue;
    }
    const auto [t, a] = detail::parabola_vertex(tau[best - 1], signal[best - 1], tau[best], signal[best],
                                                tau[best + 1], signal[best + 1]);
    out.revivals.push_back({n, t, a});
  }
  return out;
}

enum class EnvelopeModel { exponential, gaussian };

inline std::string to_string(EnvelopeModel m) { return m == EnvelopeModel::exponential ? "exponential" : "gaussian"; }

struct FitResult {
  double t2 = 0.0;  // s
  EnvelopeModel model = EnvelopeModel::exponential;
  double residual_norm = 0.0;
  std::vector<double> revival_times;  // s
  std::vector<double> fit_t, fit_y;   // points used
};

namespace detail {

inline double envelope(double t, double t2, EnvelopeModel m) {
  const double x = t / t2;
  return m == EnvelopeModel::exponential ? std::exp(-x) : std::exp(-x * x);
}

inline double sum_sq(const std::vector<double>& t, const std::vector<double>& y, double t2, EnvelopeModel m) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - envelope(t[i], t2, m);
    s += r * r;
  }
  return s;
}

}  // namespace detail

/// Least-squares fit of y = exp(-t/T2) or exp(-(t/T2)^2) with unit amplitude
/// (signals are normalized to S(0) = 1). One-parameter problem: a log-spaced
/// scan in the rate 1/T2 brackets the minimum, golden-section search refines
/// it. Data without resolvable decay raise an error.
inline FitResult fit_envelope(const std::vector<double>& t, const std::vector<double>& y, EnvelopeModel model) {
  if (t.size() != y.size()) throw Error("fit inputs differ in length");
  if (t.size() < 3) throw Error("envelope fit needs at least 3 points");
  const double tmax = *std::max_element(t.begin(), t.end());
  if (!(tmax > 0.0)) throw Error("envelope fit needs positive times");

  // Rates in units of 1/tmax, from 1e-6 (no visible decay) to 1e4.
  const auto cost = [&](double log_rate) { return detail::sum_sq(t, y, tmax / std::exp(log_rate), model); };
  const double lo = std::log(1e-6), hi = std::log(1e4);
  const int n = 400;
  int best = 0;
  double best_cost = cost(lo);
  for (int i = 1; i <= n; ++i) {
    const double c = cost(lo + (hi - lo) * i / n);
    if (c < best_cost) best_cost = c, best = i;
  }
  if (best == 0) throw Error("singular fit: the data show no resolvable decay");
  if (best == n) throw Error("singular fit: decay faster than the sampling resolves");

  double a = lo + (hi - lo) * (best - 1) / n, b = lo + (hi - lo) * (best + 1) / n;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = cost(c), fd = cost(d);
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - phi * (b - a), fc = cost(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + phi * (b - a), fd = cost(d);
    }
  }
  FitResult r;
  r.model = model;
  r.t2 = tmax / std::exp(0.5 * (a + b));
  r.residual_norm = std::sqrt(detail::sum_sq(t, y, r.t2, model));
  r.fit_t = t;
  r.fit_y = y;
  return r;
}

/// T2 of an echo curve. With an expected revival period and at least two
/// detected revivals, the revival maxima plus the tau = 0 point are fitted;
/// otherwise the whole curve (at least 5 points) is.
inline FitResult fit_t2(const std::vector<double>& tau, const std::vector<double>& signal, EnvelopeModel model,
                        std::optional<double> period = {}) {
  if (period) {
    const auto rev = detect_revivals(tau, signal, *period);
    if (rev.revivals.size() >= 2) {
      std::vector<double> t{0.0}, y{1.0};
      for (std::size_t i = 0; i < tau.size(); ++i)
        if (tau[i] == 0.0) y[0] = signal[i];
      for (const auto& r : rev.revivals) {
        t.push_back(r.time);
        y.push_back(r.amplitude);
      }
      FitResult f = fit_envelope(t, y, model);
      f.revival_times = rev.times();
      return f;
    }
  }
  if (tau.size() < 5) throw Error("envelope fit needs >= 2 revivals or >= 5 points");
  return fit_envelope(tau, signal, model);
}

}  // namespace p1echo
