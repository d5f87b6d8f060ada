// Copyright 2026 The AGE Toolkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Measure-vs-WER evaluation: Pearson / Spearman correlation and the
// logistic WER estimator f(m) = 100 / (1 + exp(a*m + b)) fitted by least
// squares.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "agekit/error.hpp"

namespace agekit {

namespace stats_detail {

inline void check_pair(std::span<const double> x, std::span<const double> y, std::size_t min_n) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kShape, "sequence lengths differ (" + std::to_string(x.size()) +
                                       " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < min_n) {
    throw Error(ErrorCode::kTooFewPoints, "need at least " + std::to_string(min_n) +
                                              " points, got " + std::to_string(x.size()));
  }
}

inline double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Centered sum of squares, treating spread at rounding level as zero.
inline double centered_ss(std::span<const double> x, double mu, bool* degenerate) {
  double ss = 0.0;
  double scale = 0.0;
  for (double v : x) {
    ss += (v - mu) * (v - mu);
    scale = std::max(scale, std::abs(v));
  }
  const double noise = 1e-14 * scale;
  *degenerate = !(ss > static_cast<double>(x.size()) * noise * noise);
  return ss;
}

}  // namespace stats_detail

// rho = sum (x-xbar)(y-ybar) / sqrt(sum (x-xbar)^2 * sum (y-ybar)^2)
inline double pearson(std::span<const double> x, std::span<const double> y) {
  stats_detail::check_pair(x, y, 2);
  const double mx = stats_detail::mean(x);
  const double my = stats_detail::mean(y);
  bool flat_x = false;
  bool flat_y = false;
  const double sxx = stats_detail::centered_ss(x, mx, &flat_x);
  const double syy = stats_detail::centered_ss(y, my, &flat_y);
  if (flat_x || flat_y) {
    throw Error(ErrorCode::kUndefinedCorrelation,
                std::string("zero variance in ") + (flat_x ? "first" : "second") + " sequence");
  }
  double sxy = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) sxy += (x[n] - mx) * (y[n] - my);
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

// 1-based ranks; tied values share the average of their ranks.
inline std::vector<double> fractional_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  stats_detail::check_pair(x, y, 2);
  const std::vector<double> rx = fractional_ranks(x);
  const std::vector<double> ry = fractional_ranks(y);
  return pearson(rx, ry);
}

struct LogisticParams {
  double a = 0.0;
  double b = 0.0;
};

inline double map_logistic(const LogisticParams& p, double m) {
  const double z = p.a * m + p.b;
  // Evaluate on the side where exp() cannot overflow.
  if (z > 0.0) {
    const double e = std::exp(-z);
    return 100.0 * e / (1.0 + e);
  }
  return 100.0 / (1.0 + std::exp(z));
}

inline double logistic_loss(const LogisticParams& p, std::span<const double> m,
                            std::span<const double> wer) {
  double loss = 0.0;
  for (std::size_t n = 0; n < m.size(); ++n) {
    const double r = wer[n] - map_logistic(p, m[n]);
    loss += r * r;
  }
  return loss;
}

struct LogisticFit {
  LogisticParams params;
  LogisticParams initial;  // logit-OLS starting point
  double loss = 0.0;
  double initial_loss = 0.0;
  int iterations = 0;
};

struct LogisticFitOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-12;
  int max_halvings = 60;
  double logit_clamp_lo = 0.1;
  double logit_clamp_hi = 99.9;
};

// Least-squares fit of the logistic WER estimator. WER above 100 is treated
// as 100. Starts from ordinary least squares on the logit of the (clamped)
// WER, then refines the original squared loss with step-halving Gauss-Newton.
inline LogisticFit fit_logistic_detailed(std::span<const double> m, std::span<const double> wer_in,
                                         const LogisticFitOptions& opt = {}) {
  stats_detail::check_pair(m, wer_in, 3);
  std::vector<double> wer(wer_in.begin(), wer_in.end());
  for (double& w : wer) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "WER values must be finite and non-negative");
    }
    w = std::min(w, 100.0);
  }
  for (double v : m) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite measure value");
  }

  const double mm = stats_detail::mean(m);
  bool flat = false;
  const double smm = stats_detail::centered_ss(m, mm, &flat);
  if (flat) throw Error(ErrorCode::kDegenerateFit, "measure values have zero variance");

  // z = ln(100/w - 1) = a*m + b for data on the curve.
  std::vector<double> z(wer.size());
  for (std::size_t n = 0; n < wer.size(); ++n) {
    const double w = std::clamp(wer[n], opt.logit_clamp_lo, opt.logit_clamp_hi);
    z[n] = std::log(100.0 / w - 1.0);
  }
  const double mz = stats_detail::mean(z);
  double smz = 0.0;
  for (std::size_t n = 0; n < m.size(); ++n) smz += (m[n] - mm) * (z[n] - mz);

  LogisticFit fit;
  fit.initial.a = smz / smm;
  fit.initial.b = mz - fit.initial.a * mm;
  fit.initial_loss = logistic_loss(fit.initial, m, wer);
  fit.params = fit.initial;
  fit.loss = fit.initial_loss;

  for (int it = 0; it < opt.max_iterations && fit.loss > 0.0; ++it) {
    // Normal equations of the linearized residual r = wer - f.
    double jaa = 0.0, jab = 0.0, jbb = 0.0, ga = 0.0, gb = 0.0;
    for (std::size_t n = 0; n < m.size(); ++n) {
      const double f = map_logistic(fit.params, m[n]);
      const double dfdz = -f * (100.0 - f) / 100.0;
      const double da = dfdz * m[n];
      const double db = dfdz;
      const double r = wer[n] - f;
      jaa += da * da;
      jab += da * db;
      jbb += db * db;
      ga += da * r;
      gb += db * r;
    }
    const double det = jaa * jbb - jab * jab;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) break;
    double step_a = (jbb * ga - jab * gb) / det;
    double step_b = (jaa * gb - jab * ga) / det;

    bool improved = false;
    LogisticParams trial;
    double trial_loss = fit.loss;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      trial = {fit.params.a + step_a, fit.params.b + step_b};
      trial_loss = logistic_loss(trial, m, wer);
      if (trial_loss <= fit.loss) {
        improved = true;
        break;
      }
      step_a *= 0.5;
      step_b *= 0.5;
    }
    if (!improved) break;
    const double change = (fit.loss - trial_loss) / std::max(fit.loss, 1e-300);
    fit.params = trial;
    fit.loss = trial_loss;
    fit.iterations = it + 1;
    if (change < opt.relative_tolerance) break;
  }
  return fit;
}

inline LogisticParams fit_logistic(std::span<const double> m, std::span<const double> wer) {
  return fit_logistic_detailed(m, wer).params;
}

struct CorrelationReport {
  std::string measure_name;
  std::size_t n_points = 0;
  LogisticParams params;
  double rho_magnitude = 0.0;
  double rho_signed = 0.0;
  double spearman = 0.0;
  double rmse_mapped = 0.0;
};

// Fits the logistic map, then correlates the mapped scores f(m) with WER.
inline CorrelationReport evaluate_measure(std::span<const double> m, std::span<const double> wer,
                                          std::string name) {
  stats_detail::check_pair(m, wer, 3);
  CorrelationReport rep;
  rep.measure_name = std::move(name);
  rep.n_points = m.size();
  rep.params = fit_logistic(m, wer);

  std::vector<double> target(wer.begin(), wer.end());
  for (double& w : target) w = std::min(w, 100.0);
  std::vector<double> mapped(m.size());
  double sq = 0.0;
  for (std::size_t n = 0; n < m.size(); ++n) {
    mapped[n] = map_logistic(rep.params, m[n]);
    sq += (target[n] - mapped[n]) * (target[n] - mapped[n]);
  }
  rep.rho_signed = pearson(mapped, target);
  rep.rho_magnitude = std::abs(rep.rho_signed);
  rep.spearman = spearman(m, wer);
  rep.rmse_mapped = std::sqrt(sq / static_cast<double>(m.size()));
  return rep;
}

}  // namespace agekit
