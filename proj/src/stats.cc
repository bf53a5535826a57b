// Copyright 2026 The ropasum Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ropasum/stats.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <boost/accumulators/accumulators.hpp>
#include <boost/accumulators/statistics/count.hpp>
#include <boost/accumulators/statistics/extended_p_square.hpp>
#include <boost/accumulators/statistics/max.hpp>
#include <boost/accumulators/statistics/mean.hpp>
#include <boost/accumulators/statistics/min.hpp>
#include <boost/accumulators/statistics/stats.hpp>
#include <boost/accumulators/statistics/variance.hpp>

namespace ropasum {

namespace acc = boost::accumulators;

nlohmann::json boxplot_to_json(const BoxplotSummary& s) {
  return {{"min", s.min},       {"q1", s.q1},
          {"median", s.median}, {"q3", s.q3},
          {"max", s.max},       {"mean", s.mean},
          {"variance", s.variance}, {"n", s.n}};
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  double h = p * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

BoxplotSummary boxplot_summary(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("boxplot_summary: empty input");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxplotSummary s;
  s.n = sorted.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  // Summing in sorted order keeps the result independent of input order.
  s.mean = mean_of(sorted);
  s.variance = sample_variance(sorted);
  return s;
}

// ---------------------------------------------------------------------------

struct StreamingSummary::State {
  using Accumulator = acc::accumulator_set<
      double, acc::stats<acc::tag::count, acc::tag::min, acc::tag::max,
                         acc::tag::mean, acc::tag::variance,
                         acc::tag::extended_p_square>>;

  static constexpr std::array<double, 3> kProbabilities = {0.25, 0.5, 0.75};

  State()
      : accumulator(acc::tag::extended_p_square::probabilities =
                        kProbabilities) {}

  Accumulator accumulator;
  std::vector<double> exact;
};

StreamingSummary::StreamingSummary() : state_(std::make_unique<State>()) {}
StreamingSummary::~StreamingSummary() = default;
StreamingSummary::StreamingSummary(StreamingSummary&&) noexcept = default;
StreamingSummary& StreamingSummary::operator=(StreamingSummary&&) noexcept =
    default;

void StreamingSummary::add(double value) {
  state_->accumulator(value);
  if (state_->exact.size() <= kExactLimit) state_->exact.push_back(value);
}

std::size_t StreamingSummary::count() const {
  return acc::count(state_->accumulator);
}

bool StreamingSummary::quartiles_exact() const {
  return count() <= kExactLimit;
}

BoxplotSummary StreamingSummary::summary() const {
  const std::size_t n = count();
  if (n == 0) throw std::logic_error("StreamingSummary: no values");
  if (quartiles_exact()) return boxplot_summary(state_->exact);
  const auto& a = state_->accumulator;
  BoxplotSummary s;
  s.n = n;
  s.min = acc::min(a);
  s.max = acc::max(a);
  s.mean = acc::mean(a);
  s.variance = acc::variance(a) * static_cast<double>(n) /
               static_cast<double>(n - 1);
  auto quartiles = acc::extended_p_square(a);
  s.q1 = std::clamp(quartiles[0], s.min, s.max);
  s.median = std::clamp(quartiles[1], s.q1, s.max);
  s.q3 = std::clamp(quartiles[2], s.median, s.max);
  return s;
}

// ---------------------------------------------------------------------------

std::vector<SECurvePoint> se_curve(
    const std::vector<std::vector<double>>& rep_means, SeMode mode) {
  if (rep_means.empty()) {
    throw std::invalid_argument("se_curve: need at least one shot count");
  }
  const std::size_t reps = rep_means.front().size();
  if (reps < 2) {
    throw std::invalid_argument("se_curve: need at least two repetitions");
  }
  for (const auto& row : rep_means) {
    if (row.size() != reps) throw std::invalid_argument("se_curve: ragged matrix");
  }
  std::vector<SECurvePoint> curve;
  std::vector<double> pool;
  for (std::size_t s = 0; s < rep_means.size(); ++s) {
    if (mode == SeMode::kWithinShot) pool.clear();
    pool.insert(pool.end(), rep_means[s].begin(), rep_means[s].end());
    double sd = std::sqrt(sample_variance(pool));
    curve.push_back(SECurvePoint{
        s, mean_of(pool), sd / std::sqrt(static_cast<double>(pool.size())),
        pool.size()});
  }
  return curve;
}

ShotSelection select_shot_count(std::span<const SECurvePoint> curve,
                                double threshold) {
  if (curve.empty()) throw std::invalid_argument("select_shot_count: empty curve");
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("select_shot_count: threshold must be positive");
  }
  for (const SECurvePoint& p : curve) {
    if (p.standard_error <= threshold) return ShotSelection{p.shots, true};
  }
  return ShotSelection{curve.back().shots, false};
}

}  // namespace ropasum
