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

#ifndef ROPASUM_STATS_H_
#define ROPASUM_STATS_H_

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "json.hpp"

namespace ropasum {

struct BoxplotSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // sample (n - 1) variance, 0 when n == 1
  std::size_t n = 0;
};

nlohmann::json boxplot_to_json(const BoxplotSummary& summary);

// Quartiles by linear interpolation between order statistics at position
// p * (n - 1) (the "inclusive" method). Throws std::invalid_argument on an
// empty input.
BoxplotSummary boxplot_summary(std::span<const double> values);

double sample_variance(std::span<const double> values);

// Constant-memory summary for long streams such as permutation sweeps.
// Count, mean, variance, min and max are exact. Quartiles are exact while the
// stream is at most kExactLimit long and P-square estimates beyond that.
class StreamingSummary {
 public:
  static constexpr std::size_t kExactLimit = 4096;

  StreamingSummary();
  ~StreamingSummary();
  StreamingSummary(StreamingSummary&&) noexcept;
  StreamingSummary& operator=(StreamingSummary&&) noexcept;

  void add(double value);
  std::size_t count() const;
  bool quartiles_exact() const;
  // Throws std::logic_error when empty.
  BoxplotSummary summary() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

struct SECurvePoint {
  std::size_t shots = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};

enum class SeMode {
  // Point s pools the repetition means of shot counts 0..s.
  kPooled,
  // Point s uses only the repetition means of shot count s.
  kWithinShot,
};

// `rep_means[s][r]` is the mean score of repetition r at shot count s.
// Requires a rectangular matrix with at least one row and two columns;
// throws std::invalid_argument otherwise.
std::vector<SECurvePoint> se_curve(
    const std::vector<std::vector<double>>& rep_means,
    SeMode mode = SeMode::kPooled);

struct ShotSelection {
  std::size_t shots = 0;
  bool threshold_met = false;
};

inline constexpr double kDefaultSeThreshold = 0.05;

// Smallest shot count whose standard error is at or below the threshold;
// the largest shot count, flagged unmet, when none qualifies.
ShotSelection select_shot_count(std::span<const SECurvePoint> curve,
                                double threshold = kDefaultSeThreshold);

}  // namespace ropasum

#endif  // ROPASUM_STATS_H_
