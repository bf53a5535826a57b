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

#ifndef ROPASUM_RANDOM_H_
#define ROPASUM_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace ropasum {

// Seeded PRNG used for every random decision in the harness.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are not, so bounded integers and
// unit reals are derived from raw engine output here to keep results
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  // Uniform real in [0, 1) with 53 bits of precision.
  double uniform_real();

  bool bernoulli(double p) { return uniform_real() < p; }

  // Fisher-Yates, last element first.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed from a root seed and a purpose label,
// so that e.g. the dataset split and the example selection never share a
// stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
// 64-bit FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t stable_hash(std::string_view text);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index);

}  // namespace ropasum

#endif  // ROPASUM_RANDOM_H_
