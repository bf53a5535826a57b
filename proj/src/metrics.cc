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

#include "ropasum/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ropasum/llm_client.h"
#include "ropasum/random.h"
#include "ropasum/text.h"

namespace ropasum {

using nlohmann::json;

ScoreTriple ScoreTriple::from(double precision, double recall) {
  ScoreTriple s{precision, recall, 0.0};
  if (precision + recall > 0.0) {
    s.f1 = 2.0 * precision * recall / (precision + recall);
  }
  return s;
}

ScoreTriple ScoreTriple::from_counts(double overlap, double candidate_count,
                                     double reference_count) {
  double p = candidate_count > 0 ? overlap / candidate_count : 0.0;
  double r = reference_count > 0 ? overlap / reference_count : 0.0;
  return from(p, r);
}

const ScoreTriple& MetricReport::get(std::string_view name) const {
  return const_cast<MetricReport*>(this)->get(name);
}

ScoreTriple& MetricReport::get(std::string_view name) {
  if (name == "rouge1") return rouge1;
  if (name == "rouge2") return rouge2;
  if (name == "rougeL") return rougeL;
  if (name == "rougeS") return rougeS;
  if (name == "meteor") return meteor;
  if (name == "bertscore") return bertscore;
  throw std::invalid_argument("unknown metric " + std::string(name));
}

json report_to_json(const MetricReport& report) {
  json out = json::object();
  for (std::string_view name : kMetricNames) {
    const ScoreTriple& s = report.get(name);
    out[std::string(name)] = {
        {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  }
  return out;
}

MetricReport report_from_json(const json& value) {
  MetricReport report;
  for (std::string_view name : kMetricNames) {
    const json& s = value.at(std::string(name));
    report.get(name) = ScoreTriple{s.at("precision").get<double>(),
                                   s.at("recall").get<double>(),
                                   s.at("f1").get<double>()};
  }
  return report;
}

namespace {

using GramCounts = std::map<std::string, std::size_t>;

constexpr char kGramSeparator = '\x1f';

GramCounts ngram_counts(Tokens tokens, std::size_t n) {
  GramCounts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      gram.push_back(kGramSeparator);
      gram += tokens[i + k];
    }
    ++counts[gram];
  }
  return counts;
}

GramCounts skip_bigram_counts(Tokens tokens,
                              std::optional<std::size_t> max_skip) {
  GramCounts counts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      if (max_skip && j - i - 1 > *max_skip) break;
      ++counts[tokens[i] + kGramSeparator + tokens[j]];
    }
  }
  return counts;
}

std::size_t total(const GramCounts& counts) {
  std::size_t n = 0;
  for (const auto& [gram, c] : counts) n += c;
  return n;
}

std::size_t clipped_overlap(const GramCounts& reference,
                            const GramCounts& candidate) {
  std::size_t overlap = 0;
  for (const auto& [gram, c] : candidate) {
    auto it = reference.find(gram);
    if (it != reference.end()) overlap += std::min(c, it->second);
  }
  return overlap;
}

ScoreTriple overlap_score(const GramCounts& reference,
                          const GramCounts& candidate) {
  return ScoreTriple::from_counts(
      static_cast<double>(clipped_overlap(reference, candidate)),
      static_cast<double>(total(candidate)),
      static_cast<double>(total(reference)));
}

}  // namespace

ScoreTriple rouge_n(Tokens reference, Tokens candidate, std::size_t n) {
  if (n == 0) throw std::invalid_argument("rouge_n: n must be positive");
  return overlap_score(ngram_counts(reference, n), ngram_counts(candidate, n));
}

std::size_t lcs_length(Tokens a, Tokens b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      row[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], row[j - 1]);
    }
    std::swap(prev, row);
  }
  return prev[b.size()];
}

ScoreTriple rouge_l(Tokens reference, Tokens candidate) {
  return ScoreTriple::from_counts(
      static_cast<double>(lcs_length(reference, candidate)),
      static_cast<double>(candidate.size()),
      static_cast<double>(reference.size()));
}

ScoreTriple rouge_s(Tokens reference, Tokens candidate,
                    std::optional<std::size_t> max_skip) {
  return overlap_score(skip_bigram_counts(reference, max_skip),
                       skip_bigram_counts(candidate, max_skip));
}

// ---------------------------------------------------------------------------
// METEOR

std::string meteor_stem(std::string_view word) {
  std::string w(word);
  auto strip = [&](std::string_view suffix, std::size_t min_stem) {
    if (w.size() >= suffix.size() + min_stem && w.ends_with(suffix)) {
      w.resize(w.size() - suffix.size());
      return true;
    }
    return false;
  };
  if (w.size() > 4 && w.ends_with("ies")) {
    w.resize(w.size() - 3);
    w.push_back('y');
    return w;
  }
  if (strip("ing", 3) || strip("ed", 3)) return w;
  if (w.ends_with("es") && w.size() >= 4) {
    std::string_view base(w.data(), w.size() - 2);
    if (base.ends_with("s") || base.ends_with("x") || base.ends_with("z") ||
        base.ends_with("ch") || base.ends_with("sh")) {
      w.resize(w.size() - 2);
      return w;
    }
  }
  if (w.size() > 3 && w.ends_with("s") && !w.ends_with("ss")) w.pop_back();
  return w;
}

namespace {

// Lexicographic objective; larger is better.
struct AlignmentKey {
  long exact = -1;
  long neg_exact_chunks = 0;
  long stem = 0;
  long neg_chunks = 0;

  auto operator<=>(const AlignmentKey&) const = default;
};

class MeteorSearch {
 public:
  static constexpr std::size_t kNodeBudget = 2'000'000;

  MeteorSearch(Tokens reference, Tokens candidate)
      : used_(reference.size(), false) {
    std::vector<std::string> ref_stems;
    for (const std::string& r : reference) ref_stems.push_back(meteor_stem(r));
    edges_.resize(candidate.size());
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      std::string stem = meteor_stem(candidate[i]);
      for (std::size_t j = 0; j < reference.size(); ++j) {
        if (candidate[i] == reference[j]) {
          edges_[i].push_back({j, true});
        }
      }
      for (std::size_t j = 0; j < reference.size(); ++j) {
        if (candidate[i] != reference[j] && stem == ref_stems[j]) {
          edges_[i].push_back({j, false});
        }
      }
    }
  }

  MeteorAlignment run() {
    search(0);
    MeteorAlignment out;
    out.pairs = best_pairs_;
    out.exact_matches = static_cast<std::size_t>(std::max(0L, best_.exact));
    out.stem_matches = static_cast<std::size_t>(best_.stem);
    out.chunks = static_cast<std::size_t>(-best_.neg_chunks);
    out.exhaustive = nodes_ <= kNodeBudget;
    return out;
  }

 private:
  struct Edge {
    std::size_t ref;
    bool exact;
  };
  struct Placed {
    std::size_t cand;
    std::size_t ref;
    bool exact;
  };

  // Chunk counts only grow as pairs are appended in candidate order, so the
  // running counts bound the final ones.
  void search(std::size_t i) {
    if (++nodes_ > kNodeBudget) return;
    AlignmentKey current{exact_, -exact_chunks_, stem_, -chunks_};
    if (i == edges_.size()) {
      if (current > best_) {
        best_ = current;
        best_pairs_.clear();
        for (const Placed& p : placed_) best_pairs_.push_back({p.cand, p.ref});
      }
      return;
    }
    AlignmentKey optimistic = current;
    optimistic.exact += remaining_with_free_edge(i, true);
    optimistic.stem += remaining_with_free_edge(i, false);
    if (optimistic <= best_) return;

    for (const Edge& e : edges_[i]) {
      if (used_[e.ref]) continue;
      place(i, e);
      search(i + 1);
      unplace(e);
    }
    search(i + 1);
  }

  long remaining_with_free_edge(std::size_t from, bool exact) const {
    long n = 0;
    for (std::size_t i = from; i < edges_.size(); ++i) {
      for (const Edge& e : edges_[i]) {
        if (e.exact == exact && !used_[e.ref]) {
          ++n;
          break;
        }
      }
    }
    return n;
  }

  void place(std::size_t cand, const Edge& e) {
    saved_.push_back({exact_chunks_, chunks_, last_exact_});
    bool continues = !placed_.empty() && placed_.back().cand + 1 == cand &&
                     placed_.back().ref + 1 == e.ref;
    if (!continues) ++chunks_;
    if (e.exact) {
      bool exact_continues = last_exact_ && last_exact_->cand + 1 == cand &&
                             last_exact_->ref + 1 == e.ref;
      if (!exact_continues) ++exact_chunks_;
      ++exact_;
      last_exact_ = Placed{cand, e.ref, true};
    } else {
      ++stem_;
    }
    used_[e.ref] = true;
    placed_.push_back({cand, e.ref, e.exact});
  }

  void unplace(const Edge& e) {
    used_[e.ref] = false;
    if (e.exact) {
      --exact_;
    } else {
      --stem_;
    }
    placed_.pop_back();
    const Saved& s = saved_.back();
    exact_chunks_ = s.exact_chunks;
    chunks_ = s.chunks;
    last_exact_ = s.last_exact;
    saved_.pop_back();
  }

  struct Saved {
    long exact_chunks;
    long chunks;
    std::optional<Placed> last_exact;
  };

  std::vector<std::vector<Edge>> edges_;
  std::vector<bool> used_;
  std::vector<Placed> placed_;
  std::vector<Saved> saved_;
  std::optional<Placed> last_exact_;
  long exact_ = 0;
  long stem_ = 0;
  long exact_chunks_ = 0;
  long chunks_ = 0;
  std::size_t nodes_ = 0;
  AlignmentKey best_;
  std::vector<std::pair<std::size_t, std::size_t>> best_pairs_;
};

}  // namespace

MeteorAlignment meteor_align(Tokens reference, Tokens candidate) {
  return MeteorSearch(reference, candidate).run();
}

ScoreTriple meteor(Tokens reference, Tokens candidate) {
  if (reference.empty() || candidate.empty()) return {};
  MeteorAlignment a = meteor_align(reference, candidate);
  const double matches =
      static_cast<double>(a.exact_matches + a.stem_matches);
  if (matches == 0.0) return {};
  const double p = matches / static_cast<double>(candidate.size());
  const double r = matches / static_cast<double>(reference.size());
  const double fmean = 10.0 * p * r / (r + 9.0 * p);
  const double penalty =
      0.5 * std::pow(static_cast<double>(a.chunks) / matches, 3.0);
  return ScoreTriple{p, r, fmean * (1.0 - penalty)};
}

// ---------------------------------------------------------------------------
// BERTScore

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dimension,
                                             std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension == 0) {
    throw std::invalid_argument("embedding dimension must be positive");
  }
}

std::string HashEmbeddingProvider::id() const {
  return "hash:" + std::to_string(dimension_) + ":" + std::to_string(seed_);
}

std::vector<std::vector<double>> HashEmbeddingProvider::embed(Tokens tokens) {
  std::vector<std::vector<double>> out;
  out.reserve(tokens.size());
  for (const std::string& token : tokens) {
    Rng rng(derive_seed(seed_, token));
    std::vector<double> v(dimension_);
    for (double& x : v) x = 2.0 * rng.uniform_real() - 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string url,
                                             std::string model,
                                             std::string api_key,
                                             std::chrono::seconds timeout)
    : url_(std::move(url)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      timeout_(timeout) {}

std::vector<std::vector<double>> HttpEmbeddingProvider::embed(Tokens tokens) {
  if (tokens.empty()) return {};
  json body = {{"model", model_},
               {"input", std::vector<std::string>(tokens.begin(),
                                                  tokens.end())}};
  HttpResult result = post_json(parse_endpoint(url_), api_key_, body, timeout_);
  raise_for_status(result);
  std::vector<std::vector<double>> out;
  try {
    json j = json::parse(result.body);
    for (const json& item : j.at("data")) {
      out.push_back(item.at("embedding").get<std::vector<double>>());
    }
  } catch (const std::exception& e) {
    throw ProviderError(ProviderError::Kind::kMalformed,
                        std::string("malformed embedding response: ") +
                            e.what());
  }
  if (out.size() != tokens.size()) {
    throw ProviderError(ProviderError::Kind::kMalformed,
                        "embedding count does not match token count");
  }
  for (const auto& v : out) {
    if (v.size() != out.front().size() || v.empty()) {
      throw ProviderError(ProviderError::Kind::kMalformed,
                          "embedding dimensions differ");
    }
  }
  return out;
}

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  if (a == b) return 1.0;  // exact, free of rounding
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

ScoreTriple bert_score(Tokens reference, Tokens candidate,
                       EmbeddingProvider& provider) {
  if (reference.empty() || candidate.empty()) return {};
  auto ref = provider.embed(reference);
  auto cand = provider.embed(candidate);
  if (ref.size() != reference.size() || cand.size() != candidate.size()) {
    throw std::runtime_error("embedding provider returned wrong count");
  }
  std::vector<double> best_for_ref(ref.size(), -1.0);
  std::vector<double> best_for_cand(cand.size(), -1.0);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (std::size_t j = 0; j < cand.size(); ++j) {
      double sim = std::min(1.0, cosine(ref[i], cand[j]));
      best_for_ref[i] = std::max(best_for_ref[i], sim);
      best_for_cand[j] = std::max(best_for_cand[j], sim);
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return std::clamp(s / static_cast<double>(v.size()), 0.0, 1.0);
  };
  return ScoreTriple::from(mean(best_for_cand), mean(best_for_ref));
}

MetricReport evaluate_tokens(Tokens reference, Tokens candidate,
                             EmbeddingProvider& provider) {
  MetricReport report;
  report.rouge1 = rouge_n(reference, candidate, 1);
  report.rouge2 = rouge_n(reference, candidate, 2);
  report.rougeL = rouge_l(reference, candidate);
  report.rougeS = rouge_s(reference, candidate);
  report.meteor = meteor(reference, candidate);
  report.bertscore = bert_score(reference, candidate, provider);
  return report;
}

MetricReport evaluate_pair(std::string_view reference,
                           std::string_view candidate,
                           EmbeddingProvider& provider) {
  std::vector<std::string> ref = normalize_text(reference);
  std::vector<std::string> cand = normalize_text(candidate);
  return evaluate_tokens(ref, cand, provider);
}

}  // namespace ropasum
