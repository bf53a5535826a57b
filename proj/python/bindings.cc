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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ropasum/cli.h"
#include "ropasum/corpus.h"
#include "ropasum/diagnostics.h"
#include "ropasum/gold.h"
#include "ropasum/metrics.h"
#include "ropasum/stats.h"

namespace py = pybind11;

namespace ropasum {
namespace {

py::object to_python(const nlohmann::json& value) {
  return py::module_::import("json").attr("loads")(value.dump());
}

py::tuple triple(const ScoreTriple& t) {
  return py::make_tuple(t.precision, t.recall, t.f1);
}

using Seq = std::vector<std::string>;

py::object evaluate(const std::string& reference, const std::string& candidate,
                    std::size_t dimension) {
  HashEmbeddingProvider embedder(dimension);
  return to_python(report_to_json(evaluate_pair(reference, candidate, embedder)));
}

py::list curve(const std::vector<std::vector<double>>& rep_means,
               bool pooled) {
  py::list out;
  for (const SECurvePoint& p :
       se_curve(rep_means, pooled ? SeMode::kPooled : SeMode::kWithinShot)) {
    py::dict d;
    d["shots"] = p.shots;
    d["mean"] = p.mean;
    d["standard_error"] = p.standard_error;
    d["n"] = p.n;
    out.append(d);
  }
  return out;
}

py::tuple select_shots(const std::vector<double>& standard_errors,
                       double threshold) {
  std::vector<SECurvePoint> points;
  for (double se : standard_errors) {
    points.push_back({points.size(), 0.0, se, 0});
  }
  ShotSelection s = select_shot_count(points, threshold);
  return py::make_tuple(s.shots, s.threshold_met);
}

py::dict census(const std::string& path) {
  Corpus corpus = load_corpus(path);
  py::dict out;
  for (const auto& [category, count] : corpus.census()) {
    out[py::str(std::string(to_string(category)))] = count;
  }
  return out;
}

py::list gold_items(const std::string& path) {
  Corpus corpus = load_corpus(path);
  py::list out;
  for (std::size_t i = 0; i < corpus.gold_annotations().size(); ++i) {
    out.append(to_python(gold_item_to_json(make_gold_item(corpus, i))));
  }
  return out;
}

py::object diagnose_item(const std::string& path, std::size_t annotation,
                         const std::string& generated) {
  Corpus corpus = load_corpus(path);
  GoldItem item = make_gold_item(corpus, annotation);
  DiagnosisReport r = diagnose(generated, item.summary,
                               corpus.sentence(item.sentence),
                               build_verb_lexicon(corpus));
  return to_python(diagnosis_to_json(r));
}

py::tuple cli(const std::vector<std::string>& args) {
  std::vector<std::string> argv_storage{"ropasum"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace
}  // namespace ropasum

PYBIND11_MODULE(_core, m) {
  using namespace ropasum;
  m.doc() = "ropasum native core";

  py::register_exception<CorpusError>(m, "CorpusError", PyExc_ValueError);

  m.def("lcs_length", [](const Seq& a, const Seq& b) { return lcs_length(a, b); });
  m.def("rouge_n", [](const Seq& r, const Seq& c, std::size_t n) {
    return triple(rouge_n(r, c, n));
  }, py::arg("reference"), py::arg("candidate"), py::arg("n"));
  m.def("rouge_l", [](const Seq& r, const Seq& c) { return triple(rouge_l(r, c)); },
        py::arg("reference"), py::arg("candidate"));
  m.def("rouge_s", [](const Seq& r, const Seq& c,
                      std::optional<std::size_t> max_skip) {
    return triple(rouge_s(r, c, max_skip));
  }, py::arg("reference"), py::arg("candidate"), py::arg("max_skip") = py::none());
  m.def("meteor", [](const Seq& r, const Seq& c) { return triple(meteor(r, c)); },
        py::arg("reference"), py::arg("candidate"));
  m.def("evaluate_pair", &evaluate, py::arg("reference"), py::arg("candidate"),
        py::arg("embedding_dimension") = 64);
  m.def("cohen_kappa", [](const Seq& a, const Seq& b) { return cohen_kappa(a, b); });
  m.def("se_curve", &curve, py::arg("rep_means"), py::arg("pooled") = true);
  m.def("select_shot_count", &select_shots, py::arg("standard_errors"),
        py::arg("threshold") = kDefaultSeThreshold);
  m.def("census", &census, py::arg("corpus_path"));
  m.def("gold_items", &gold_items, py::arg("corpus_path"));
  m.def("diagnose", &diagnose_item, py::arg("corpus_path"),
        py::arg("annotation_index"), py::arg("generated"));
  m.def("run_cli", &cli, py::arg("args"));
}
