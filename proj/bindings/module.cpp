#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tabsa/corpus.hpp"
#include "tabsa/embedding.hpp"
#include "tabsa/errors.hpp"
#include "tabsa/harness.hpp"
#include "tabsa/metrics.hpp"
#include "tabsa/refiner.hpp"
#include "tabsa/selfcheck.hpp"
#include "tabsa/synthetic.hpp"

namespace py = pybind11;
using namespace tabsa;

namespace {

// Python passes X as a list of columns (one embedding per token).
Matrix matrix_from_columns(const std::vector<Vec>& columns) {
  if (columns.empty()) throw InputError("matrix needs at least one column");
  Matrix x(columns[0].size(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != x.rows()) {
      throw InputError("matrix columns differ in length");
    }
    std::copy(columns[j].begin(), columns[j].end(), x.col(j).begin());
  }
  return x;
}

Vec span_to_vec(std::span<const double> s) { return Vec(s.begin(), s.end()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "context-aware target/aspect embedding refinement for TABSA";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalDivergenceError>(m, "NumericalDivergenceError",
                                                   PyExc_ArithmeticError);
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError",
                                               PyExc_ArithmeticError);

  py::enum_<Polarity>(m, "Polarity")
      .value("Positive", Polarity::Positive)
      .value("Negative", Polarity::Negative)
      .value("NoneLabel", Polarity::None);

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def(py::init<std::size_t, std::uint64_t>(), py::arg("dim"), py::arg("seed") = 1)
      .def("insert", &EmbeddingTable::insert)
      .def("contains", &EmbeddingTable::contains)
      .def("lookup",
           [](const EmbeddingTable& t, const std::string& w) {
             return span_to_vec(t.lookup(w));
           })
      .def("target_embedding",
           [](const EmbeddingTable& t, const std::string& id) {
             return span_to_vec(t.target_embedding(id));
           })
      .def("reseeded", &EmbeddingTable::reseeded)
      .def_property_readonly("dim", &EmbeddingTable::dim)
      .def_property_readonly("seed", &EmbeddingTable::seed)
      .def("__len__", &EmbeddingTable::size);

  m.def(
      "parse_embedding_file",
      [](const std::string& path, std::size_t dim, std::uint64_t seed) {
        EmbeddingLoadReport report;
        EmbeddingTable table = parse_embedding_file(path, dim, seed, &report);
        return py::make_tuple(std::move(table), report.stored, report.skipped_lines);
      },
      py::arg("path"), py::arg("dim"), py::arg("seed") = 1,
      "returns (table, stored, skipped_line_numbers)");
  m.def("write_embedding_file", &write_embedding_file);

  py::class_<AspectEmbedding>(m, "AspectEmbedding")
      .def_readonly("label", &AspectEmbedding::label)
      .def_readonly("vector", &AspectEmbedding::vector)
      .def_readonly("source_words", &AspectEmbedding::source_words)
      .def_readonly("all_oov", &AspectEmbedding::all_oov);
  m.def("aspect_embedding", &aspect_embedding);

  py::class_<OpinionTuple>(m, "OpinionTuple")
      .def(py::init([](const std::string& target, const std::string& aspect,
                       Polarity polarity) {
             return OpinionTuple{target, aspect, polarity};
           }),
           py::arg("target_id"), py::arg("aspect"), py::arg("polarity"))
      .def_readonly("target_id", &OpinionTuple::target_id)
      .def_readonly("aspect", &OpinionTuple::aspect)
      .def_readonly("polarity", &OpinionTuple::polarity);

  py::class_<Sentence>(m, "Sentence")
      .def(py::init())
      .def_readwrite("id", &Sentence::id)
      .def_readwrite("tokens", &Sentence::tokens)
      .def_readwrite("target_positions", &Sentence::target_positions)
      .def_readwrite("opinions", &Sentence::opinions)
      .def_readwrite("split", &Sentence::split);

  m.def("tokenize", &tokenize);
  m.def("validate_sentence", &validate_sentence);
  m.def("load_sentihood", [](const std::string& path) {
    CorpusLoadReport report;
    std::vector<Sentence> sentences = load_sentihood(path, &report);
    return py::make_tuple(std::move(sentences), report.single_target, report.two_target,
                          report.record_errors);
  });

  py::class_<SyntheticConfig>(m, "SyntheticConfig")
      .def(py::init(&SyntheticConfig::defaults))
      .def_readwrite("seed", &SyntheticConfig::seed)
      .def_readwrite("count", &SyntheticConfig::count)
      .def_readwrite("two_target_ratio", &SyntheticConfig::two_target_ratio)
      .def_readwrite("dim", &SyntheticConfig::dim)
      .def_readwrite("aspects", &SyntheticConfig::aspects);
  m.def("generate_synthetic", &generate_synthetic);
  m.def("build_synthetic_table", &build_synthetic_table);

  py::class_<RefinerConfig>(m, "RefinerConfig")
      .def(py::init())
      .def_readwrite("c", &RefinerConfig::c)
      .def_readwrite("alpha", &RefinerConfig::alpha)
      .def_readwrite("beta", &RefinerConfig::beta)
      .def_readwrite("lambda_", &RefinerConfig::lambda)
      .def_readwrite("learning_rate", &RefinerConfig::learning_rate)
      .def_readwrite("max_iters", &RefinerConfig::max_iters)
      .def_readwrite("seed", &RefinerConfig::seed);

  py::class_<CoefficientState>(m, "CoefficientState")
      .def_readonly("w", &CoefficientState::w)
      .def_readonly("b", &CoefficientState::b)
      .def_readonly("u", &CoefficientState::u)
      .def_readonly("u_sparse", &CoefficientState::u_sparse)
      .def_readonly("nonzero_count", &CoefficientState::nonzero_count);

  py::class_<RefinementResult>(m, "RefinementResult")
      .def_readonly("refined_target", &RefinementResult::refined_target)
      .def_readonly("refined_aspect", &RefinementResult::refined_aspect)
      .def_readonly("initial_aspect", &RefinementResult::initial_aspect)
      .def_readonly("final_u_sparse", &RefinementResult::final_u_sparse)
      .def_readonly("nonzero_count", &RefinementResult::nonzero_count)
      .def_readonly("iterations", &RefinementResult::iterations)
      .def_readonly("converged", &RefinementResult::converged)
      .def_readonly("final_target_loss", &RefinementResult::final_target_loss)
      .def_readonly("final_aspect_loss", &RefinementResult::final_aspect_loss);

  m.def("step_threshold",
        [](const Vec& u) { return step_threshold(u); });
  m.def("coefficient_forward",
        [](const std::vector<Vec>& columns, Vec w, Vec b) {
          return coefficient_forward(matrix_from_columns(columns), std::move(w),
                                     std::move(b));
        });
  m.def("reconstruct_target", [](const std::vector<Vec>& columns, const Vec& u_sparse) {
    return reconstruct_target(matrix_from_columns(columns), u_sparse);
  });
  m.def(
      "target_loss",
      [](const Vec& t_ref, const Vec& t, const Vec& u_sparse, double lambda) {
        return target_loss(t_ref, t, u_sparse, lambda);
      },
      py::arg("t_refined"), py::arg("t"), py::arg("u_sparse"), py::arg("lambda_"));
  m.def(
      "refine_aspect_vector",
      [](const Vec& a, const std::vector<Vec>& columns, const Vec& u_sparse,
         double alpha) {
        return refine_aspect_vector(a, matrix_from_columns(columns), u_sparse, alpha);
      },
      py::arg("a"), py::arg("columns"), py::arg("u_sparse"), py::arg("alpha"));
  m.def(
      "aspect_loss",
      [](const Vec& a_ref, const Vec& t_ref, const std::optional<Vec>& t_irr,
         const Vec& u_sparse, double beta, double lambda) {
        return aspect_loss(a_ref, t_ref, t_irr, u_sparse, beta, lambda);
      },
      py::arg("a_refined"), py::arg("t_refined"), py::arg("t_irrelevant"),
      py::arg("u_sparse"), py::arg("beta"), py::arg("lambda_"));

  m.def("refine_pair",
        [](const Sentence& s, const EmbeddingTable& table, const std::string& target,
           const std::string& aspect, const RefinerConfig& cfg) {
          return refine_pair(s, table, target, aspect, cfg);
        });
  m.def("refine_sentence",
        [](const Sentence& s, const EmbeddingTable& table,
           const std::vector<std::string>& aspects, const RefinerConfig& cfg) {
          std::map<std::pair<std::string, std::string>, RefinementResult> results =
              refine_sentence(s, table, aspects, cfg);
          py::dict out;
          for (auto& [key, r] : results) {
            out[py::make_tuple(key.first, key.second)] = py::cast(std::move(r));
          }
          return out;
        });

  m.def("strict_accuracy", &strict_accuracy);
  m.def("macro_f1",
        [](const std::vector<std::tuple<std::string, bool, bool>>& rows,
           const std::vector<std::string>& labels) {
          std::vector<DetectionDecision> decisions;
          decisions.reserve(rows.size());
          for (const auto& [label, gold, pred] : rows) {
            decisions.push_back({label, gold, pred});
          }
          return macro_f1(decisions, labels);
        });
  m.def("auc", [](const std::vector<std::pair<double, bool>>& rows) {
    std::vector<ScoredLabel> scores;
    scores.reserve(rows.size());
    for (const auto& [score, positive] : rows) scores.push_back({score, positive});
    return auc(scores);
  });
  m.def("separation_statistic", &separation_statistic);

  m.def("run_selfchecks", [] {
    py::list out;
    for (const CheckResult& r : run_all_selfchecks()) {
      out.append(py::make_tuple(r.name, r.pass, r.details));
    }
    return out;
  });
}
