#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "morphlab/dataset.hpp"
#include "morphlab/ed_model.hpp"
#include "morphlab/errors.hpp"
#include "morphlab/experiments.hpp"
#include "morphlab/phonology.hpp"

namespace py = pybind11;
using namespace morph;

namespace {

const phon::Inventory& inv() { return phon::Inventory::english(); }
PhonemeString w(const std::string& s) { return phon::tokenize(s, inv()); }
std::string r(const PhonemeString& p) { return phon::render(p, inv()); }

data::Tag tag_or_throw(const std::string& name) {
  const auto t = data::parse_tag(name);
  if (!t) throw py::value_error("unknown tag '" + name + "'");
  return *t;
}

/// An encoder-decoder together with the task it was trained for.
struct Model {
  ed::EdModel model;
  data::Tag tag = data::Tag::kPast;
  bool multitask = false;
  std::vector<py::dict> history;

  ed::Symbols input(const std::string& lemma) const {
    const std::string t = data::tag_symbol(tag);
    return model.vocab().encode_input(w(lemma), multitask ? &t : nullptr);
  }

  static Model fit(const std::string& train_tsv, const std::string& tag, bool multitask, std::size_t embedding,
                   std::size_t hidden, std::size_t layers, double dropout, std::size_t epochs, std::size_t batch,
                   std::uint64_t seed) {
    const data::Tag t = tag_or_throw(tag);
    auto pairs = data::parse_tsv(train_tsv, inv());
    if (!multitask) pairs = data::filter_tag(pairs, t);
    const auto vocab = data::make_vocabulary(inv());
    Model m{ed::EdModel(vocab, {embedding, hidden, layers, dropout, seed}), t, multitask, {}};
    ed::TrainOptions o;
    o.epochs = epochs;
    o.batch = batch;
    o.seed = seed;
    o.track_accuracy = true;
    const auto stats = [&] {
      py::gil_scoped_release release;
      return ed::train(m.model, data::make_items(pairs, vocab, multitask, t), o);
    }();
    for (const auto& e : stats) {
      py::dict d;
      d["epoch"] = e.epoch;
      d["loss"] = e.mean_loss;
      d["accuracy"] = e.accuracy();
      d["regular"] = e.accuracy_regular();
      d["irregular"] = e.accuracy_irregular();
      m.history.push_back(d);
    }
    return m;
  }

  static Model load(const std::string& path) {
    const auto ck = nn::Checkpoint::load(path);
    Model m{ed::EdModel::from_checkpoint(ck), tag_or_throw(ck.meta.value("tag", "PST")), ck.meta.value("multitask", false),
            {}};
    return m;
  }

  void save(const std::string& path) const {
    model.to_checkpoint({{"tag", std::string(data::tag_name(tag))}, {"multitask", multitask}}).save(path);
  }

  std::vector<std::pair<std::string, double>> inflect(const std::string& lemma, std::size_t beam, std::size_t nbest,
                                                      std::size_t max_len) const {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& res : ed::beam_search(model, input(lemma), beam, max_len)) {
      if (out.size() == nbest) break;
      out.emplace_back(model.vocab().render(res.symbols), res.log_prob);
    }
    return out;
  }

  double log_prob(const std::string& lemma, const std::string& form) const {
    return ed::sequence_log_prob(model, input(lemma), model.vocab().encode_output(w(form)));
  }

  py::dict evaluate(const std::string& tsv, const std::string& train_tsv, std::size_t beam) const {
    const auto pairs = data::filter_tag(data::parse_tsv(tsv, inv()), tag);
    const auto lexicon = exp::build_lexicon(data::parse_tsv(train_tsv, inv()), tag);
    const auto rep = exp::accuracy(model, pairs, lexicon, RegularRules(inv()), {multitask, beam, 32});
    py::dict d;
    d["all"] = rep.all.accuracy();
    d["regular"] = rep.regular.accuracy();
    d["irregular"] = rep.irregular.accuracy();
    d["total"] = rep.all.total;
    py::dict errors;
    for (auto l : {exp::ErrorLabel::kBlend, exp::ErrorLabel::kOverregularization, exp::ErrorLabel::kOverirregularization,
                   exp::ErrorLabel::kOther}) {
      errors[py::str(std::string(exp::label_name(l)))] = rep.count(l);
    }
    d["errors"] = errors;
    return d;
  }
};

}  // namespace

PYBIND11_MODULE(_morphlab, m) {
  m.doc() = "Morphological transduction: phonology, regular rules, encoder-decoder and analysis tools";

  py::register_exception<Error>(m, "MorphError", PyExc_ValueError);

  m.def("tokenize", [](const std::string& s) {
    std::vector<std::string> out;
    for (auto p : w(s).ids) out.push_back(inv().symbol(p));
    return out;
  }, "Split an IPA string into phoneme symbols");
  m.def("regular_past", [](const std::string& s) { return r(RegularRules(inv()).past(w(s))); });
  m.def("third_singular", [](const std::string& s) { return r(RegularRules(inv()).third_singular(w(s))); });
  m.def("gerund", [](const std::string& s) { return r(RegularRules(inv()).gerund(w(s))); });
  m.def("wickelphones", [](const std::string& s) {
    std::vector<std::string> out;
    for (const auto& wp : phon::phi(w(s))) out.push_back(phon::render(wp, inv()));
    return out;
  }, "Wickelphones of a word, word boundaries written '#'");
  m.def("wickelfeatures", [](const std::string& s) {
    const auto v = phon::pi(w(s), phon::FeatureTable::english());
    std::vector<std::size_t> on;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v.bits()[i] > 0) on.push_back(i);
    }
    return on;
  }, "Indices of the active wickelfeatures of a word");
  m.attr("wickelfeature_count") = phon::FeatureTable::english().wickelfeature_count();

  m.def("synth_corpus", [](std::size_t types, std::size_t irregular, std::uint64_t seed) {
    return data::format_tsv(data::synth_corpus({types, irregular, seed}), inv());
  }, py::arg("types") = 4039, py::arg("irregular") = 168, py::arg("seed") = 0, "Synthetic corpus as TSV text");
  m.def("split", [](const std::string& tsv, std::uint64_t seed) {
    const auto s = data::split(data::parse_tsv(tsv, inv()), seed);
    return py::make_tuple(data::format_tsv(s.train, inv()), data::format_tsv(s.dev, inv()), data::format_tsv(s.test, inv()));
  }, py::arg("tsv"), py::arg("seed") = 0, "Lemma-disjoint 80/10/10 split of TSV text");

  m.def("classify_error", [](const std::string& stem, const std::string& gold, const std::string& predicted,
                             const std::vector<std::pair<std::string, std::string>>& irregulars) {
    IrregularLexicon lex;
    for (const auto& [s, f] : irregulars) lex.add(w(s), w(f));
    return std::string(exp::label_name(exp::classify_error(w(stem), w(gold), w(predicted), lex, RegularRules(inv()))));
  }, py::arg("stem"), py::arg("gold"), py::arg("predicted"), py::arg("irregulars") = std::vector<std::pair<std::string, std::string>>{});
  m.def("spearman", [](const std::vector<double>& xs, const std::vector<double>& ys) -> std::optional<double> {
    const auto c = exp::spearman_rho(xs, ys);
    if (c.degenerate) return std::nullopt;
    return c.rho;
  }, "Spearman rank correlation with average ranks for ties; None when a side is constant");
  m.def("chi_squared_2x2", [](std::size_t ca, std::size_t ta, std::size_t cb, std::size_t tb) {
    const auto c = exp::chi_squared_2x2(ca, ta, cb, tb);
    return py::make_tuple(c.statistic, c.p_value);
  }, "Pearson chi-square on correct/incorrect counts; returns (statistic, p)");
  m.def("micro_ushape", [](const std::vector<bool>& correct, const std::vector<std::size_t>& epochs) {
    const auto o = exp::detect_micro_ushape(correct, epochs);
    return py::make_tuple(o.micro_u, o.change_points);
  }, py::arg("correct"), py::arg("epochs") = std::vector<std::size_t>{});

  py::class_<Model>(m, "Model")
      .def_static("train", &Model::fit, py::arg("train_tsv"), py::arg("tag") = "PST", py::arg("multitask") = false,
                  py::arg("embedding") = 64, py::arg("hidden") = 64, py::arg("layers") = 2, py::arg("dropout") = 0.3,
                  py::arg("epochs") = 100, py::arg("batch") = 20, py::arg("seed") = 0)
      .def_static("load", &Model::load)
      .def("save", &Model::save)
      .def("inflect", &Model::inflect, py::arg("lemma"), py::arg("beam") = 12, py::arg("nbest") = 1,
           py::arg("max_len") = 32)
      .def("log_prob", &Model::log_prob)
      .def("evaluate", &Model::evaluate, py::arg("tsv"), py::arg("train_tsv"), py::arg("beam") = 12)
      .def_readonly("history", &Model::history)
      .def_property_readonly("multitask", [](const Model& m) { return m.multitask; })
      .def_property_readonly("tag", [](const Model& m) { return std::string(data::tag_name(m.tag)); });
}
