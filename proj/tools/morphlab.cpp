#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "morphlab/dataset.hpp"
#include "morphlab/ed_model.hpp"
#include "morphlab/errors.hpp"
#include "morphlab/experiments.hpp"
#include "morphlab/rm_model.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace morph;

namespace {

/// Bad invocation or unusable input files; exits with status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Options of one subcommand, recorded so they can be filled from a JSON
/// config and written back out as the resolved configuration.
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* option(const std::string& name, T& value, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + name, value, help)->capture_default_str();
    add_entry(name, value, opt);
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& value, const std::string& help) {
    CLI::Option* opt = app_->add_flag("--" + name, value, help);
    add_entry(name, value, opt);
    return opt;
  }

  /// Fills every option not given on the command line from `config`.
  void layer(const json& config) {
    for (auto& e : entries_) {
      if (e.opt->count() > 0 || !config.contains(e.name)) continue;
      try {
        e.set(config.at(e.name));
      } catch (const json::exception&) {
        throw UsageError("config key '" + e.name + "' has the wrong type");
      }
    }
  }

  json resolved() const {
    json out = json::object();
    for (const auto& e : entries_) out[e.name] = e.get();
    return out;
  }

  CLI::App* app() const { return app_; }

 private:
  struct Entry {
    std::string name;
    CLI::Option* opt;
    std::function<json()> get;
    std::function<void(const json&)> set;
  };

  template <typename T>
  void add_entry(const std::string& name, T& value, CLI::Option* opt) {
    entries_.push_back({name, opt, [&value] { return json(value); }, [&value](const json& j) { value = j.get<T>(); }});
  }

  CLI::App* app_;
  std::vector<Entry> entries_;
};

struct Global {
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
};

const phon::Inventory& inventory() { return phon::Inventory::english(); }

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw UsageError("missing required option --" + what);
  if (!fs::is_regular_file(path)) throw UsageError("no such file: " + path);
}

fs::path output_dir(const Global& g) {
  if (g.out.empty()) throw UsageError("missing required option --out");
  fs::create_directories(g.out);
  return fs::path(g.out);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << text;
}

void write_config(const fs::path& dir, const std::string& command, const Global& g, const Settings& s) {
  json cfg = s.resolved();
  cfg["command"] = command;
  cfg["seed"] = g.seed;
  cfg["out"] = g.out;
  write_text(dir / "config.json", cfg.dump(2) + "\n");
}

data::Tag parse_tag_or_throw(const std::string& name) {
  const auto t = data::parse_tag(name);
  if (!t) throw UsageError("unknown tag '" + name + "' (expected PST, GER, PTCP or 3SG)");
  return *t;
}

std::vector<data::InflectionPair> load_pairs(const std::string& path, const std::string& what) {
  require_file(path, what);
  return data::load_tsv(path, inventory());
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Checkpoints of either learner

struct LoadedModel {
  nn::Checkpoint ckpt;
  std::optional<ed::EdModel> ed;
  std::optional<rm::PatternAssociator> rm;
  data::Tag tag = data::Tag::kPast;
  bool multitask = false;
  IrregularLexicon lexicon;
};

json lexicon_json(const IrregularLexicon& lex) {
  json out = json::array();
  for (const auto& [stem, form] : lex.entries()) {
    out.push_back({phon::render(stem, inventory()), phon::render(form, inventory())});
  }
  return out;
}

LoadedModel load_model(const std::string& path) {
  require_file(path, "checkpoint");
  LoadedModel m;
  m.ckpt = nn::Checkpoint::load(path);
  const std::string kind = m.ckpt.meta.value("model", "");
  if (kind == "ed") {
    m.ed = ed::EdModel::from_checkpoint(m.ckpt);
  } else if (kind == "rm") {
    m.rm = rm::PatternAssociator::from_checkpoint(m.ckpt);
  } else {
    throw CheckpointError("checkpoint holds neither an ed nor an rm model");
  }
  m.tag = parse_tag_or_throw(m.ckpt.meta.value("tag", "PST"));
  m.multitask = m.ckpt.meta.value("multitask", false);
  for (const auto& e : m.ckpt.meta.value("irregulars", json::array())) {
    m.lexicon.add(phon::tokenize(e.at(0).get<std::string>(), inventory()),
                  phon::tokenize(e.at(1).get<std::string>(), inventory()));
  }
  return m;
}

struct Decoded {
  PhonemeString form;
  double log_prob = 0.0;
};

std::vector<Decoded> decode_lemma(const LoadedModel& m, const PhonemeString& lemma, std::size_t beam,
                                  std::size_t max_len) {
  std::vector<Decoded> out;
  if (m.ed) {
    const std::string tag = data::tag_symbol(m.tag);
    const auto input = m.ed->vocab().encode_input(lemma, m.multitask ? &tag : nullptr);
    for (const auto& r : ed::beam_search(*m.ed, input, beam, max_len)) {
      if (auto p = m.ed->vocab().to_phonemes(r.symbols)) out.push_back({*p, r.log_prob});
    }
  } else {
    const RegularRules rules(inventory());
    const auto cands = rm::generate_candidates(lemma, m.lexicon, rules);
    out.push_back({rm::rm_decode(*m.rm, lemma, cands, phon::FeatureTable::english()), 0.0});
  }
  return out;
}

exp::AccuracyReport evaluate(const LoadedModel& m, std::span<const data::InflectionPair> pairs,
                             const IrregularLexicon& lexicon, std::size_t beam, std::size_t max_len) {
  const RegularRules rules(inventory());
  if (m.ed) return exp::accuracy(*m.ed, pairs, lexicon, rules, {m.multitask, beam, max_len});
  std::vector<std::optional<PhonemeString>> preds;
  for (const auto& p : pairs) preds.push_back(decode_lemma(m, p.lemma, beam, max_len).front().form);
  return exp::score(pairs, preds, lexicon, rules);
}

// ---------------------------------------------------------------------------
// Subcommands

struct SynthArgs {
  std::size_t types = 4039;
  std::size_t irregular = 168;
};

int run_synth(const Global& g, const SynthArgs& a, const Settings& s) {
  const auto dir = output_dir(g);
  const auto corpus = data::synth_corpus({a.types, a.irregular, g.seed});
  data::save_tsv(dir / "corpus.tsv", corpus, inventory());
  write_config(dir, "synth", g, s);
  std::size_t irregular = 0;
  for (const auto& p : corpus) irregular += p.tag == data::Tag::kPast && !p.regular;
  std::cout << "wrote " << corpus.size() << " pairs (" << a.types << " types, " << irregular << " irregular) to "
            << (dir / "corpus.tsv").string() << "\n";
  return 0;
}

struct SplitArgs {
  std::string data;
  double train = 0.8, dev = 0.1, test = 0.1;
};

int run_split(const Global& g, const SplitArgs& a, const Settings& s) {
  const auto pairs = load_pairs(a.data, "data");
  const auto dir = output_dir(g);
  data::SplitCorpus sc;
  try {
    sc = data::split(pairs, g.seed, {a.train, a.dev, a.test});
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  data::save_tsv(dir / "train.tsv", sc.train, inventory());
  data::save_tsv(dir / "dev.tsv", sc.dev, inventory());
  data::save_tsv(dir / "test.tsv", sc.test, inventory());
  write_config(dir, "split", g, s);
  std::cout << "lemmas train " << data::lemmas(sc.train).size() << " dev " << data::lemmas(sc.dev).size() << " test "
            << data::lemmas(sc.test).size() << "\n";
  return 0;
}

struct TrainArgs {
  std::string train;
  std::string model = "ed";
  std::string name;
  std::string tag = "PST";
  bool multitask = false;
  bool test_scale = false;
  std::size_t emb = 300, hidden = 100, layers = 2;
  double dropout = 0.3;
  std::size_t epochs = 100, batch = 20;
  double lr = 1.0;
  bool decay = false;
  std::size_t snapshot_every = 0;
  std::size_t max_len = 32;
};

std::string snapshots_tsv(const std::vector<ed::EpochStats>& history, std::span<const data::InflectionPair> pairs,
                          const ed::Vocabulary& vocab) {
  std::string out = "epoch\tlemma\ttag\tgold\tpredicted\tregularity\n";
  for (const auto& e : history) {
    if (e.predictions.size() != pairs.size()) continue;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& p = pairs[i];
      const auto pred = vocab.to_phonemes(e.predictions[i]);
      out += std::to_string(e.epoch) + "\t" + phon::render(p.lemma, inventory()) + "\t" +
             std::string(data::tag_name(p.tag)) + "\t" + phon::render(p.form, inventory()) + "\t" +
             (pred ? phon::render(*pred, inventory()) : vocab.render(e.predictions[i])) + "\t" +
             (p.regular ? "regular" : "irregular") + "\n";
    }
  }
  return out;
}

int run_train(const Global& g, TrainArgs& a, const Settings& s) {
  if (a.model != "ed" && a.model != "rm") throw UsageError("--model must be ed or rm");
  const data::Tag tag = parse_tag_or_throw(a.tag);
  auto pairs = load_pairs(a.train, "train");
  const auto dir = output_dir(g);
  if (a.name.empty()) a.name = a.model == "rm" ? "rm" : (a.multitask ? "multi-task" : "single-task");
  if (a.test_scale) a.emb = a.hidden = 64;
  if (!a.multitask || a.model == "rm") pairs = data::filter_tag(pairs, tag);
  if (pairs.empty()) throw UsageError("no training pairs for tag " + a.tag);

  const IrregularLexicon lexicon = exp::build_lexicon(pairs, tag);
  json meta = {{"tag", a.tag}, {"multitask", a.multitask && a.model == "ed"}, {"name", a.name},
               {"irregulars", lexicon_json(lexicon)}};

  if (a.model == "rm") {
    const auto& table = phon::FeatureTable::english();
    std::vector<phon::WickelfeatureVector> xs, ys;
    for (const auto& p : pairs) {
      xs.push_back(phon::pi(p.lemma, table));
      ys.push_back(phon::pi(p.form, table));
    }
    rm::RmConfig c;
    c.learning_rate = a.lr;
    c.decay = a.decay;
    c.seed = g.seed;
    rm::PatternAssociator model(table.wickelfeature_count(), c);
    std::string csv = "condition,epoch,loss,updates\n";
    for (const auto& e : rm::rm_train(model, xs, ys, a.epochs, g.seed)) {
      csv += a.name + "," + std::to_string(e.epoch) + "," + fmt("%.6f", e.mean_loss) + "," +
             std::to_string(e.updates) + "\n";
      std::cerr << "epoch " << e.epoch << " loss " << fmt("%.4f", e.mean_loss) << "\n";
    }
    model.to_checkpoint(meta).save(dir / "model.ck");
    write_text(dir / "curves.csv", csv);
    write_config(dir, "train", g, s);
    return 0;
  }

  ed::EdConfig c;
  c.embedding = a.emb;
  c.hidden = a.hidden;
  c.layers = a.layers;
  c.dropout = a.dropout;
  c.seed = g.seed;
  if (c.embedding == 0 || c.hidden == 0 || c.layers == 0) throw UsageError("--emb, --hidden and --layers must be positive");
  if (c.dropout < 0.0 || c.dropout >= 1.0) throw UsageError("--dropout must be in [0, 1)");
  if (a.batch == 0) throw UsageError("--batch must be positive");
  const auto vocab = data::make_vocabulary(inventory());
  ed::EdModel model(vocab, c);
  const auto items = data::make_items(pairs, vocab, a.multitask, tag);

  ed::TrainOptions o;
  o.epochs = a.epochs;
  o.batch = a.batch;
  o.optimizer.lr = a.lr;
  o.seed = g.seed;
  o.track_accuracy = true;
  o.snapshot_every = a.snapshot_every;
  o.max_output_len = a.max_len;
  o.on_epoch = [](const ed::EpochStats& e) {
    std::cerr << "epoch " << e.epoch << " loss " << fmt("%.4f", e.mean_loss) << " acc " << fmt("%.4f", e.accuracy())
              << "\n";
  };
  const auto history = ed::train(model, items, o);

  model.to_checkpoint(meta).save(dir / "model.ck");
  const exp::Condition cond{a.name, history};
  write_text(dir / "curves.csv", exp::curves_csv(std::span(&cond, 1)));
  if (a.snapshot_every > 0) write_text(dir / "snapshots.tsv", snapshots_tsv(history, pairs, vocab));
  write_config(dir, "train", g, s);
  return 0;
}

struct EvalArgs {
  std::string checkpoint, train, dev, test;
  std::size_t beam = 12, max_len = 32;
  bool errors = false;
};

json stratum_json(const exp::Stratum& s) {
  return {{"correct", s.correct}, {"total", s.total}, {"accuracy", s.accuracy()}};
}

int run_eval(const Global& g, const EvalArgs& a, const Settings& s) {
  if (a.train.empty() && a.dev.empty() && a.test.empty()) throw UsageError("give at least one of --train, --dev, --test");
  const LoadedModel m = load_model(a.checkpoint);
  if (a.beam == 0) throw UsageError("--beam must be positive");
  std::map<std::string, std::vector<data::InflectionPair>> splits;
  for (const auto& [name, path] : {std::pair{"train", a.train}, {"dev", a.dev}, {"test", a.test}}) {
    if (!path.empty()) splits[name] = data::filter_tag(load_pairs(path, name), m.tag);
  }
  const auto dir = output_dir(g);
  const IrregularLexicon lexicon = splits.count("train") ? exp::build_lexicon(splits["train"], m.tag) : m.lexicon;

  exp::SplitReports reports;
  json report = json::object();
  for (auto& [name, pairs] : splits) {
    auto r = evaluate(m, pairs, lexicon, a.beam, a.max_len);
    report[name] = {{"all", stratum_json(r.all)}, {"regular", stratum_json(r.regular)},
                    {"irregular", stratum_json(r.irregular)}};
    json labels = json::object();
    for (auto l : {exp::ErrorLabel::kBlend, exp::ErrorLabel::kOverregularization,
                   exp::ErrorLabel::kOverirregularization, exp::ErrorLabel::kOther}) {
      labels[std::string(exp::label_name(l))] = {{"regular", r.count(l, true)}, {"irregular", r.count(l, false)}};
    }
    report[name]["errors"] = labels;
    if (a.errors) write_text(dir / ("errors_" + name + ".tsv"), exp::errors_tsv(r, inventory()));
    (name == "train" ? reports.train : name == "dev" ? reports.dev : reports.test) = std::move(r);
  }

  std::vector<exp::TableRow> rows = exp::reference_rows();
  for (auto& r : rows) r.name += " (reference)";
  rows.push_back(exp::make_row(m.ckpt.meta.value("name", "model"), reports));
  std::vector<exp::SplitReports> row_reports(rows.size());
  row_reports.back() = reports;
  const std::string table = exp::format_table(rows, row_reports);
  write_text(dir / "report.txt", table);
  write_text(dir / "report.json", report.dump(2) + "\n");
  write_config(dir, "eval", g, s);
  std::cout << table;
  return 0;
}

struct CurvesArgs {
  std::vector<std::string> runs;
  double threshold = 0.9;
};

int run_curves(const Global& g, const CurvesArgs& a, const Settings& s) {
  if (a.runs.empty()) throw UsageError("give at least one --run directory");
  const std::string header = "condition,epoch,loss,accuracy,regular,irregular";
  std::string merged = header + "\n";
  json summary = json::object();
  for (const auto& run : a.runs) {
    const auto path = (fs::path(run) / "curves.csv").string();
    require_file(path, "run");
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    if (line != header) throw UsageError(path + " is not a learning-curve file");
    std::optional<std::size_t> reached;
    std::string name;
    std::size_t rows = 0;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      merged += line + "\n";
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() != 6) throw UsageError(path + ": malformed row");
      name = cells[0];
      const std::size_t epoch = std::stoul(cells[1]);
      if (!reached && epoch > 0 && std::stod(cells[3]) >= a.threshold) reached = epoch;
      ++rows;
    }
    if (rows == 0) throw UsageError(path + " has no epochs");
    summary[name] = reached ? json(*reached) : json(nullptr);
  }
  const auto dir = output_dir(g);
  write_text(dir / "curves.csv", merged);
  write_text(dir / "summary.json", json{{"threshold", a.threshold}, {"epochs_to_threshold", summary}}.dump(2) + "\n");
  write_config(dir, "curves", g, s);
  for (const auto& [name, e] : summary.items()) {
    std::cout << name << ": " << (e.is_null() ? std::string("never") : std::to_string(e.get<std::size_t>()))
              << " epochs to " << a.threshold << "\n";
  }
  return 0;
}

struct UshapeArgs {
  std::string snapshots;
  bool all = false;
};

int run_ushape(const Global& g, const UshapeArgs& a, const Settings& s) {
  require_file(a.snapshots, "snapshots");
  std::ifstream f(a.snapshots);
  std::string line;
  std::getline(f, line);
  if (line != "epoch\tlemma\ttag\tgold\tpredicted\tregularity") throw UsageError(a.snapshots + " is not a snapshot file");

  struct History {
    std::string gold, regularity;
    std::vector<std::size_t> epochs;
    std::vector<std::string> outputs;
  };
  std::map<std::pair<std::string, std::string>, History> verbs;
  std::vector<std::pair<std::string, std::string>> order;
  std::size_t row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    if (cells.size() != 6) throw ParseError(row, "expected 6 columns");
    const auto key = std::make_pair(cells[1], cells[2]);
    auto [it, fresh] = verbs.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.gold = cells[3];
    it->second.regularity = cells[5];
    it->second.epochs.push_back(std::stoul(cells[0]));
    it->second.outputs.push_back(cells[4]);
  }

  std::string out = "lemma\ttag\tregularity\tmicro_u\tchange_points\n";
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> irregular_by_epoch;
  std::size_t flagged = 0, irregular = 0;
  for (const auto& key : order) {
    const History& h = verbs[key];
    std::vector<bool> correct;
    for (std::size_t i = 0; i < h.outputs.size(); ++i) {
      correct.push_back(h.outputs[i] == h.gold);
      if (h.regularity == "irregular") {
        auto& [c, t] = irregular_by_epoch[h.epochs[i]];
        c += correct.back();
        ++t;
      }
    }
    if (correct.size() < 2) continue;
    const auto osc = exp::detect_micro_ushape(correct, h.epochs);
    if (h.regularity == "irregular") {
      ++irregular;
      flagged += osc.micro_u;
    }
    if (!osc.micro_u && !a.all) continue;
    std::string points;
    for (std::size_t i = 0; i < h.epochs.size(); ++i) {
      if (i == 0 || h.outputs[i] != h.outputs[i - 1]) {
        if (!points.empty()) points += ' ';
        points += std::to_string(h.epochs[i]) + ":" + h.outputs[i];
      }
    }
    out += key.first + "\t" + key.second + "\t" + h.regularity + "\t" + (osc.micro_u ? "yes" : "no") + "\t" + points + "\n";
  }

  json summary = {{"irregular_verbs", irregular}, {"irregular_micro_u", flagged}};
  if (!irregular_by_epoch.empty()) {
    std::vector<double> acc;
    std::vector<std::size_t> epochs;
    for (const auto& [e, ct] : irregular_by_epoch) {
      epochs.push_back(e);
      acc.push_back(static_cast<double>(ct.first) / static_cast<double>(ct.second));
    }
    const auto macro = exp::macro_ushape(acc, epochs);
    summary["macro"] = {{"peak_epoch", macro.peak_epoch}, {"peak", macro.peak}, {"trough_after_peak", macro.trough_after_peak},
                        {"dip", macro.dip}, {"monotone_prefix", macro.monotone_prefix}};
  }
  const auto dir = output_dir(g);
  write_text(dir / "ushape.tsv", out);
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  write_config(dir, "ushape", g, s);
  std::cout << flagged << " of " << irregular << " irregular verbs show a micro U-shape\n";
  return 0;
}

struct WugArgs {
  std::string checkpoint, items, inventory;
  bool pairwise = false;
};

json correlation_json(const exp::Correlation& c, std::size_t n) {
  return {{"rho", c.degenerate ? json(nullptr) : json(c.rho)}, {"degenerate", c.degenerate}, {"n", n}};
}

/// Wug items in their own transcription, mapped symbol by symbol onto the
/// model's inventory.
std::vector<exp::WugItem> load_foreign_wug(const std::string& path, const std::string& inventory_path) {
  require_file(inventory_path, "inventory");
  const auto foreign = phon::Inventory::load(inventory_path);
  auto items = exp::load_wug_tsv(path, foreign);
  auto remap = [&](PhonemeString& s) {
    for (auto& id : s.ids) id = inventory().at(foreign.symbol(id));
  };
  for (auto& it : items) {
    remap(it.stem);
    remap(it.regular_form);
    remap(it.irregular_form);
  }
  return items;
}

int run_wug(const Global& g, const WugArgs& a, const Settings& s) {
  const LoadedModel m = load_model(a.checkpoint);
  if (!m.ed) throw UsageError("the wug test needs an ed checkpoint");
  require_file(a.items, "items");
  auto items = a.inventory.empty() ? exp::load_wug_tsv(a.items, inventory()) : load_foreign_wug(a.items, a.inventory);
  const auto r = exp::wug_eval(*m.ed, items, m.multitask, a.pairwise);
  const auto dir = output_dir(g);
  std::string tsv = "stem\tregular_form\tirregular_form\thuman_regular\thuman_irregular\tmodel_regular\tmodel_irregular\n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    tsv += phon::render(it.stem, inventory()) + "\t" + phon::render(it.regular_form, inventory()) + "\t" +
           phon::render(it.irregular_form, inventory()) + "\t" + fmt("%.6g", it.human_regular) + "\t" +
           fmt("%.6g", it.human_irregular) + "\t" + fmt("%.6g", r.model_regular[i]) + "\t" +
           fmt("%.6g", r.model_irregular[i]) + "\n";
  }
  write_text(dir / "wug.tsv", tsv);
  const json summary = {{"regular", correlation_json(r.regular, items.size())},
                        {"irregular", correlation_json(r.irregular, items.size())}};
  write_text(dir / "wug.json", summary.dump(2) + "\n");
  write_config(dir, "wug", g, s);
  for (const auto& [name, c] : {std::pair{"regular", r.regular}, {"irregular", r.irregular}}) {
    std::cout << name << ": rho " << (c.degenerate ? std::string("undefined (degenerate)") : fmt("%.4f", c.rho)) << "\n";
  }
  return 0;
}

struct DecodeArgs {
  std::string checkpoint, inputs;
  std::vector<std::string> input;
  std::size_t beam = 12, nbest = 1, max_len = 32, samples = 0;
};

int run_decode(const Global& g, const DecodeArgs& a, const Settings& s) {
  const LoadedModel m = load_model(a.checkpoint);
  if (a.beam == 0 || a.nbest == 0) throw UsageError("--beam and --nbest must be positive");
  std::vector<std::string> lemmas = a.input;
  if (!a.inputs.empty()) {
    require_file(a.inputs, "inputs");
    std::ifstream f(a.inputs);
    std::string line;
    while (std::getline(f, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] != '#') lemmas.push_back(line);
    }
  }
  if (lemmas.empty()) throw UsageError("give --input or --inputs");
  if (a.samples > 0 && !m.ed) throw UsageError("sampling needs an ed checkpoint");

  std::string out = "lemma\trank\tform\tlog_prob\n";
  nn::Rng rng(nn::derive_seed(g.seed, "cli-sample"));
  for (const auto& raw : lemmas) {
    const PhonemeString lemma = phon::tokenize(raw, inventory());
    if (a.samples > 0) {
      const std::string tag = data::tag_symbol(m.tag);
      const auto input = m.ed->vocab().encode_input(lemma, m.multitask ? &tag : nullptr);
      for (std::size_t i = 0; i < a.samples; ++i) {
        const auto r = ed::sample(*m.ed, input, rng, a.max_len);
        out += raw + "\t" + std::to_string(i + 1) + "\t" + m.ed->vocab().render(r.symbols) + "\t" +
               fmt("%.6f", r.log_prob) + "\n";
      }
      continue;
    }
    const auto results = decode_lemma(m, lemma, std::max(a.beam, a.nbest), a.max_len);
    for (std::size_t i = 0; i < results.size() && i < a.nbest; ++i) {
      out += raw + "\t" + std::to_string(i + 1) + "\t" + phon::render(results[i].form, inventory()) + "\t" +
             (m.ed ? fmt("%.6f", results[i].log_prob) : std::string("-")) + "\n";
    }
  }
  std::cout << out;
  if (!g.out.empty()) {
    const auto dir = output_dir(g);
    write_text(dir / "decode.tsv", out);
    write_config(dir, "decode", g, s);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morphological transduction laboratory: wickelfeature pattern associator and attention encoder-decoder"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--out", g.out, "Output directory; nothing is written elsewhere");
  app.add_option("--config", g.config, "JSON config; flags given on the command line take precedence");
  app.fallthrough();

  SynthArgs synth;
  Settings synth_s(app.add_subcommand("synth", "Generate a synthetic verb corpus"));
  synth_s.option("types", synth.types, "Number of verb types");
  synth_s.option("irregular", synth.irregular, "Number of irregular verb types");

  SplitArgs split;
  Settings split_s(app.add_subcommand("split", "Split a corpus 80/10/10 by lemma"));
  split_s.option("data", split.data, "Corpus TSV");
  split_s.option("train-ratio", split.train, "Fraction of lemmas for training");
  split_s.option("dev-ratio", split.dev, "Fraction of lemmas for development");
  split_s.option("test-ratio", split.test, "Fraction of lemmas for testing");

  TrainArgs train;
  Settings train_s(app.add_subcommand("train", "Train a model and record learning curves"));
  train_s.option("train", train.train, "Training TSV");
  train_s.option("model", train.model, "Learner: ed or rm")->check(CLI::IsMember({"ed", "rm"}));
  train_s.option("name", train.name, "Condition name used in curves");
  train_s.option("tag", train.tag, "Target tag for single-task training");
  train_s.flag("multitask", train.multitask, "Train on all four tags with tag symbols (ed only)");
  train_s.flag("test-scale", train.test_scale, "Use 64-unit embeddings and hidden layers");
  train_s.option("emb", train.emb, "Embedding size");
  train_s.option("hidden", train.hidden, "Hidden units per LSTM direction");
  train_s.option("layers", train.layers, "LSTM layers in encoder and decoder");
  train_s.option("dropout", train.dropout, "Dropout between stacked layers");
  train_s.option("epochs", train.epochs, "Training epochs");
  train_s.option("batch", train.batch, "Minibatch size");
  train_s.option("lr", train.lr, "Adadelta rate (ed) or perceptron rate (rm)");
  train_s.flag("decay", train.decay, "Scale the rm rate by 1/epoch");
  train_s.option("snapshot-every", train.snapshot_every, "Record every prediction each N epochs (0: never)");
  train_s.option("max-len", train.max_len, "Decoder step limit when scoring accuracy");

  EvalArgs eval;
  Settings eval_s(app.add_subcommand("eval", "Score a checkpoint on train/dev/test splits"));
  eval_s.option("checkpoint", eval.checkpoint, "Model checkpoint");
  eval_s.option("train", eval.train, "Training split TSV (also supplies the irregular lexicon)");
  eval_s.option("dev", eval.dev, "Development split TSV");
  eval_s.option("test", eval.test, "Test split TSV");
  eval_s.option("beam", eval.beam, "Beam width");
  eval_s.option("max-len", eval.max_len, "Decoder step limit");
  eval_s.flag("errors", eval.errors, "Write labelled error lists");

  CurvesArgs curves;
  Settings curves_s(app.add_subcommand("curves", "Merge learning curves of several training runs"));
  curves_s.option("run", curves.runs, "Training output directory (repeatable)");
  curves_s.option("threshold", curves.threshold, "Accuracy for the epochs-to-threshold summary");

  UshapeArgs ushape;
  Settings ushape_s(app.add_subcommand("ushape", "Find oscillating verbs in prediction snapshots"));
  ushape_s.option("snapshots", ushape.snapshots, "snapshots.tsv written by train --snapshot-every");
  ushape_s.flag("all", ushape.all, "List every verb, not only oscillating ones");

  WugArgs wug;
  Settings wug_s(app.add_subcommand("wug", "Correlate model probabilities with human wug-test data"));
  wug_s.option("checkpoint", wug.checkpoint, "ed checkpoint");
  wug_s.option("items", wug.items, "Wug TSV: stem, regular form, irregular form, human p_reg, human p_irr");
  wug_s.option("inventory", wug.inventory, "Inventory file for the items' transcription (default: the model's)");
  wug_s.flag("pairwise", wug.pairwise, "Normalize each regular/irregular pair to sum to one");

  DecodeArgs decode;
  Settings decode_s(app.add_subcommand("decode", "Inflect lemmas with a checkpoint"));
  decode_s.option("checkpoint", decode.checkpoint, "Model checkpoint");
  decode_s.option("input", decode.input, "Lemma in IPA (repeatable)");
  decode_s.option("inputs", decode.inputs, "File with one lemma per line");
  decode_s.option("beam", decode.beam, "Beam width");
  decode_s.option("nbest", decode.nbest, "Hypotheses to print per lemma");
  decode_s.option("max-len", decode.max_len, "Decoder step limit");
  decode_s.option("samples", decode.samples, "Draw this many ancestral samples instead of beam search");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::vector<std::pair<Settings*, std::function<int()>>> commands = {
      {&synth_s, [&] { return run_synth(g, synth, synth_s); }},
      {&split_s, [&] { return run_split(g, split, split_s); }},
      {&train_s, [&] { return run_train(g, train, train_s); }},
      {&eval_s, [&] { return run_eval(g, eval, eval_s); }},
      {&curves_s, [&] { return run_curves(g, curves, curves_s); }},
      {&ushape_s, [&] { return run_ushape(g, ushape, ushape_s); }},
      {&wug_s, [&] { return run_wug(g, wug, wug_s); }},
      {&decode_s, [&] { return run_decode(g, decode, decode_s); }},
  };

  try {
    for (const auto& [settings, run] : commands) {
      if (!settings->app()->parsed()) continue;
      if (!g.config.empty()) {
        require_file(g.config, "config");
        std::ifstream f(g.config);
        json cfg;
        try {
          cfg = json::parse(f);
        } catch (const json::exception& e) {
          throw UsageError("cannot parse " + g.config + ": " + e.what());
        }
        if (!cfg.is_object()) throw UsageError(g.config + " must hold a JSON object");
        settings->layer(cfg);
        if (cfg.contains("seed") && app.get_option("--seed")->count() == 0) g.seed = cfg["seed"].get<std::uint64_t>();
        if (cfg.contains("out") && app.get_option("--out")->count() == 0) g.out = cfg["out"].get<std::string>();
      }
      return run();
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownSymbol& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
