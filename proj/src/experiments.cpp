#include "morphlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "morphlab/errors.hpp"

namespace morph::exp {

PhonemeString regular_past(const PhonemeString& stem) {
  static const RegularRules rules(phon::Inventory::english());
  return rules.past(stem);
}

// ---------------------------------------------------------------------------
// Error taxonomy

std::string_view label_name(ErrorLabel label) {
  switch (label) {
    case ErrorLabel::kCorrect:
      return "correct";
    case ErrorLabel::kBlend:
      return "blend";
    case ErrorLabel::kOverregularization:
      return "overregularization";
    case ErrorLabel::kOverirregularization:
      return "overirregularization";
    case ErrorLabel::kOther:
      return "other";
  }
  return "other";
}

namespace {

bool ends_with(const PhonemeString& w, const PhonemeString& suffix) {
  return w.size() >= suffix.size() && std::equal(suffix.ids.rbegin(), suffix.ids.rend(), w.ids.rbegin());
}

bool contains(const std::vector<PhonemeString>& words, const PhonemeString& w) {
  return std::find(words.begin(), words.end(), w) != words.end();
}

}  // namespace

ErrorLabel classify_error(const PhonemeString& stem, const PhonemeString& gold, const PhonemeString& predicted,
                          const IrregularLexicon& lexicon, const RegularRules& rules) {
  if (predicted == gold) return ErrorLabel::kCorrect;
  const PhonemeString regular = rules.past(stem);
  const std::vector<PhonemeString> variants = lexicon.irregular_variants(stem);

  for (const auto& suffix : rules.past_suffixes()) {
    if (!ends_with(predicted, suffix)) continue;
    const PhonemeString base{{predicted.ids.begin(), predicted.ids.end() - static_cast<std::ptrdiff_t>(suffix.size())}};
    if (base.empty() || base == stem) continue;
    if ((base == gold && gold != regular) || contains(variants, base)) return ErrorLabel::kBlend;
  }
  if (predicted == regular && gold != regular) return ErrorLabel::kOverregularization;
  if (gold == regular && contains(variants, predicted)) return ErrorLabel::kOverirregularization;
  return ErrorLabel::kOther;
}

IrregularLexicon build_lexicon(std::span<const data::InflectionPair> pairs, data::Tag tag) {
  IrregularLexicon lex;
  for (const auto& p : pairs) {
    if (p.tag == tag && !p.regular) lex.add(p.lemma, p.form);
  }
  return lex;
}

// ---------------------------------------------------------------------------
// Accuracy

std::size_t AccuracyReport::count(ErrorLabel label, std::optional<bool> regular) const {
  return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [&](const ItemResult& r) {
    return r.label == label && (!regular || r.pair.regular == *regular);
  }));
}

AccuracyReport score(std::span<const data::InflectionPair> pairs,
                     std::span<const std::optional<PhonemeString>> predictions, const IrregularLexicon& lexicon,
                     const RegularRules& rules) {
  if (pairs.size() != predictions.size()) {
    throw LengthMismatch("score: " + std::to_string(pairs.size()) + " pairs but " +
                         std::to_string(predictions.size()) + " predictions");
  }
  AccuracyReport report;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ItemResult r;
    r.pair = pairs[i];
    r.predicted = predictions[i];
    r.correct = r.predicted && *r.predicted == r.pair.form;
    r.label = r.predicted ? classify_error(r.pair.lemma, r.pair.form, *r.predicted, lexicon, rules) : ErrorLabel::kOther;
    Stratum& s = r.pair.regular ? report.regular : report.irregular;
    ++s.total;
    ++report.all.total;
    s.correct += r.correct;
    report.all.correct += r.correct;
    report.items.push_back(std::move(r));
  }
  return report;
}

AccuracyReport accuracy(const ed::EdModel& model, std::span<const data::InflectionPair> pairs,
                        const IrregularLexicon& lexicon, const RegularRules& rules, const DecodeOptions& options) {
  std::vector<std::optional<PhonemeString>> predictions;
  predictions.reserve(pairs.size());
  for (const auto& p : pairs) {
    const ed::TrainItem item = data::augment_multitask(p, model.vocab(), options.multitask);
    const auto beams = ed::beam_search(model, item.input, options.beam, options.max_len);
    if (beams.empty() || beams.front().truncated) {
      predictions.emplace_back();
    } else {
      predictions.push_back(model.vocab().to_phonemes(beams.front().symbols));
    }
  }
  return score(pairs, predictions, lexicon, rules);
}

std::string errors_tsv(const AccuracyReport& report, const phon::Inventory& inventory, bool include_correct) {
  std::string out = "lemma\tgold\tpredicted\ttag\tregularity\tlabel\n";
  for (const auto& r : report.items) {
    if (r.correct && !include_correct) continue;
    out += phon::render(r.pair.lemma, inventory) + '\t' + phon::render(r.pair.form, inventory) + '\t' +
           (r.predicted ? phon::render(*r.predicted, inventory) : std::string("<none>")) + '\t' +
           std::string(data::tag_name(r.pair.tag)) + '\t' + (r.pair.regular ? "regular" : "irregular") + '\t' +
           std::string(label_name(r.label)) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// U-shapes

Oscillation detect_micro_ushape(const std::vector<bool>& correct, std::span<const std::size_t> epochs) {
  if (correct.size() < 2) throw Error("micro U-shape detection needs at least two epochs");
  if (!epochs.empty() && epochs.size() != correct.size()) {
    throw LengthMismatch("detect_micro_ushape: " + std::to_string(correct.size()) + " statuses but " +
                         std::to_string(epochs.size()) + " epochs");
  }
  Oscillation out;
  bool seen_correct = false, dropped = false;
  for (std::size_t i = 0; i < correct.size(); ++i) {
    if (i > 0 && correct[i] != correct[i - 1]) out.change_points.push_back(epochs.empty() ? i + 1 : epochs[i]);
    if (correct[i]) {
      if (dropped) out.micro_u = true;
      seen_correct = true;
    } else if (seen_correct) {
      dropped = true;
    }
  }
  return out;
}

std::vector<OutputChange> output_change_points(std::span<const ed::Symbols> outputs,
                                               std::span<const std::size_t> epochs) {
  if (outputs.size() != epochs.size()) {
    throw LengthMismatch("output_change_points: " + std::to_string(outputs.size()) + " outputs but " +
                         std::to_string(epochs.size()) + " epochs");
  }
  std::vector<OutputChange> out;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (i == 0 || outputs[i] != outputs[i - 1]) out.push_back({epochs[i], outputs[i]});
  }
  return out;
}

MacroUShape macro_ushape(std::span<const double> accuracy, std::span<const std::size_t> epochs) {
  if (accuracy.empty()) throw Error("macro U-shape analysis needs at least one epoch");
  if (accuracy.size() != epochs.size()) throw LengthMismatch("macro_ushape: accuracy and epochs differ in length");
  MacroUShape out;
  const auto peak = static_cast<std::size_t>(std::max_element(accuracy.begin(), accuracy.end()) - accuracy.begin());
  out.peak_epoch = epochs[peak];
  out.peak = accuracy[peak];
  out.trough_after_peak = out.peak;
  for (std::size_t i = peak + 1; i < accuracy.size(); ++i) out.trough_after_peak = std::min(out.trough_after_peak, accuracy[i]);
  out.dip = out.peak - out.trough_after_peak;
  out.monotone_prefix = 1;
  while (out.monotone_prefix < accuracy.size() && accuracy[out.monotone_prefix] >= accuracy[out.monotone_prefix - 1]) {
    ++out.monotone_prefix;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

Correlation spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw LengthMismatch("spearman_rho: lengths " + std::to_string(xs.size()) + " and " + std::to_string(ys.size()));
  }
  if (xs.size() < 3) throw Error("spearman_rho needs at least three observations");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return {std::numeric_limits<double>::quiet_NaN(), true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw Error("gamma_q: need a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 10000;
  if (x < a + 1.0) {
    // Series for the lower function P, then Q = 1 - P.
    double ap = a, term = 1.0 / a, sum = term;
    for (int n = 0; n < kMaxIter; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return std::max(0.0, 1.0 - sum * std::exp(log_prefix));
  }
  // Continued fraction for Q (modified Lentz).
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / kTiny, d = 1.0 / b, h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefix) * h;
}

double chi_squared_sf(double x, double dof) { return x <= 0.0 ? 1.0 : gamma_q(dof / 2.0, x / 2.0); }

ChiSquared chi_squared_2x2(std::size_t correct_a, std::size_t total_a, std::size_t correct_b, std::size_t total_b) {
  if (total_a == 0 || total_b == 0) throw DegenerateTable("chi_squared_2x2: a system has no items");
  if (correct_a > total_a || correct_b > total_b) throw Error("chi_squared_2x2: correct exceeds total");
  const double a = static_cast<double>(correct_a), b = static_cast<double>(total_a - correct_a);
  const double c = static_cast<double>(correct_b), d = static_cast<double>(total_b - correct_b);
  const double n = a + b + c + d;
  if (a + c == 0.0 || b + d == 0.0) throw DegenerateTable("chi_squared_2x2: a column marginal is zero");
  const double num = (a * d - b * c);
  const double stat = n * num * num / ((a + b) * (c + d) * (a + c) * (b + d));
  return {stat, chi_squared_sf(stat, 1.0)};
}

// ---------------------------------------------------------------------------
// Wug test

std::vector<WugItem> parse_wug_tsv(std::string_view text, const phon::Inventory& inventory) {
  std::vector<WugItem> out;
  std::size_t row = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++row;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss{std::string(line)};
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    if (cells.size() != 5) throw ParseError(row, "expected 5 tab-separated columns, found " + std::to_string(cells.size()));
    WugItem item;
    try {
      item.stem = phon::tokenize(cells[0], inventory);
      item.regular_form = phon::tokenize(cells[1], inventory);
      item.irregular_form = phon::tokenize(cells[2], inventory);
    } catch (const UnknownSymbol& e) {
      throw UnknownSymbol(e.symbol(), e.offset(), row);
    }
    try {
      std::size_t used = 0;
      item.human_regular = std::stod(cells[3], &used);
      if (used != cells[3].size()) throw std::invalid_argument("trailing");
      item.human_irregular = std::stod(cells[4], &used);
      if (used != cells[4].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(row, "probabilities must be numbers");
    }
    if (item.stem.empty() || item.regular_form.empty() || item.irregular_form.empty()) {
      throw ParseError(row, "empty form");
    }
    for (double p : {item.human_regular, item.human_irregular}) {
      if (!(p >= 0.0 && p <= 1.0)) throw ParseError(row, "probabilities must lie in [0, 1]");
    }
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<WugItem> load_wug_tsv(const std::filesystem::path& path, const phon::Inventory& inventory) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_wug_tsv(ss.str(), inventory);
}

WugResult wug_eval(const ed::EdModel& model, std::span<const WugItem> items, bool multitask, bool pairwise) {
  if (items.empty()) throw EmptyDataset();
  WugResult out;
  std::vector<double> human_reg, human_irr;
  const std::string tag = data::tag_symbol(data::Tag::kPast);
  for (const auto& item : items) {
    const ed::Symbols input = model.vocab().encode_input(item.stem, multitask ? &tag : nullptr);
    double reg = std::exp(ed::sequence_log_prob(model, input, model.vocab().encode_output(item.regular_form)));
    double irr = std::exp(ed::sequence_log_prob(model, input, model.vocab().encode_output(item.irregular_form)));
    if (pairwise && reg + irr > 0.0) {
      const double z = reg + irr;
      reg /= z;
      irr /= z;
    }
    out.model_regular.push_back(reg);
    out.model_irregular.push_back(irr);
    human_reg.push_back(item.human_regular);
    human_irr.push_back(item.human_irregular);
  }
  out.regular = spearman_rho(out.model_regular, human_reg);
  out.irregular = spearman_rho(out.model_irregular, human_irr);
  return out;
}

// ---------------------------------------------------------------------------
// Curves and tables

std::string curves_csv(std::span<const Condition> conditions) {
  if (conditions.empty()) throw Error("learning curves need at least one condition");
  std::string out = "condition,epoch,loss,accuracy,regular,irregular\n";
  char buf[256];
  for (const auto& c : conditions) {
    if (c.epochs.empty()) throw Error("condition '" + c.name + "' has no snapshots");
    for (const auto& e : c.epochs) {
      std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f,%.6f,%.6f\n", e.epoch, e.mean_loss, e.accuracy(),
                    e.accuracy_regular(), e.accuracy_irregular());
      out += c.name;
      out += buf;
    }
  }
  return out;
}

std::optional<std::size_t> epochs_to_accuracy(std::span<const ed::EpochStats> stats, double threshold) {
  for (const auto& s : stats) {
    if (s.total > 0 && s.accuracy() >= threshold) return s.epoch;
  }
  return std::nullopt;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

const TableRow& baseline_row() {
  static const TableRow row{"Single-Task (MGL)", {{96.0, 96.0, 94.5}, {99.9, 100.0, 100.0}, {0.0, 0.0, 0.0}}};
  return row;
}

const std::vector<TableRow>& reference_rows() {
  static const std::vector<TableRow> rows = {
      baseline_row(),
      {"Single-Task (Type)", {{99.8, 97.4, 95.1}, {99.9, 99.2, 98.9}, {97.6, 53.3, 28.6}}},
      {"Multi-Task (Type)", {{100.0, 96.9, 95.1}, {100.0, 99.5, 99.7}, {99.2, 33.3, 28.6}}},
  };
  return rows;
}

TableRow make_row(std::string name, const SplitReports& reports) {
  TableRow row{std::move(name), {{kNaN, kNaN, kNaN}, {kNaN, kNaN, kNaN}, {kNaN, kNaN, kNaN}}};
  const std::optional<AccuracyReport>* splits[] = {&reports.train, &reports.dev, &reports.test};
  for (std::size_t s = 0; s < 3; ++s) {
    if (!*splits[s]) continue;
    const AccuracyReport& r = **splits[s];
    const Stratum* strata[] = {&r.all, &r.regular, &r.irregular};
    for (std::size_t k = 0; k < 3; ++k) {
      if (strata[k]->total > 0) row.cells[k][s] = 100.0 * strata[k]->accuracy();
    }
  }
  return row;
}

namespace {

// Compares a model stratum with the baseline percentage applied to the same
// number of items.
bool differs_from_baseline(const Stratum& s, double baseline_percent) {
  if (s.total == 0) return false;
  const auto base_correct = static_cast<std::size_t>(std::llround(baseline_percent / 100.0 * static_cast<double>(s.total)));
  try {
    return chi_squared_2x2(s.correct, s.total, base_correct, s.total).p_value < 0.05;
  } catch (const DegenerateTable&) {
    return false;
  }
}

}  // namespace

std::string format_table(std::span<const TableRow> rows, std::span<const SplitReports> reports) {
  std::size_t width = 4;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::string out;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  out += std::string(width, ' ');
  for (const char* group : {"all", "regular", "irregular"}) out += " | " + pad(group, 26);
  out += '\n';
  out += std::string(width, ' ');
  for (int g = 0; g < 3; ++g) out += " | " + pad("train", 8) + pad("dev", 9) + pad("test", 9);
  out += '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TableRow& row = rows[i];
    out += row.name + std::string(width - row.name.size(), ' ');
    for (std::size_t k = 0; k < 3; ++k) {
      out += " | ";
      for (std::size_t s = 0; s < 3; ++s) {
        std::string cell = "-";
        if (!std::isnan(row.cells[k][s])) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.1f", row.cells[k][s]);
          cell = buf;
          if (i < reports.size()) {
            const std::optional<AccuracyReport>* splits[] = {&reports[i].train, &reports[i].dev, &reports[i].test};
            if (*splits[s]) {
              const AccuracyReport& r = **splits[s];
              const Stratum* strata[] = {&r.all, &r.regular, &r.irregular};
              if (differs_from_baseline(*strata[k], baseline_row().cells[k][s])) cell += "+";
            }
          }
        }
        out += pad(cell, s == 0 ? 8 : 9);
      }
    }
    out += '\n';
  }
  out += "(+ marks a significant difference from the baseline row, chi-square p < 0.05)\n";
  return out;
}

}  // namespace morph::exp
