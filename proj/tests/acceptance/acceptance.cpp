// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
// Usage: morphlab_acceptance [criterion ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "../common/ed_fixtures.hpp"
#include "../common/rm_toy.hpp"
#include "morphlab/dataset.hpp"
#include "morphlab/ed_model.hpp"
#include "morphlab/experiments.hpp"
#include "morphlab/morphology.hpp"
#include "morphlab/rm_model.hpp"

using namespace morph;
using morph::testing::all_strings;
using morph::testing::letter_vocab;
using morph::testing::random_input;
using morph::testing::scramble;
using morph::testing::tiny_config;
using morph::testing::with_eos;

namespace {

// Tolerances and budgets.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradBudgetSeconds = 30.0;
constexpr double kJensenSlack = 1e-9;
constexpr std::size_t kPerceptronEpochs = 200;
constexpr double kSpearmanTolerance = 1e-9;
constexpr double kChiSquaredP = 0.0477;
constexpr double kChiSquaredTolerance = 1e-3;
constexpr double kHeldOutRegular = 0.95;
constexpr double kTrainIrregular = 0.90;
constexpr double kOverregularShare = 0.60;
constexpr double kEndToEndBudgetSeconds = 3600.0;
constexpr std::size_t kEndToEndEpochs = 100;
constexpr std::size_t kEndToEndBeam = 12;
constexpr double kSpeedupThreshold = 0.90;
constexpr std::size_t kSpeedupMaxEpochs = 80;
constexpr std::size_t kSpeedupWins = 4;
constexpr double kTableAllRegular = 2.0;
constexpr double kTableIrregular = 15.0;
constexpr double kWugTolerance = 0.10;

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)}; }

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const phon::Inventory& inv() { return phon::Inventory::english(); }
PhonemeString w(std::string_view s) { return phon::tokenize(s, inv()); }

// ---------------------------------------------------------------------------

Outcome gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  // Five symbols in all: PAD, BOS, EOS and two phonemes.
  const ed::Vocabulary v = letter_vocab(2);
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ed::EdModel m(v, tiny_config(seed, 8));
    nn::Rng rng(seed + 100);
    const ed::TrainItem item{random_input(rng, v, 1, 4), with_eos(random_input(rng, v, 0, 3))};
    const auto r = morph::testing::ed_gradient_check(m, std::span(&item, 1));
    worst = std::max(worst, r.max_relative);
    checked += r.checked;
  }
  const double t = seconds_since(t0);
  return verdict(v.size() == 5 && worst < kGradTolerance && t < kGradBudgetSeconds,
                 fmt("max relative error %.2e over %.0f coordinates, %.1f s", worst, static_cast<double>(checked), t));
}

Outcome jensen() {
  nn::Rng rng(21);
  const std::size_t dim = 24;
  std::vector<phon::WickelfeatureVector> xs, ys;
  auto random_bits = [&] {
    std::vector<std::int8_t> b(dim);
    for (auto& x : b) x = rng.bernoulli(0.5) ? 1 : -1;
    return phon::WickelfeatureVector::from_bits(std::move(b));
  };
  for (int i = 0; i < 8; ++i) {
    xs.push_back(random_bits());
    ys.push_back(random_bits());
  }
  auto total = [&](const rm::PatternAssociator& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += rm::rm_loss(m, xs[i], ys[i]);
    return s;
  };
  rm::RmConfig c;
  c.init_scale = 0.0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    rm::PatternAssociator a(dim, c), b(dim, c), mix(dim, c);
    const double scale = rng.uniform(0.1, 3.0);
    for (auto* m : {&a, &b}) {
      for (Eigen::Index i = 0; i < m->weights().size(); ++i) m->weights().data()[i] = rng.uniform(-scale, scale);
      for (Eigen::Index i = 0; i < m->bias().size(); ++i) m->bias()[i] = rng.uniform(-scale, scale);
    }
    const double lambda = rng.uniform(0.0, 1.0);
    mix.weights() = lambda * a.weights() + (1.0 - lambda) * b.weights();
    mix.bias() = lambda * a.bias() + (1.0 - lambda) * b.bias();
    worst = std::max(worst, total(mix) - (lambda * total(a) + (1.0 - lambda) * total(b)));
  }
  return verdict(worst <= kJensenSlack, fmt("max L(mix) - mix(L) = %.3e over 100 pairs", worst));
}

Outcome perceptron_convergence() {
  std::size_t converged = 0, slowest = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto toy = morph::testing::separable_toy_set(seed);
    rm::RmConfig c;
    c.decay = true;
    c.seed = seed;
    rm::PatternAssociator m(toy.xs.front().size(), c);
    const auto stats = rm::rm_train(m, toy.xs, toy.ys, kPerceptronEpochs, seed);
    const auto hit = std::find_if(stats.begin(), stats.end(), [](const auto& s) { return s.mean_loss == 0.0; });
    if (hit != stats.end()) {
      ++converged;
      slowest = std::max(slowest, hit->epoch);
    }
  }
  return verdict(converged == 10, fmt("%.0f/10 seeds reach zero loss, slowest at epoch %.0f", static_cast<double>(converged),
                                      static_cast<double>(slowest)));
}

Outcome lossiness() {
  const auto& table = phon::FeatureTable::english();
  const bool same = phon::pi(w("ælgæl"), table) == phon::pi(w("ælgælgæl"), table);
  const auto a = phon::phi(w("slɪt")), b = phon::phi(w("sɪlt"));
  const std::set<phon::Wickelphone> sa(a.begin(), a.end());
  std::size_t shared = 0;
  for (const auto& x : b) shared += sa.count(x);
  return verdict(same && shared == 0, std::string("pi(algal)==pi(algalgal): ") + (same ? "yes" : "no") +
                                          ", shared wickelphones of slɪt/sɪlt: " + std::to_string(shared));
}

Outcome regular_rule() {
  const RegularRules rules(inv());
  const std::vector<std::pair<std::string, std::string>> rows{
      {"pæt", "pætɪd"}, {"sæg", "sægd"}, {"sæk", "sækt"}, {"pæd", "pædɪd"}};
  std::string detail;
  bool ok = true;
  for (const auto& [stem, past] : rows) {
    const std::string got = phon::render(rules.past(w(stem)), inv());
    ok = ok && got == past;
    detail += (detail.empty() ? "" : ", ") + stem + "->" + got;
  }
  return verdict(ok, detail);
}

Outcome end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto corpus = data::synth_corpus({4039, 168, 1});
  const auto s = data::split(corpus, 1);
  const auto train = data::filter_tag(s.train, data::Tag::kPast);
  const auto test = data::filter_tag(s.test, data::Tag::kPast);
  const auto vocab = data::make_vocabulary(inv());
  ed::EdConfig c = ed::EdConfig::test_scale();
  c.seed = 1;
  ed::EdModel m(vocab, c);
  ed::TrainOptions o;
  o.epochs = kEndToEndEpochs;
  o.seed = 1;
  ed::train(m, data::make_items(train, vocab, false), o);

  const RegularRules rules(inv());
  const auto lexicon = exp::build_lexicon(s.train);
  const exp::DecodeOptions eo{false, kEndToEndBeam, 32};
  const auto train_r = exp::accuracy(m, train, lexicon, rules, eo);
  const auto test_r = exp::accuracy(m, test, lexicon, rules, eo);
  const std::size_t irregular_errors = test_r.irregular.total - test_r.irregular.correct;
  const std::size_t over = test_r.count(exp::ErrorLabel::kOverregularization, false);
  const std::size_t blends = test_r.count(exp::ErrorLabel::kBlend);
  const double share = irregular_errors == 0 ? 1.0 : static_cast<double>(over) / static_cast<double>(irregular_errors);
  const double t = seconds_since(t0);

  std::string detail = fmt("held-out regular %.3f, train irregular %.3f, overregularization %.0f/", test_r.regular.accuracy(),
                           train_r.irregular.accuracy(), static_cast<double>(over)) +
                       std::to_string(irregular_errors) + ", blends " + std::to_string(blends) + fmt(", %.0f s", t);
  for (const auto& e : test_r.items) {
    if (!e.correct && e.label == exp::ErrorLabel::kBlend) {
      detail += "; blend " + phon::render(e.pair.lemma, inv()) + "->" +
                (e.predicted ? phon::render(*e.predicted, inv()) : std::string("?"));
    }
  }
  return verdict(test_r.regular.accuracy() >= kHeldOutRegular && train_r.irregular.accuracy() >= kTrainIrregular &&
                     share >= kOverregularShare && blends == 0 && t <= kEndToEndBudgetSeconds,
                 detail);
}

Outcome multitask_speedup() {
  const auto vocab = data::make_vocabulary(inv());
  std::size_t wins = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto corpus = data::synth_corpus({400, 17, seed});
    auto run = [&](bool multitask) {
      const auto pairs = multitask ? corpus : data::filter_tag(corpus, data::Tag::kPast);
      ed::EdConfig c = ed::EdConfig::test_scale();
      c.seed = seed;
      ed::EdModel m(vocab, c);
      ed::TrainOptions o;
      o.epochs = kSpeedupMaxEpochs;
      o.seed = seed;
      o.track_accuracy = true;
      o.stop_at_accuracy = kSpeedupThreshold;
      const auto stats = ed::train(m, data::make_items(pairs, vocab, multitask), o);
      return exp::epochs_to_accuracy(stats, kSpeedupThreshold).value_or(kSpeedupMaxEpochs + 1);
    };
    const std::size_t single = run(false), multi = run(true);
    wins += multi <= single;
    detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " multi " +
              std::to_string(multi) + " single " + std::to_string(single);
  }
  return verdict(wins >= kSpeedupWins, std::to_string(wins) + "/5 seeds (" + detail + ")");
}

Outcome beam_properties() {
  const ed::Vocabulary v = letter_vocab(2);
  nn::Rng rng(81);
  std::size_t equal = 0, dominated = 0, compared = 0, recovered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ed::EdModel m(v, tiny_config(seed));
    scramble(m, 5000 + seed, 1.5);
    const ed::Symbols in = random_input(rng, v, 1, 5);
    const auto g = ed::greedy_decode(m, in, 8);
    const auto b1 = ed::beam_search(m, in, 1, 8);
    equal += b1.size() == 1 && b1[0].symbols == g.symbols && b1[0].log_prob == g.log_prob;
    if (!g.truncated) {
      ++compared;
      const auto b = ed::beam_search(m, in, 12, 8);
      dominated += !b.empty() && !b[0].truncated && b[0].log_prob >= g.log_prob - 1e-12;
    }
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ed::EdModel m(v, tiny_config(seed));
    scramble(m, 6000 + seed, 2.0);
    const ed::Symbols in = random_input(rng, v, 1, 4);
    ed::Symbols best;
    double best_lp = -std::numeric_limits<double>::infinity();
    for (const auto& s : all_strings(v, 3)) {
      const double lp = ed::sequence_log_prob(m, in, with_eos(s));
      if (lp > best_lp) {
        best_lp = lp;
        best = s;
      }
    }
    const auto b = ed::beam_search(m, in, 32, 4);
    const bool hit = !b.empty() && b[0].symbols == best && std::abs(b[0].log_prob - best_lp) < 1e-9;
    recovered += hit;
  }
  return verdict(equal == 100 && compared > 0 && dominated == compared && recovered == 20,
                 "k=1 equals greedy " + std::to_string(equal) + "/100, top-1 >= greedy " + std::to_string(dominated) +
                     "/" + std::to_string(compared) + ", exhaustive argmax " + std::to_string(recovered) + "/20");
}

std::vector<double> counting_ranks(const std::vector<double>& xs) {
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double below = 0.0, equal = 0.0;
    for (double y : xs) {
      below += y < xs[i];
      equal += y == xs[i];
    }
    r[i] = below + (equal + 1.0) / 2.0;
  }
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Outcome statistics() {
  nn::Rng rng(91);
  double worst = 0.0;
  std::size_t compared = 0;
  while (compared < 1000) {
    const std::size_t n = 3 + rng.below(40);
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = static_cast<double>(rng.below(7));
      b[k] = static_cast<double>(rng.below(5));
    }
    const auto got = exp::spearman_rho(a, b);
    const auto ra = counting_ranks(a), rb = counting_ranks(b);
    const bool flat = std::all_of(a.begin(), a.end(), [&](double x) { return x == a[0]; }) ||
                      std::all_of(b.begin(), b.end(), [&](double x) { return x == b[0]; });
    if (flat) {
      if (!got.degenerate) worst = std::numeric_limits<double>::infinity();
      continue;
    }
    worst = std::max(worst, std::abs(got.rho - pearson(ra, rb)));
    ++compared;
  }
  const auto chi = exp::chi_squared_2x2(90, 100, 80, 100);
  const bool ok = worst <= kSpearmanTolerance && std::abs(chi.p_value - kChiSquaredP) <= kChiSquaredTolerance;
  return verdict(ok, fmt("spearman max error %.2e over 1000 tied vectors; chi2 %.4f, p %.4f", worst, chi.statistic, chi.p_value));
}

Outcome micro_ushape() {
  nn::Rng rng(101);
  std::size_t planted_hits = 0, constant_quiet = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<bool> h;
    const std::size_t pre = rng.below(6), c1 = 1 + rng.below(6), gap = 1 + rng.below(6), c2 = 1 + rng.below(6);
    for (std::size_t k = 0; k < pre; ++k) h.push_back(rng.bernoulli(0.5));
    h.insert(h.end(), c1, true);
    h.insert(h.end(), gap, false);
    h.insert(h.end(), c2, true);
    for (std::size_t k = rng.below(6); k > 0; --k) h.push_back(rng.bernoulli(0.5));
    planted_hits += exp::detect_micro_ushape(h).micro_u;

    const std::vector<bool> flat(2 + rng.below(40), rng.bernoulli(0.5));
    constant_quiet += !exp::detect_micro_ushape(flat).micro_u;
  }
  return verdict(planted_hits == 1000 && constant_quiet == 1000,
                 "planted flagged " + std::to_string(planted_hits) + "/1000, constant unflagged " +
                     std::to_string(constant_quiet) + "/1000");
}

Outcome real_data_table() {
  const char* dir_env = std::getenv("MORPHLAB_DATA_DIR");
  if (!dir_env || !*dir_env) return {Outcome::kSkip, "set MORPHLAB_DATA_DIR to a directory with train/dev/test.tsv"};
  const std::filesystem::path dir(dir_env);
  for (const char* f : {"train.tsv", "dev.tsv", "test.tsv"}) {
    if (!std::filesystem::is_regular_file(dir / f)) return {Outcome::kFail, "missing " + (dir / f).string()};
  }
  const auto train_all = data::load_tsv(dir / "train.tsv", inv());
  const auto train = data::filter_tag(train_all, data::Tag::kPast);
  const auto test = data::filter_tag(data::load_tsv(dir / "test.tsv", inv()), data::Tag::kPast);
  const auto vocab = data::make_vocabulary(inv());
  ed::EdModel m(vocab, ed::EdConfig::full_scale());
  ed::TrainOptions o;
  o.epochs = kEndToEndEpochs;
  ed::train(m, data::make_items(train, vocab, false), o);
  const auto r = exp::accuracy(m, test, exp::build_lexicon(train_all), RegularRules(inv()), {false, kEndToEndBeam, 32});
  const auto& ref = exp::reference_rows()[1].cells;
  const double all = 100.0 * r.all.accuracy(), reg = 100.0 * r.regular.accuracy(), irr = 100.0 * r.irregular.accuracy();
  bool ok = std::abs(all - ref[0][2]) <= kTableAllRegular && std::abs(reg - ref[1][2]) <= kTableAllRegular &&
            std::abs(irr - ref[2][2]) <= kTableIrregular;
  std::string detail = fmt("test all %.1f reg %.1f irr %.1f", all, reg, irr);
  if (std::filesystem::is_regular_file(dir / "wug.tsv")) {
    const auto items = exp::load_wug_tsv(dir / "wug.tsv", inv());
    const auto wr = exp::wug_eval(m, items, false);
    ok = ok && !wr.regular.degenerate && !wr.irregular.degenerate && std::abs(wr.regular.rho - 0.48) <= kWugTolerance &&
         std::abs(wr.irregular.rho - 0.45) <= kWugTolerance;
    detail += fmt("; wug rho regular %.2f irregular %.2f", wr.regular.rho, wr.irregular.rho);
  } else {
    detail += "; no wug.tsv, wug correlations not checked";
  }
  return verdict(ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"gradient fidelity", gradient_fidelity}},
      {2, {"perceptron loss convexity", jensen}},
      {3, {"perceptron convergence", perceptron_convergence}},
      {4, {"wickelfeature lossiness witnesses", lossiness}},
      {5, {"regular past oracle", regular_rule}},
      {6, {"synthetic end-to-end", end_to_end}},
      {7, {"multi-task speedup direction", multitask_speedup}},
      {8, {"beam search properties", beam_properties}},
      {9, {"statistics oracles", statistics}},
      {10, {"micro U-shape detector", micro_ushape}},
      {11, {"optional real-data table", real_data_table}},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  if (wanted.empty()) {
    for (const auto& [id, c] : criteria) wanted.push_back(id);
  }

  int failures = 0;
  for (int id : wanted) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("FAIL criterion %d: no such criterion\n", id);
      ++failures;
      continue;
    }
    Outcome r{Outcome::kFail, ""};
    try {
      r = it->second.second();
    } catch (const std::exception& e) {
      r = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = r.kind == Outcome::kPass ? "PASS" : r.kind == Outcome::kSkip ? "SKIP" : "FAIL";
    std::printf("%s criterion %d (%s): %s\n", tag, id, it->second.first.c_str(), r.detail.c_str());
    std::fflush(stdout);
    failures += r.kind == Outcome::kFail;
  }
  return failures == 0 ? 0 : 1;
}
