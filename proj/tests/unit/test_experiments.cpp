#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../common/ed_fixtures.hpp"
#include "morphlab/errors.hpp"
#include "morphlab/experiments.hpp"

using namespace morph;
using namespace morph::exp;

namespace {

const phon::Inventory& inv() { return phon::Inventory::english(); }
PhonemeString w(std::string_view s) { return phon::tokenize(s, inv()); }

// Ranks by direct counting, ties sharing the mean of their positions.
std::vector<double> counting_ranks(const std::vector<double>& xs) {
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double less = 0, equal = 0;
    for (double y : xs) {
      less += y < xs[i];
      equal += y == xs[i];
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::vector<bool> from_string(std::string_view s) {
  std::vector<bool> out;
  for (char c : s) out.push_back(c == 'C');
  return out;
}

}  // namespace

TEST_CASE("regular past oracle") {
  CHECK(regular_past(w("pæt")) == w("pætɪd"));
  CHECK(regular_past(w("sæg")) == w("sægd"));
  CHECK(regular_past(w("sæk")) == w("sækt"));
  CHECK(regular_past(w("pæd")) == w("pædɪd"));
}

TEST_CASE("error taxonomy") {
  const RegularRules rules(inv());
  IrregularLexicon lex;
  lex.add(w("sɪŋ"), w("sæŋ"));
  lex.add(w("iːt"), w("eɪt"));
  lex.add(w("groʊ"), w("gruː"));

  CHECK(classify_error(w("θroʊ"), w("θruː"), w("θroʊd"), lex, rules) == ErrorLabel::kOverregularization);
  CHECK(classify_error(w("iːt"), w("eɪt"), w("eɪtɪd"), lex, rules) == ErrorLabel::kBlend);
  CHECK(classify_error(w("pɪŋ"), w("pɪŋd"), w("pæŋ"), lex, rules) == ErrorLabel::kOverirregularization);
  CHECK(classify_error(w("pɪŋ"), w("pɪŋd"), w("pɪŋd"), lex, rules) == ErrorLabel::kCorrect);
  CHECK(classify_error(w("θroʊ"), w("θruː"), w("θruː"), lex, rules) == ErrorLabel::kCorrect);
  CHECK(classify_error(w("θroʊ"), w("θruː"), w("zæp"), lex, rules) == ErrorLabel::kOther);
  // An attested irregular variant plus a suffix is a blend even when it is not the gold form.
  CHECK(classify_error(w("klɪŋ"), w("klʌŋ"), w("klæŋd"), lex, rules) == ErrorLabel::kBlend);
  // The regular past itself must never count as a blend.
  CHECK(classify_error(w("pæt"), w("pæt"), w("pætɪd"), lex, rules) == ErrorLabel::kOverregularization);

  CHECK(label_name(ErrorLabel::kBlend) == "blend");

  const std::vector<data::InflectionPair> pairs{
      {w("sɪŋ"), w("sæŋ"), data::Tag::kPast, false, std::nullopt},
      {w("wɔk"), w("wɔkt"), data::Tag::kPast, true, std::nullopt},
      {w("sɪŋ"), w("sʌŋ"), data::Tag::kParticiple, false, std::nullopt}};
  const auto built = build_lexicon(pairs);
  CHECK(built.entries().size() == 1);
  CHECK(build_lexicon(pairs, data::Tag::kParticiple).entries().size() == 1);
}

TEST_CASE("scoring") {
  const RegularRules rules(inv());
  const IrregularLexicon lex;
  const std::vector<data::InflectionPair> pairs{
      {w("wɔk"), w("wɔkt"), data::Tag::kPast, true, std::nullopt},
      {w("θroʊ"), w("θruː"), data::Tag::kPast, false, std::nullopt},
      {w("pæt"), w("pætɪd"), data::Tag::kPast, true, std::nullopt}};
  const std::vector<std::optional<PhonemeString>> preds{w("wɔkt"), w("θroʊd"), std::nullopt};
  const auto r = score(pairs, preds, lex, rules);
  CHECK(r.all.total == 3);
  CHECK(r.all.correct == 1);
  CHECK(r.regular.total + r.irregular.total == r.all.total);
  CHECK(r.regular.correct + r.irregular.correct == r.all.correct);
  CHECK(r.count(ErrorLabel::kOverregularization) == 1);
  CHECK(r.count(ErrorLabel::kOverregularization, true) == 0);
  CHECK(r.count(ErrorLabel::kOther) == 1);
  const std::string tsv = errors_tsv(r, inv());
  CHECK(tsv.find("θroʊ\tθruː\tθroʊd\tPST\tirregular\toverregularization") != std::string::npos);
  CHECK(tsv.find("wɔkt") == std::string::npos);
  CHECK(errors_tsv(r, inv(), true).find("wɔkt") != std::string::npos);
  CHECK_THROWS_AS(score(pairs, std::span(preds).first(2), lex, rules), LengthMismatch);
}

TEST_CASE("accuracy of a memorizer") {
  const auto vocab = data::make_vocabulary(inv());
  const std::vector<data::InflectionPair> pairs{{w("wɔk"), w("wɔkt"), data::Tag::kPast, true, std::nullopt}};
  ed::EdConfig c = ed::EdConfig::test_scale();
  c.embedding = c.hidden = 16;
  ed::EdModel m(vocab, c);
  const auto items = data::make_items(pairs, vocab, false);
  ed::TrainOptions o;
  o.epochs = 150;
  ed::train(m, items, o);
  const auto r = accuracy(m, pairs, IrregularLexicon{}, RegularRules(inv()));
  CHECK(r.all.accuracy() == 1.0);
}

TEST_CASE("micro U-shapes") {
  CHECK(detect_micro_ushape(from_string("CCCCC")).change_points.empty());
  CHECK_FALSE(detect_micro_ushape(from_string("CCCCC")).micro_u);

  const auto planted = detect_micro_ushape(from_string("CICIC"));
  CHECK(planted.change_points.size() == 4);
  CHECK(planted.micro_u);

  CHECK_FALSE(detect_micro_ushape(from_string("IIICCC")).micro_u);
  CHECK_FALSE(detect_micro_ushape(from_string("CCCIII")).micro_u);
  CHECK(detect_micro_ushape(from_string("IICIIC")).micro_u);

  const std::vector<std::size_t> epochs{10, 20, 30};
  const auto at = detect_micro_ushape(from_string("ICI"), epochs);
  CHECK(at.change_points == std::vector<std::size_t>{20, 30});
  CHECK_THROWS_AS(detect_micro_ushape(from_string("C")), Error);

  SUBCASE("the cling trace") {
    // Outputs at the change points; each holds until the next one.
    const std::vector<std::pair<std::size_t, std::string>> trace{
        {5, "klɪŋd"}, {11, "klʌŋ"}, {13, "klɪŋ"}, {14, "klɪŋd"}, {18, "klʌŋ"}, {21, "klɪŋd"}, {28, "klʌŋ"}, {40, "klʌŋ"}};
    std::vector<bool> correct;
    std::vector<std::size_t> ep;
    for (std::size_t e = 5; e <= 45; ++e) {
      std::string out;
      for (const auto& [start, form] : trace) {
        if (start <= e) out = form;
      }
      correct.push_back(out == "klʌŋ");
      ep.push_back(e);
    }
    const auto r = detect_micro_ushape(correct, ep);
    CHECK(r.micro_u);
    CHECK(r.change_points == std::vector<std::size_t>{11, 13, 18, 21, 28});
  }

  SUBCASE("random planted histories") {
    nn::Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
      const std::size_t n = 3 + rng.below(40);
      const bool value = rng.bernoulli(0.5);
      CHECK_FALSE(detect_micro_ushape(std::vector<bool>(n, value)).micro_u);

      std::vector<bool> h;
      const std::size_t pre = rng.below(5), c1 = 1 + rng.below(5), gap = 1 + rng.below(5), c2 = 1 + rng.below(5);
      for (std::size_t k = 0; k < pre; ++k) h.push_back(rng.bernoulli(0.5));
      h.insert(h.end(), c1, true);
      h.insert(h.end(), gap, false);
      h.insert(h.end(), c2, true);
      for (std::size_t k = rng.below(5); k > 0; --k) h.push_back(rng.bernoulli(0.5));
      CHECK(detect_micro_ushape(h).micro_u);
    }
  }

  SUBCASE("output change points") {
    const std::vector<ed::Symbols> outs{{3}, {3}, {4}, {4}, {3}};
    const std::vector<std::size_t> ep{1, 2, 3, 4, 5};
    const auto cps = output_change_points(outs, ep);
    REQUIRE(cps.size() == 3);
    CHECK(cps[0].epoch == 1);
    CHECK(cps[1].epoch == 3);
    CHECK(cps[2].output == ed::Symbols{3});
  }

  SUBCASE("macro shape") {
    const std::vector<double> acc{0.1, 0.5, 0.9, 0.6, 0.8};
    const std::vector<std::size_t> ep{1, 2, 3, 4, 5};
    const auto m = macro_ushape(acc, ep);
    CHECK(m.peak_epoch == 3);
    CHECK(m.dip == doctest::Approx(0.3));
    CHECK(m.monotone_prefix == 3);
  }
}

TEST_CASE("spearman") {
  const std::vector<double> up{1, 2, 3, 4, 5}, sq{1, 4, 9, 16, 25};
  CHECK(spearman_rho(up, sq).rho == doctest::Approx(1.0));
  const std::vector<double> down{5, 4, 3, 2, 1};
  CHECK(spearman_rho(up, down).rho == doctest::Approx(-1.0));
  const std::vector<double> x{1, 2, 3, 4}, y{2, 1, 4, 3};
  CHECK(std::abs(spearman_rho(x, y).rho - 0.6) < 1e-12);

  const std::vector<double> two{1, 2};
  CHECK_THROWS_AS(spearman_rho(x, up), LengthMismatch);
  CHECK_THROWS_AS(spearman_rho(two, two), Error);
  const std::vector<double> flat{2, 2, 2, 2};
  CHECK(spearman_rho(x, flat).degenerate);

  CHECK(average_ranks(std::vector<double>{10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});

  nn::Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 3 + rng.below(30);
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = static_cast<double>(rng.below(6));
      b[k] = static_cast<double>(rng.below(8));
    }
    const auto got = spearman_rho(a, b);
    const auto ra = counting_ranks(a), rb = counting_ranks(b);
    const bool flat_a = std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; });
    const bool flat_b = std::all_of(b.begin(), b.end(), [&](double v) { return v == b[0]; });
    if (flat_a || flat_b) {
      CHECK(got.degenerate);
      continue;
    }
    CHECK(std::abs(got.rho - pearson(ra, rb)) < 1e-9);
    // Invariance under strictly monotone transforms.
    std::vector<double> ta(n);
    std::transform(a.begin(), a.end(), ta.begin(), [](double v) { return std::exp(v) + v * v * v; });
    CHECK(std::abs(spearman_rho(ta, b).rho - got.rho) < 1e-12);
  }
}

TEST_CASE("chi squared") {
  const auto same = chi_squared_2x2(50, 100, 50, 100);
  CHECK(same.statistic == doctest::Approx(0.0));
  CHECK(same.p_value == doctest::Approx(1.0));
  CHECK(chi_squared_2x2(100, 100, 0, 100).p_value < 1e-10);

  const auto r = chi_squared_2x2(90, 100, 80, 100);
  // Definitional Pearson statistic on the 2x2 table.
  const double obs[2][2] = {{90, 10}, {80, 20}};
  double stat = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double e = (obs[i][0] + obs[i][1]) * (obs[0][j] + obs[1][j]) / 200.0;
      stat += (obs[i][j] - e) * (obs[i][j] - e) / e;
    }
  }
  CHECK(r.statistic == doctest::Approx(stat).epsilon(1e-12));
  CHECK(std::abs(r.statistic - 3.92) < 0.01);
  CHECK(std::abs(r.p_value - std::erfc(std::sqrt(stat / 2.0))) < 1e-10);
  CHECK(std::abs(r.p_value - 0.0477) < 1e-3);

  const auto swapped = chi_squared_2x2(80, 100, 90, 100);
  CHECK(swapped.statistic == r.statistic);
  CHECK(swapped.p_value == r.p_value);

  CHECK_THROWS_AS(chi_squared_2x2(100, 100, 100, 100), DegenerateTable);
  CHECK_THROWS_AS(chi_squared_2x2(0, 0, 1, 2), DegenerateTable);

  nn::Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(0.0, 40.0);
    CHECK(std::abs(chi_squared_sf(x, 1.0) - std::erfc(std::sqrt(x / 2.0))) < 1e-10);
    CHECK(std::abs(chi_squared_sf(x, 2.0) - std::exp(-x / 2.0)) < 1e-10);
  }
  CHECK(gamma_q(1.0, 0.0) == 1.0);
}

TEST_CASE("wug evaluation") {
  const std::string text =
      "# stem\treg\tirr\tp_reg\tp_irr\n"
      "raɪf\traɪft\troʊf\t0.8\t0.1\n"
      "splɪŋ\tsplɪŋd\tsplʌŋ\t0.4\t0.5\n"
      "blɪk\tblɪkt\tblæk\t0.9\t0.05\n"
      "dræm\tdræmd\tdrɛm\t0.7\t0.2\n";
  const auto items = parse_wug_tsv(text, inv());
  REQUIRE(items.size() == 4);
  CHECK(items[1].human_irregular == 0.5);
  CHECK_THROWS_AS(parse_wug_tsv("raɪf\traɪft\troʊf\t0.8\n", inv()), ParseError);
  CHECK_THROWS_AS(parse_wug_tsv("raɪf\traɪft\troʊf\t1.8\t0\n", inv()), ParseError);

  const auto vocab = data::make_vocabulary(inv());
  ed::EdModel m(vocab, morph::testing::tiny_config(1));
  morph::testing::scramble(m, 1, 0.5);

  const auto r = wug_eval(m, items, false);
  CHECK(r.model_regular.size() == 4);
  for (double p : r.model_regular) CHECK((p > 0.0 && p <= 1.0));

  SUBCASE("humans equal to the model") {
    auto copy = items;
    for (std::size_t i = 0; i < copy.size(); ++i) {
      copy[i].human_regular = r.model_regular[i];
      copy[i].human_irregular = r.model_irregular[i];
    }
    const auto same = wug_eval(m, copy, false);
    CHECK(same.regular.rho == doctest::Approx(1.0));
    CHECK(same.irregular.rho == doctest::Approx(1.0));
  }

  SUBCASE("constant model probabilities are degenerate") {
    ed::EdModel flat(vocab, morph::testing::tiny_config(2));
    flat.params()[*flat.params().find("out.W")].value.set_zero();
    flat.params()[*flat.params().find("out.b")].value.set_zero();
    // Same-length forms in each pool get identical probabilities.
    const auto equal_len = parse_wug_tsv(
        "blɪk\tblɪkt\tblæk\t0.9\t0.05\n"
        "drɪp\tdrɪpt\tdræp\t0.7\t0.2\n"
        "grɪn\tgrɪnd\tgræn\t0.3\t0.6\n",
        inv());
    const auto d = wug_eval(flat, equal_len, false);
    CHECK(d.regular.degenerate);
    CHECK(d.irregular.degenerate);
  }

  SUBCASE("pairwise normalization") {
    const auto p = wug_eval(m, items, false, true);
    for (std::size_t i = 0; i < items.size(); ++i) {
      CHECK(p.model_regular[i] + p.model_irregular[i] == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("curves") {
  std::vector<ed::EpochStats> a(3), b(2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i].epoch = i + 1;
    a[i].total = 10;
    a[i].correct = 3 * (i + 1);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i].epoch = i + 1;
    b[i].total = 10;
    b[i].correct = 9 + i;
  }
  const std::vector<Condition> conds{{"single", a}, {"multi", b}};
  const std::string csv = curves_csv(conds);
  CHECK(csv.rfind("condition,epoch,loss,accuracy,regular,irregular\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(csv.find("single,2,") != std::string::npos);
  CHECK_THROWS_AS(curves_csv(std::vector<Condition>{}), Error);

  CHECK(epochs_to_accuracy(a, 0.9) == 3);
  CHECK(epochs_to_accuracy(b, 0.9) == 1);
  CHECK_FALSE(epochs_to_accuracy(a, 0.95));
}

TEST_CASE("summary table") {
  const auto& rows = reference_rows();
  REQUIRE(rows.size() == 3);
  CHECK(baseline_row().cells[1][2] == 100.0);
  CHECK(rows[1].cells[0][2] == 95.1);
  CHECK(rows[1].cells[1][2] == 98.9);
  CHECK(rows[1].cells[2][2] == 28.6);

  AccuracyReport test;
  test.all = {90, 100};
  test.regular = {85, 85};
  test.irregular = {5, 15};
  SplitReports rep;
  rep.test = test;
  const auto row = make_row("model", rep);
  CHECK(row.cells[0][2] == 90.0);
  CHECK(row.cells[2][2] == doctest::Approx(100.0 / 3.0));
  CHECK(std::isnan(row.cells[0][0]));

  const std::vector<TableRow> table{baseline_row(), row};
  const std::vector<SplitReports> reports{SplitReports{}, rep};
  const std::string text = format_table(table, reports);
  CHECK(text.find("model") != std::string::npos);
  CHECK(text.find("+") != std::string::npos);
}
