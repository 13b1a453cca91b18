#include <doctest.h>

#include <algorithm>

#include "morphlab/errors.hpp"
#include "morphlab/morphology.hpp"

using namespace morph;

namespace {

const phon::Inventory& inv() { return phon::Inventory::english(); }
PhonemeString w(std::string_view s) { return phon::tokenize(s, inv()); }
std::string r(const PhonemeString& p) { return phon::render(p, inv()); }

}  // namespace

TEST_CASE("regular past allomorphy") {
  const RegularRules rules(inv());
  CHECK(r(rules.past(w("pæt"))) == "pætɪd");
  CHECK(r(rules.past(w("sæg"))) == "sægd");
  CHECK(r(rules.past(w("sæk"))) == "sækt");
  CHECK(r(rules.past(w("pæd"))) == "pædɪd");
  CHECK(r(rules.past(w("wʌg"))) == "wʌgd");
  CHECK(r(rules.past(w("bloʊ"))) == "bloʊd");
  CHECK(r(rules.past(w("wɔtʃ"))) == "wɔtʃt");
  CHECK_THROWS_AS(rules.past(PhonemeString{}), Error);
}

TEST_CASE("third singular and gerund") {
  const RegularRules rules(inv());
  CHECK(r(rules.third_singular(w("wɔtʃ"))) == "wɔtʃɪz");
  CHECK(r(rules.third_singular(w("wɔk"))) == "wɔks");
  CHECK(r(rules.third_singular(w("rʌn"))) == "rʌnz");
  CHECK(r(rules.gerund(w("wɔk"))) == "wɔkɪŋ");
}

TEST_CASE("rime") {
  const RegularRules rules(inv());
  CHECK(r(rules.rime(w("strɪŋ"))) == "ɪŋ");
  CHECK(r(rules.rime(w("ʃt"))) == "ʃt");
}

TEST_CASE("stem changes") {
  const auto c = StemChange::between(w("sɪŋ"), w("sæŋ"));
  CHECK(r(c.from) == "ɪŋ");
  CHECK(r(c.to) == "æŋ");
  CHECK(r(*c.apply(w("rɪŋ"))) == "ræŋ");
  CHECK_FALSE(c.apply(w("wɔk")));
  CHECK(StemChange::between(w("hɪt"), w("hɪt")).is_identity());

  IrregularLexicon lex;
  lex.add(w("sɪŋ"), w("sæŋ"));
  lex.add(w("klɪŋ"), w("klʌŋ"));
  lex.add(w("hɪt"), w("hɪt"));
  lex.add(w("sɪŋ"), w("sæŋ"));
  CHECK(lex.entries().size() == 4);
  CHECK(lex.changes().size() == 2);
  const auto v = lex.irregular_variants(w("pɪŋ"));
  CHECK(v.size() == 2);
  CHECK(std::find(v.begin(), v.end(), w("pæŋ")) != v.end());
  CHECK(std::find(v.begin(), v.end(), w("pʌŋ")) != v.end());
}
