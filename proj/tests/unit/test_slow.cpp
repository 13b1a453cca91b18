#include <doctest.h>

#include "morphlab/dataset.hpp"
#include "morphlab/experiments.hpp"

using namespace morph;

TEST_SUITE("slow") {
  TEST_CASE("a regular-only corpus generalizes to held-out lemmas") {
    const auto& inv = phon::Inventory::english();
    const auto corpus = data::synth_corpus({1500, 0, 3});
    const auto s = data::split(corpus, 3);
    const auto train = data::filter_tag(s.train, data::Tag::kPast);
    const auto test = data::filter_tag(s.test, data::Tag::kPast);
    const auto vocab = data::make_vocabulary(inv);
    ed::EdModel m(vocab, ed::EdConfig::test_scale());
    ed::TrainOptions o;
    o.epochs = 10;
    o.seed = 3;
    ed::train(m, data::make_items(train, vocab, false), o);
    const auto r = exp::accuracy(m, test, IrregularLexicon{}, RegularRules(inv));
    CHECK(r.all.total == 150);
    CHECK(r.all.accuracy() >= 0.95);
  }
}
