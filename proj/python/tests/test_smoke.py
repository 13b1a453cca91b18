import math

import pytest

import morphlab


def test_regular_rules():
    assert morphlab.regular_past("pæt") == "pætɪd"
    assert morphlab.regular_past("sæg") == "sægd"
    assert morphlab.regular_past("sæk") == "sækt"
    assert morphlab.regular_past("pæd") == "pædɪd"
    assert morphlab.gerund("wɔk") == "wɔkɪŋ"
    assert morphlab.tokenize("teɪk") == ["t", "eɪ", "k"]


def test_wickel_lossiness():
    assert morphlab.wickelfeatures("ælgæl") == morphlab.wickelfeatures("ælgælgæl")
    assert not set(morphlab.wickelphones("slɪt")) & set(morphlab.wickelphones("sɪlt"))
    assert all(0 <= i < morphlab.wickelfeature_count for i in morphlab.wickelfeatures("sæk"))


def test_unknown_symbol_raises():
    with pytest.raises(ValueError):
        morphlab.regular_past("sqk")


def test_statistics():
    stat, p = morphlab.chi_squared_2x2(90, 100, 80, 100)
    assert abs(stat - 3.9216) < 1e-3
    assert abs(p - 0.0477) < 1e-3
    assert morphlab.spearman([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6)
    assert morphlab.spearman([1, 2, 3], [5, 5, 5]) is None


def test_micro_ushape():
    flagged, points = morphlab.micro_ushape([True, False, True], [10, 20, 30])
    assert flagged
    assert points == [20, 30]
    assert not morphlab.micro_ushape([True] * 5)[0]


def test_classify_error():
    assert morphlab.classify_error("θroʊ", "θruː", "θroʊd", [("θroʊ", "θruː")]) == "overregularization"


def test_corpus_and_split():
    tsv = morphlab.synth_corpus(types=50, irregular=5, seed=3)
    assert tsv == morphlab.synth_corpus(types=50, irregular=5, seed=3)
    rows = [line for line in tsv.splitlines() if line and not line.startswith("#")]
    assert len(rows) == 200
    train, dev, test = morphlab.split(tsv, seed=3)
    lemmas = [{line.split("\t")[0] for line in part.splitlines() if line and not line.startswith("#")}
              for part in (train, dev, test)]
    assert not lemmas[0] & lemmas[1] and not lemmas[0] & lemmas[2] and not lemmas[1] & lemmas[2]


def test_train_inflect_round_trip(tmp_path):
    train, dev, _ = morphlab.split(morphlab.synth_corpus(types=40, irregular=2, seed=1), seed=1)
    model = morphlab.Model.train(train, embedding=8, hidden=8, epochs=2, seed=1)
    assert len(model.history) == 2
    assert model.tag == "PST" and not model.multitask
    best = model.inflect("wɔk", beam=4, nbest=3)
    assert 1 <= len(best) <= 3
    assert all(best[i][1] >= best[i + 1][1] for i in range(len(best) - 1))
    lp = model.log_prob("wɔk", "wɔkt")
    assert lp < 0 and math.isfinite(lp)
    report = model.evaluate(dev, train, beam=2)
    assert 0.0 <= report["all"] <= 1.0
    path = tmp_path / "m.ck"
    model.save(str(path))
    again = morphlab.Model.load(str(path))
    assert again.log_prob("wɔk", "wɔkt") == lp
