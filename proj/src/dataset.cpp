#include "morphlab/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "morphlab/errors.hpp"
#include "morphlab/morphology.hpp"

namespace morph::data {

std::string_view tag_name(Tag tag) {
  switch (tag) {
    case Tag::kPast:
      return "PST";
    case Tag::kGerund:
      return "GER";
    case Tag::kParticiple:
      return "PTCP";
    case Tag::kThirdSingular:
      return "3SG";
  }
  return "?";
}

std::optional<Tag> parse_tag(std::string_view name) {
  for (Tag t : kAllTags) {
    if (tag_name(t) == name) return t;
  }
  return std::nullopt;
}

std::string tag_symbol(Tag tag) { return "<" + std::string(tag_name(tag)) + ">"; }

std::vector<std::string> tag_symbols() {
  std::vector<std::string> out;
  for (Tag t : kAllTags) out.push_back(tag_symbol(t));
  return out;
}

// ---------------------------------------------------------------------------
// TSV

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

PhonemeString parse_word(std::string_view cell, std::size_t column_offset, std::size_t row,
                         const phon::Inventory& inventory, const char* what) {
  PhonemeString w;
  try {
    w = phon::tokenize(cell, inventory, phon::TokenizeMode::kStrict);
  } catch (const UnknownSymbol& e) {
    throw UnknownSymbol(e.symbol(), column_offset + e.offset(), row);
  }
  if (w.empty()) throw ParseError(row, std::string("empty ") + what);
  return w;
}

std::size_t codepoints(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

}  // namespace

std::vector<InflectionPair> parse_tsv(std::string_view text, const phon::Inventory& inventory) {
  std::vector<InflectionPair> out;
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++row;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    const auto cells = split_tabs(line);
    if (cells.size() != 4 && cells.size() != 5) {
      throw ParseError(row, "expected 4 or 5 tab-separated columns, found " + std::to_string(cells.size()));
    }
    InflectionPair p;
    p.lemma = parse_word(cells[0], 0, row, inventory, "lemma");
    p.form = parse_word(cells[1], codepoints(cells[0]) + 1, row, inventory, "form");
    const auto tag = parse_tag(cells[2]);
    if (!tag) throw ParseError(row, "unknown tag '" + std::string(cells[2]) + "'");
    p.tag = *tag;
    if (cells[3] == "regular") {
      p.regular = true;
    } else if (cells[3] == "irregular") {
      p.regular = false;
    } else {
      throw ParseError(row, "regularity must be 'regular' or 'irregular', got '" + std::string(cells[3]) + "'");
    }
    if (cells.size() == 5 && !cells[4].empty()) {
      double f = 0.0;
      const auto* end = cells[4].data() + cells[4].size();
      const auto res = std::from_chars(cells[4].data(), end, f);
      if (res.ec != std::errc() || res.ptr != end) {
        throw ParseError(row, "bad frequency '" + std::string(cells[4]) + "'");
      }
      p.frequency = f;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<InflectionPair> load_tsv(const std::filesystem::path& path, const phon::Inventory& inventory) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_tsv(ss.str(), inventory);
}

std::string format_tsv(std::span<const InflectionPair> pairs, const phon::Inventory& inventory) {
  std::string out;
  for (const auto& p : pairs) {
    out += phon::render(p.lemma, inventory);
    out += '\t';
    out += phon::render(p.form, inventory);
    out += '\t';
    out += tag_name(p.tag);
    out += '\t';
    out += p.regular ? "regular" : "irregular";
    if (p.frequency) {
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof buf, *p.frequency);
      out += '\t';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

void save_tsv(const std::filesystem::path& path, std::span<const InflectionPair> pairs,
              const phon::Inventory& inventory) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << format_tsv(pairs, inventory);
  if (!out) throw Error("cannot write " + path.string());
}

// ---------------------------------------------------------------------------
// Splitting and task construction

std::vector<PhonemeString> lemmas(std::span<const InflectionPair> pairs) {
  std::vector<PhonemeString> out;
  std::set<PhonemeString> seen;
  for (const auto& p : pairs) {
    if (seen.insert(p.lemma).second) out.push_back(p.lemma);
  }
  return out;
}

SplitCorpus split(std::span<const InflectionPair> pairs, std::uint64_t seed, std::array<double, 3> ratios) {
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(total - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0) {
    throw Error("split ratios must be non-negative and sum to 1");
  }
  std::vector<PhonemeString> types = lemmas(pairs);
  nn::Rng rng(nn::derive_seed(seed, "split"));
  rng.shuffle(types);

  const auto n = static_cast<double>(types.size());
  const auto n_train = std::min(types.size(), static_cast<std::size_t>(std::llround(n * ratios[0])));
  const auto n_dev = std::min(types.size() - n_train, static_cast<std::size_t>(std::llround(n * ratios[1])));
  std::map<PhonemeString, int> part;
  for (std::size_t i = 0; i < types.size(); ++i) part[types[i]] = i < n_train ? 0 : (i < n_train + n_dev ? 1 : 2);

  SplitCorpus out;
  out.seed = seed;
  for (const auto& p : pairs) {
    switch (part.at(p.lemma)) {
      case 0:
        out.train.push_back(p);
        break;
      case 1:
        out.dev.push_back(p);
        break;
      default:
        out.test.push_back(p);
        break;
    }
  }
  return out;
}

std::vector<InflectionPair> filter_tag(std::span<const InflectionPair> pairs, Tag tag) {
  std::vector<InflectionPair> out;
  for (const auto& p : pairs) {
    if (p.tag == tag) out.push_back(p);
  }
  return out;
}

ed::Vocabulary make_vocabulary(const phon::Inventory& inventory) { return ed::Vocabulary(inventory, tag_symbols()); }

ed::TrainItem augment_multitask(const InflectionPair& pair, const ed::Vocabulary& vocab, bool multitask) {
  ed::TrainItem item;
  const std::string tag = tag_symbol(pair.tag);
  item.input = vocab.encode_input(pair.lemma, multitask ? &tag : nullptr);
  item.output = vocab.encode_output(pair.form);
  item.regular = pair.regular;
  return item;
}

std::vector<ed::TrainItem> make_items(std::span<const InflectionPair> pairs, const ed::Vocabulary& vocab,
                                      bool multitask, std::optional<Tag> tracked) {
  std::vector<ed::TrainItem> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back(augment_multitask(p, vocab, multitask));
    out.back().tracked = !tracked || p.tag == *tracked;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

// Space-separated symbol strings keep multi-character phonemes unambiguous.
constexpr const char* kOnsets[] = {
    "p", "b", "t", "d", "k", "g", "f", "v", "θ", "s", "z", "ʃ", "h", "m", "n", "l", "r", "w", "j", "tʃ", "dʒ",
    "p l", "b l", "k l", "g l", "f l", "s l", "p r", "b r", "t r", "d r", "k r", "g r", "f r", "θ r", "ʃ r",
    "s p", "s t", "s k", "s m", "s n", "s w", "t w", "k w", "s k r", "s p l", "s t r", "s p r"};
constexpr const char* kTense[] = {"iː", "eɪ", "aɪ", "oʊ", "uː", "aʊ", "ɔɪ", "ɑ", "ɔ", "ɝ"};
constexpr const char* kLax[] = {"ɪ", "ɛ", "æ", "ʌ", "ʊ"};
constexpr const char* kCodas[] = {"p",   "b",   "t",   "d",   "k",   "g",   "f",   "v",   "θ",   "ð",  "s",
                                  "z",   "ʃ",   "tʃ",  "dʒ",  "m",   "n",   "l",   "s t", "s k", "s p", "n t",
                                  "n d", "m p", "l t", "l d", "l p", "l k", "f t", "k t", "p t", "k s", "n tʃ"};
constexpr const char* kLaxOnlyCodas[] = {"ŋ", "ŋ k"};
constexpr const char* kPrefixes[] = {"ə", "b ɪ", "d ɪ", "r ɪ", "ɪ n", "k ə n", "ɛ k s", "ʌ n", "ə b", "p r ɪ"};

struct Island {
  double weight;
  std::vector<std::array<const char*, 3>> rimes;  // stem, past, participle
};

const std::vector<Island>& islands() {
  static const std::vector<Island> table = {
      {3.0, {{"ɪ ŋ", "æ ŋ", "ʌ ŋ"}, {"ɪ ŋ k", "æ ŋ k", "ʌ ŋ k"}, {"ɪ m", "æ m", "ʌ m"}, {"ɪ n", "æ n", "ʌ n"}}},
      {3.0, {{"ɪ ŋ", "ʌ ŋ", "ʌ ŋ"}, {"ɪ ŋ k", "ʌ ŋ k", "ʌ ŋ k"}, {"ɪ k", "ʌ k", "ʌ k"}, {"ɪ g", "ʌ g", "ʌ g"}}},
      {2.0, {{"iː d", "ɛ d", "ɛ d"}, {"iː t", "ɛ t", "ɛ t"}}},
      {2.0,
       {{"aɪ d", "oʊ d", "ɪ d ə n"},
        {"aɪ v", "oʊ v", "ɪ v ə n"},
        {"aɪ t", "oʊ t", "ɪ t ə n"},
        {"aɪ z", "oʊ z", "ɪ z ə n"}}},
      {1.0, {{"eɪ k", "ʊ k", "eɪ k ə n"}}},
      {1.5, {{"oʊ", "uː", "oʊ n"}}},
      {0.7, {{"aɪ n d", "aʊ n d", "aʊ n d"}}},
      {1.5, {{"ɪ t", "ɪ t", "ɪ t"}, {"ʌ t", "ʌ t", "ʌ t"}, {"ɛ t", "ɛ t", "ɛ t"}}},
      {0.8, {{"ɛ n d", "ɛ n t", "ɛ n t"}}},
  };
  return table;
}

constexpr std::array<const char*, 3> kSuppletive[] = {
    {"g oʊ", "w ɛ n t", "g ɔ n"},       {"d uː", "d ɪ d", "d ʌ n"},        {"h æ v", "h æ d", "h æ d"},
    {"m eɪ k", "m eɪ d", "m eɪ d"},     {"s eɪ", "s ɛ d", "s ɛ d"},        {"iː t", "eɪ t", "iː t ə n"},
    {"s iː", "s ɔ", "s iː n"},          {"k ʌ m", "k eɪ m", "k ʌ m"},      {"b r ɪ ŋ", "b r ɔ t", "b r ɔ t"},
    {"θ ɪ ŋ k", "θ ɔ t", "θ ɔ t"},      {"b aɪ", "b ɔ t", "b ɔ t"},        {"t iː tʃ", "t ɔ t", "t ɔ t"},
    {"k æ tʃ", "k ɔ t", "k ɔ t"},       {"f aɪ t", "f ɔ t", "f ɔ t"},      {"s t æ n d", "s t ʊ d", "s t ʊ d"},
    {"g ɛ t", "g ɑ t", "g ɑ t ə n"},    {"g ɪ v", "g eɪ v", "g ɪ v ə n"},  {"s ɪ t", "s æ t", "s æ t"},
    {"l uː z", "l ɔ s t", "l ɔ s t"},   {"l iː v", "l ɛ f t", "l ɛ f t"},  {"t ɛ l", "t oʊ l d", "t oʊ l d"},
    {"s ɛ l", "s oʊ l d", "s oʊ l d"},  {"f ɔ l", "f ɛ l", "f ɔ l ə n"},  {"h oʊ l d", "h ɛ l d", "h ɛ l d"},
    {"r ʌ n", "r æ n", "r ʌ n"},
};

PhonemeString symbols(const phon::Inventory& inv, std::string_view spaced) {
  PhonemeString out;
  std::size_t pos = 0;
  while (pos < spaced.size()) {
    std::size_t sp = spaced.find(' ', pos);
    if (sp == std::string_view::npos) sp = spaced.size();
    if (sp > pos) out.ids.push_back(inv.at(spaced.substr(pos, sp - pos)));
    pos = sp + 1;
  }
  return out;
}

template <typename T, std::size_t N>
const T& pick(nn::Rng& rng, const T (&items)[N]) {
  return items[rng.below(N)];
}

struct Lemma {
  PhonemeString stem, past, participle;
  bool regular;
};

class Generator {
 public:
  Generator(const phon::Inventory& inv, std::uint64_t seed)
      : inv_(inv), rules_(inv), rng_(nn::derive_seed(seed, "synth")) {}

  std::vector<Lemma> run(const SynthConfig& config) {
    if (config.types == 0) throw Error("synthetic corpus needs at least one type");
    if (config.irregular > config.types) throw Error("more irregular types than types");
    std::vector<Lemma> out;

    const std::size_t n_supp = std::min<std::size_t>(std::size(kSuppletive), (config.irregular * 15 + 50) / 100);
    for (std::size_t i = 0; i < n_supp; ++i) {
      const auto& s = kSuppletive[i];
      add_irregular(out, symbols(inv_, s[0]), symbols(inv_, s[1]), symbols(inv_, s[2]));
    }
    for (std::size_t k = 0; k < islands().size(); ++k) {
      const std::size_t quota = island_quota(config.irregular - n_supp)[k];
      for (std::size_t made = 0, tries = 0; made < quota; ++tries) {
        if (tries > 100000) throw Error("cannot fill irregular island " + std::to_string(k));
        const auto& r = islands()[k].rimes[rng_.below(islands()[k].rimes.size())];
        const PhonemeString onset = symbols(inv_, pick(rng_, kOnsets));
        made += add_irregular(out, onset + symbols(inv_, r[0]), onset + symbols(inv_, r[1]),
                              onset + symbols(inv_, r[2]));
      }
    }
    for (std::size_t tries = 0; out.size() < config.types; ++tries) {
      if (tries > 100 * config.types + 100000) throw Error("cannot generate enough distinct stems");
      const bool prefixed = rng_.bernoulli(0.3);
      PhonemeString stem = syllable(prefixed);
      if (prefixed) stem = symbols(inv_, pick(rng_, kPrefixes)) + stem;
      if (!usable(stem) || !used_.insert(stem).second) continue;
      const PhonemeString past = rules_.past(stem);
      out.push_back({stem, past, past, true});
    }
    rng_.shuffle(out);
    return out;
  }

  const RegularRules& rules() const { return rules_; }

 private:
  std::vector<std::size_t> island_quota(std::size_t total) const {
    // Largest-remainder apportionment by island weight.
    double sum = 0.0;
    for (const auto& is : islands()) sum += is.weight;
    std::vector<std::size_t> quota;
    std::vector<std::pair<double, std::size_t>> rest;
    std::size_t given = 0;
    for (std::size_t k = 0; k < islands().size(); ++k) {
      const double exact = static_cast<double>(total) * islands()[k].weight / sum;
      quota.push_back(static_cast<std::size_t>(exact));
      given += quota.back();
      rest.push_back({exact - std::floor(exact), k});
    }
    std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; given < total; ++i, ++given) ++quota[rest[i % rest.size()].second];
    return quota;
  }

  PhonemeString syllable(bool need_onset) {
    PhonemeString s;
    if (need_onset || !rng_.bernoulli(0.1)) s = symbols(inv_, pick(rng_, kOnsets));
    const bool lax = rng_.bernoulli(0.55);
    s += symbols(inv_, lax ? pick(rng_, kLax) : pick(rng_, kTense));
    // Lax vowels cannot end a word.
    if (lax && rng_.bernoulli(0.06)) {
      s += symbols(inv_, pick(rng_, kLaxOnlyCodas));
    } else if (lax || rng_.bernoulli(0.7)) {
      s += symbols(inv_, pick(rng_, kCodas));
    }
    return s;
  }

  // Every form must survive rendering and strict re-tokenization.
  bool round_trips(const PhonemeString& w) const {
    return phon::tokenize(phon::render(w, inv_), inv_, phon::TokenizeMode::kStrict) == w;
  }

  bool usable(const PhonemeString& stem) const {
    return round_trips(stem) && round_trips(rules_.past(stem)) && round_trips(rules_.gerund(stem)) &&
           round_trips(rules_.third_singular(stem));
  }

  bool add_irregular(std::vector<Lemma>& out, PhonemeString stem, PhonemeString past, PhonemeString participle) {
    if (!usable(stem) || !round_trips(past) || !round_trips(participle)) return false;
    if (past == rules_.past(stem)) return false;
    if (!used_.insert(stem).second) return false;
    out.push_back({std::move(stem), std::move(past), std::move(participle), false});
    return true;
  }

  const phon::Inventory& inv_;
  RegularRules rules_;
  nn::Rng rng_;
  std::set<PhonemeString> used_;
};

}  // namespace

std::vector<InflectionPair> synth_corpus(const SynthConfig& config, const phon::Inventory& inventory) {
  Generator gen(inventory, config.seed);
  const auto lemmas = gen.run(config);
  const RegularRules& rules = gen.rules();
  std::vector<InflectionPair> out;
  out.reserve(lemmas.size() * kAllTags.size());
  for (const auto& l : lemmas) {
    out.push_back({l.stem, l.past, Tag::kPast, l.regular, std::nullopt});
    out.push_back({l.stem, rules.gerund(l.stem), Tag::kGerund, true, std::nullopt});
    out.push_back({l.stem, l.participle, Tag::kParticiple, l.regular, std::nullopt});
    out.push_back({l.stem, rules.third_singular(l.stem), Tag::kThirdSingular, true, std::nullopt});
  }
  return out;
}

}  // namespace morph::data
