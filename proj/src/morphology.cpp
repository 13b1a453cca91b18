#include "morphlab/morphology.hpp"

#include <algorithm>
#include <string_view>

#include "morphlab/errors.hpp"

namespace morph {

namespace {

constexpr std::string_view kVowels[] = {"iː", "ɪ", "eɪ", "ɛ", "æ", "ʌ", "ə", "ɝ", "ɑ", "ɔ",
                                        "oʊ", "ʊ", "uː", "aɪ", "aʊ", "ɔɪ", "i", "u", "e", "o", "a"};
constexpr std::string_view kVoiceless[] = {"p", "t", "k", "f", "θ", "s", "ʃ", "tʃ", "h"};
constexpr std::string_view kSibilants[] = {"s", "z", "ʃ", "ʒ", "tʃ", "dʒ"};

template <std::size_t N>
std::vector<bool> mark(const phon::Inventory& inventory, const std::string_view (&symbols)[N]) {
  std::vector<bool> out(inventory.size(), false);
  for (auto s : symbols) {
    if (auto id = inventory.find(s)) out[*id] = true;
  }
  return out;
}

PhonemeString word(const phon::Inventory& inventory, std::initializer_list<std::string_view> symbols) {
  PhonemeString out;
  for (auto s : symbols) out.ids.push_back(inventory.at(s));
  return out;
}

}  // namespace

RegularRules::RegularRules(const phon::Inventory& inventory)
    : inventory_(&inventory),
      vowel_(mark(inventory, kVowels)),
      voiceless_(mark(inventory, kVoiceless)),
      sibilant_(mark(inventory, kSibilants)),
      t_(inventory.at("t")),
      d_(inventory.at("d")),
      id_suffix_(word(inventory, {"ɪ", "d"})),
      iz_suffix_(word(inventory, {"ɪ", "z"})),
      ing_suffix_(word(inventory, {"ɪ", "ŋ"})),
      s_suffix_(word(inventory, {"s"})),
      z_suffix_(word(inventory, {"z"})),
      past_suffixes_{id_suffix_, word(inventory, {"d"}), word(inventory, {"t"})} {}

bool RegularRules::is_vowel(PhonemeId p) const { return p < vowel_.size() && vowel_[p]; }
bool RegularRules::is_voiceless(PhonemeId p) const { return p < voiceless_.size() && voiceless_[p]; }
bool RegularRules::is_sibilant(PhonemeId p) const { return p < sibilant_.size() && sibilant_[p]; }

PhonemeString RegularRules::past(const PhonemeString& stem) const {
  if (stem.empty()) throw Error("regular_past of an empty stem");
  const PhonemeId last = stem.ids.back();
  if (last == t_ || last == d_) return stem + past_suffixes_[0];
  if (is_voiceless(last)) return stem + past_suffixes_[2];
  return stem + past_suffixes_[1];
}

PhonemeString RegularRules::third_singular(const PhonemeString& stem) const {
  if (stem.empty()) throw Error("third_singular of an empty stem");
  const PhonemeId last = stem.ids.back();
  if (is_sibilant(last)) return stem + iz_suffix_;
  if (is_voiceless(last)) return stem + s_suffix_;
  return stem + z_suffix_;
}

PhonemeString RegularRules::gerund(const PhonemeString& stem) const { return stem + ing_suffix_; }

PhonemeString RegularRules::rime(const PhonemeString& w) const {
  for (std::size_t i = w.size(); i-- > 0;) {
    if (is_vowel(w[i])) return PhonemeString{{w.ids.begin() + static_cast<std::ptrdiff_t>(i), w.ids.end()}};
  }
  return w;
}

StemChange StemChange::between(const PhonemeString& stem, const PhonemeString& form) {
  std::size_t k = 0;
  while (k < stem.size() && k < form.size() && stem[k] == form[k]) ++k;
  StemChange c;
  c.from.ids.assign(stem.ids.begin() + static_cast<std::ptrdiff_t>(k), stem.ids.end());
  c.to.ids.assign(form.ids.begin() + static_cast<std::ptrdiff_t>(k), form.ids.end());
  return c;
}

std::optional<PhonemeString> StemChange::apply(const PhonemeString& stem) const {
  if (from.size() > stem.size()) return std::nullopt;
  if (!std::equal(from.ids.begin(), from.ids.end(), stem.ids.end() - static_cast<std::ptrdiff_t>(from.size()))) {
    return std::nullopt;
  }
  PhonemeString out;
  out.ids.assign(stem.ids.begin(), stem.ids.end() - static_cast<std::ptrdiff_t>(from.size()));
  out += to;
  if (out.empty()) return std::nullopt;
  return out;
}

void IrregularLexicon::add(const PhonemeString& stem, const PhonemeString& form) {
  entries_.emplace_back(stem, form);
  StemChange c = StemChange::between(stem, form);
  if (c.is_identity()) return;
  if (std::find(changes_.begin(), changes_.end(), c) == changes_.end()) changes_.push_back(std::move(c));
}

std::vector<PhonemeString> IrregularLexicon::irregular_variants(const PhonemeString& stem) const {
  std::vector<PhonemeString> out;
  for (const auto& c : changes_) {
    if (auto v = c.apply(stem); v && *v != stem && std::find(out.begin(), out.end(), *v) == out.end()) {
      out.push_back(std::move(*v));
    }
  }
  return out;
}

}  // namespace morph
