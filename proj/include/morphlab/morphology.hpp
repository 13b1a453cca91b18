#pragma once

#include <array>
#include <optional>
#include <vector>

#include "morphlab/phonology.hpp"

namespace morph {

using phon::PhonemeId;
using phon::PhonemeString;

/// English suffix allomorphy, resolved against an inventory that contains
/// the General-American symbols used by Inventory::english().
class RegularRules {
 public:
  explicit RegularRules(const phon::Inventory& inventory);

  /// [ɪd] after t/d, [t] after a voiceless consonant, [d] otherwise.
  PhonemeString past(const PhonemeString& stem) const;
  /// [ɪz] after a sibilant, [s] after a voiceless consonant, [z] otherwise.
  PhonemeString third_singular(const PhonemeString& stem) const;
  PhonemeString gerund(const PhonemeString& stem) const;

  /// The three past allomorphs in the order [ɪd], [d], [t].
  const std::array<PhonemeString, 3>& past_suffixes() const { return past_suffixes_; }

  bool is_vowel(PhonemeId p) const;
  bool is_voiceless(PhonemeId p) const;
  bool is_sibilant(PhonemeId p) const;
  /// Last vowel and everything after it; the whole word when it has no vowel.
  PhonemeString rime(const PhonemeString& word) const;

  const phon::Inventory& inventory() const { return *inventory_; }

 private:
  const phon::Inventory* inventory_;
  std::vector<bool> vowel_;
  std::vector<bool> voiceless_;
  std::vector<bool> sibilant_;
  PhonemeId t_, d_;
  PhonemeString id_suffix_, iz_suffix_, ing_suffix_, s_suffix_, z_suffix_;
  std::array<PhonemeString, 3> past_suffixes_;
};

/// Rewrite of a word-final substring, e.g. ɪŋ -> æŋ for sing/sang.
struct StemChange {
  PhonemeString from;
  PhonemeString to;

  /// Strips the longest common prefix of stem and form.
  static StemChange between(const PhonemeString& stem, const PhonemeString& form);
  std::optional<PhonemeString> apply(const PhonemeString& stem) const;
  bool is_identity() const { return from == to; }

  friend auto operator<=>(const StemChange&, const StemChange&) = default;
};

/// Attested irregular (stem, form) pairs and the stem changes they imply.
class IrregularLexicon {
 public:
  void add(const PhonemeString& stem, const PhonemeString& form);

  const std::vector<std::pair<PhonemeString, PhonemeString>>& entries() const { return entries_; }
  /// Distinct non-identity changes, in first-seen order.
  const std::vector<StemChange>& changes() const { return changes_; }
  /// Every distinct result of applying an attested change to `stem`.
  std::vector<PhonemeString> irregular_variants(const PhonemeString& stem) const;
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<std::pair<PhonemeString, PhonemeString>> entries_;
  std::vector<StemChange> changes_;
};

}  // namespace morph
