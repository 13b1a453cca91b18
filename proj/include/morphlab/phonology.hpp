#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace morph::phon {

using PhonemeId = std::uint16_t;

/// Index used for the word-edge symbol inside Wickelphones.
inline constexpr PhonemeId kBoundary = 0xFFFF;
inline constexpr std::string_view kBoundarySymbol = "#";

/// Ordered set of IPA phoneme symbols. Symbols may span several code points
/// ("tʃ", "oʊ"); the boundary "#" is never a member.
class Inventory {
 public:
  explicit Inventory(std::vector<std::string> symbols);

  /// One symbol per line; blank lines are ignored.
  static Inventory parse(std::string_view text);
  static Inventory load(const std::filesystem::path& path);
  /// General-American style inventory used by the synthetic corpus.
  static const Inventory& english();

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(PhonemeId id) const;
  std::optional<PhonemeId> find(std::string_view symbol) const;
  /// Throws UnknownSymbol when absent.
  PhonemeId at(std::string_view symbol) const;
  const std::vector<std::string>& symbols() const { return symbols_; }
  std::size_t longest_symbol_bytes() const { return longest_; }

  std::string serialize() const;

  friend bool operator==(const Inventory& a, const Inventory& b) { return a.symbols_ == b.symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, PhonemeId> index_;
  std::size_t longest_ = 0;
};

/// A word as a sequence of inventory indices. Boundaries are implicit.
struct PhonemeString {
  std::vector<PhonemeId> ids;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
  PhonemeId operator[](std::size_t i) const { return ids[i]; }
  PhonemeString& operator+=(const PhonemeString& other) {
    ids.insert(ids.end(), other.ids.begin(), other.ids.end());
    return *this;
  }
  friend PhonemeString operator+(PhonemeString a, const PhonemeString& b) { return a += b; }
  friend auto operator<=>(const PhonemeString&, const PhonemeString&) = default;
};

enum class TokenizeMode { kStrict, kLenient };

/// Longest-match, left-to-right segmentation. ASCII whitespace separates
/// symbols and is otherwise ignored. In lenient mode unknown code points are
/// dropped instead of raising UnknownSymbol.
PhonemeString tokenize(std::string_view raw, const Inventory& inventory,
                       TokenizeMode mode = TokenizeMode::kStrict);

std::string render(const PhonemeString& word, const Inventory& inventory);

struct Wickelphone {
  PhonemeId left;
  PhonemeId center;
  PhonemeId right;
  friend auto operator<=>(const Wickelphone&, const Wickelphone&) = default;
};

/// The set of boundary-padded trigrams of a word, sorted and deduplicated.
std::vector<Wickelphone> phi(const PhonemeString& word);

std::string render(const Wickelphone& wp, const Inventory& inventory);

enum class FeatureValue : std::int8_t { kMinus = -1, kZero = 0, kPlus = 1 };

/// One attested non-zero feature value, e.g. "+voiced".
struct ActiveValue {
  std::size_t feature;
  FeatureValue value;
  friend auto operator<=>(const ActiveValue&, const ActiveValue&) = default;
};

/// Ternary feature rows for every phoneme of an inventory plus the boundary.
///
/// Wickelfeatures are enumerated as the cross product of all active values
/// attested anywhere in the table, taken once per trigram slot, so the
/// vector length is (number of active values)^3.
class FeatureTable {
 public:
  FeatureTable(std::vector<std::string> feature_names,
               std::vector<std::vector<FeatureValue>> phoneme_rows,
               std::vector<FeatureValue> boundary_row);

  /// TSV: header row of feature names (first cell is a label and ignored),
  /// then one row per phoneme (and "#") with values in {+,-,0}.
  static FeatureTable parse(std::string_view text, const Inventory& inventory);
  static FeatureTable load(const std::filesystem::path& path, const Inventory& inventory);
  /// Default 16-feature table for Inventory::english().
  static const FeatureTable& english();

  const std::vector<std::string>& feature_names() const { return names_; }
  std::size_t phoneme_count() const { return rows_.size(); }
  FeatureValue value(PhonemeId phoneme, std::size_t feature) const;

  const std::vector<ActiveValue>& active_values() const { return active_; }
  /// Indices into active_values() that the phoneme (or kBoundary) carries.
  std::span<const std::uint32_t> active_of(PhonemeId phoneme) const;

  std::size_t wickelfeature_count() const;
  std::size_t triple_index(std::uint32_t left, std::uint32_t center, std::uint32_t right) const {
    const std::size_t n = active_.size();
    return (static_cast<std::size_t>(left) * n + center) * n + right;
  }
  /// Human-readable triple, e.g. "<+vowel,+unvoiced,+interrupted>".
  std::string describe(std::size_t wickelfeature) const;
  std::optional<std::size_t> find_triple(std::string_view left, std::string_view center,
                                         std::string_view right) const;

  std::string serialize(const Inventory& inventory) const;

 private:
  const std::vector<FeatureValue>& row(PhonemeId phoneme) const;
  std::string describe_value(std::uint32_t active) const;

  std::vector<std::string> names_;
  std::vector<std::vector<FeatureValue>> rows_;
  std::vector<FeatureValue> boundary_;
  std::vector<ActiveValue> active_;
  std::vector<std::vector<std::uint32_t>> active_by_phoneme_;
  std::vector<std::uint32_t> active_boundary_;
};

/// A point of {-1,+1}^|F|.
class WickelfeatureVector {
 public:
  explicit WickelfeatureVector(std::size_t size) : bits_(size, -1) {}
  /// Every entry must be -1 or +1.
  static WickelfeatureVector from_bits(std::vector<std::int8_t> bits);

  std::size_t size() const { return bits_.size(); }
  std::int8_t operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool on) { bits_[i] = on ? 1 : -1; }
  std::size_t count_on() const;
  const std::vector<std::int8_t>& bits() const { return bits_; }

  friend bool operator==(const WickelfeatureVector&, const WickelfeatureVector&) = default;

 private:
  std::vector<std::int8_t> bits_;
};

WickelfeatureVector f(std::span<const Wickelphone> wickelphones, const FeatureTable& table);

/// f(phi(word)).
WickelfeatureVector pi(const PhonemeString& word, const FeatureTable& table);

std::size_t hamming(const WickelfeatureVector& a, const WickelfeatureVector& b);

}  // namespace morph::phon
