#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphlab/ed_model.hpp"
#include "morphlab/phonology.hpp"

namespace morph::data {

using phon::PhonemeString;

enum class Tag : std::uint8_t { kPast, kGerund, kParticiple, kThirdSingular };

inline constexpr std::array<Tag, 4> kAllTags = {Tag::kPast, Tag::kGerund, Tag::kParticiple, Tag::kThirdSingular};

/// "PST", "GER", "PTCP", "3SG".
std::string_view tag_name(Tag tag);
std::optional<Tag> parse_tag(std::string_view name);
/// Input-alphabet symbol for a tag, e.g. "<PST>".
std::string tag_symbol(Tag tag);
std::vector<std::string> tag_symbols();

struct InflectionPair {
  PhonemeString lemma;
  PhonemeString form;
  Tag tag = Tag::kPast;
  bool regular = true;
  /// Parsed when present, never used for training.
  std::optional<double> frequency;

  friend bool operator==(const InflectionPair&, const InflectionPair&) = default;
};

/// Tab-separated rows: lemma, form, tag, regular|irregular, optional frequency.
/// Blank lines and lines starting with '#' are skipped; rows are numbered
/// from 1 by physical line.
std::vector<InflectionPair> parse_tsv(std::string_view text, const phon::Inventory& inventory);
std::vector<InflectionPair> load_tsv(const std::filesystem::path& path, const phon::Inventory& inventory);
std::string format_tsv(std::span<const InflectionPair> pairs, const phon::Inventory& inventory);
void save_tsv(const std::filesystem::path& path, std::span<const InflectionPair> pairs,
              const phon::Inventory& inventory);

struct SplitCorpus {
  std::vector<InflectionPair> train, dev, test;
  std::uint64_t seed = 0;
};

/// Partitions lemma types (not pairs) so every tag of a lemma lands in the
/// same part. Part sizes are round(n * ratio) for train and dev; test takes
/// the rest. Pairs keep their input order within each part.
SplitCorpus split(std::span<const InflectionPair> pairs, std::uint64_t seed,
                  std::array<double, 3> ratios = {0.8, 0.1, 0.1});

/// Distinct lemmas in first-seen order.
std::vector<PhonemeString> lemmas(std::span<const InflectionPair> pairs);

std::vector<InflectionPair> filter_tag(std::span<const InflectionPair> pairs, Tag tag);

/// The vocabulary shared by single- and multi-task models: all phonemes plus
/// the four tag symbols.
ed::Vocabulary make_vocabulary(const phon::Inventory& inventory);

/// Lemma phonemes plus the tag symbol (multitask) or alone, mapped to the form
/// phonemes plus EOS.
ed::TrainItem augment_multitask(const InflectionPair& pair, const ed::Vocabulary& vocab, bool multitask = true);

/// One item per pair. With `tracked`, only pairs of that tag count towards
/// per-epoch training accuracy.
std::vector<ed::TrainItem> make_items(std::span<const InflectionPair> pairs, const ed::Vocabulary& vocab,
                                      bool multitask, std::optional<Tag> tracked = Tag::kPast);

struct SynthConfig {
  std::size_t types = 4039;
  /// Lemmas whose past tense is irregular. Zero gives a fully regular corpus.
  std::size_t irregular = 168;
  std::uint64_t seed = 0;
};

/// English-like synthetic verbs with all four tags per lemma, in lemma order.
/// Regular forms follow the suffix rules; irregular lemmas come from a short
/// suppletive list and from ablaut islands (sing/sang/sung, cling/clung,
/// drive/drove/driven, blow/blew/blown, ...). Requires Inventory::english()
/// symbols.
std::vector<InflectionPair> synth_corpus(const SynthConfig& config,
                                         const phon::Inventory& inventory = phon::Inventory::english());

}  // namespace morph::data
