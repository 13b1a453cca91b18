#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphlab/dataset.hpp"
#include "morphlab/ed_model.hpp"
#include "morphlab/morphology.hpp"

namespace morph::exp {

using phon::PhonemeString;

/// Regular English past of `stem` under the default inventory.
PhonemeString regular_past(const PhonemeString& stem);

// ---------------------------------------------------------------------------
// Error taxonomy

enum class ErrorLabel { kCorrect, kBlend, kOverregularization, kOverirregularization, kOther };

std::string_view label_name(ErrorLabel label);

/// Priority: correct, blend, overregularization, overirregularization, other.
///  - blend: predicted is an irregular stem change of `stem` (the gold
///    irregular form or any attested change) followed by a regular suffix;
///  - overregularization: predicted is the regular past and gold is not;
///  - overirregularization: gold is the regular past and predicted is an
///    irregular stem change of `stem`.
ErrorLabel classify_error(const PhonemeString& stem, const PhonemeString& gold, const PhonemeString& predicted,
                          const IrregularLexicon& lexicon, const RegularRules& rules);

/// Irregular (lemma, form) pairs of one tag.
IrregularLexicon build_lexicon(std::span<const data::InflectionPair> pairs, data::Tag tag = data::Tag::kPast);

// ---------------------------------------------------------------------------
// Accuracy

struct Stratum {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

struct ItemResult {
  data::InflectionPair pair;
  std::optional<PhonemeString> predicted;  ///< empty when the output was not a phoneme string
  bool correct = false;
  ErrorLabel label = ErrorLabel::kOther;
};

struct AccuracyReport {
  Stratum all, regular, irregular;
  std::vector<ItemResult> items;

  std::size_t count(ErrorLabel label, std::optional<bool> regular = std::nullopt) const;
};

/// Scores predictions against gold pairs (same order).
AccuracyReport score(std::span<const data::InflectionPair> pairs,
                     std::span<const std::optional<PhonemeString>> predictions, const IrregularLexicon& lexicon,
                     const RegularRules& rules);

struct DecodeOptions {
  bool multitask = false;
  std::size_t beam = 12;
  std::size_t max_len = 32;
};

/// Exact match of the top-1 beam output against gold, stratified by regularity.
AccuracyReport accuracy(const ed::EdModel& model, std::span<const data::InflectionPair> pairs,
                        const IrregularLexicon& lexicon, const RegularRules& rules, const DecodeOptions& options = {});

/// Tab-separated error list: lemma, gold, predicted, tag, regularity, label.
std::string errors_tsv(const AccuracyReport& report, const phon::Inventory& inventory, bool include_correct = false);

// ---------------------------------------------------------------------------
// U-shapes

struct Oscillation {
  /// Epochs whose correctness differs from the previous recorded epoch.
  std::vector<std::size_t> change_points;
  /// A correct -> incorrect -> correct excursion exists.
  bool micro_u = false;
};

/// `correct[i]` is the status at `epochs[i]`; epochs default to 1, 2, ...
Oscillation detect_micro_ushape(const std::vector<bool>& correct, std::span<const std::size_t> epochs = {});

struct OutputChange {
  std::size_t epoch;
  ed::Symbols output;
};

/// Epochs at which the produced output differs from the previous epoch's.
std::vector<OutputChange> output_change_points(std::span<const ed::Symbols> outputs,
                                               std::span<const std::size_t> epochs);

struct MacroUShape {
  std::size_t peak_epoch = 0;
  double peak = 0.0;
  /// Lowest accuracy after the peak, and the drop from it.
  double trough_after_peak = 0.0;
  double dip = 0.0;
  /// Length of the initial run of epochs whose accuracy never decreases.
  std::size_t monotone_prefix = 0;
};

/// Descriptive only; carries no pass/fail threshold.
MacroUShape macro_ushape(std::span<const double> accuracy, std::span<const std::size_t> epochs);

// ---------------------------------------------------------------------------
// Statistics

struct Correlation {
  double rho = 0.0;
  /// One side has constant ranks; rho is NaN.
  bool degenerate = false;
};

/// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> average_ranks(std::span<const double> xs);

/// Pearson correlation of average ranks.
Correlation spearman_rho(std::span<const double> xs, std::span<const double> ys);

struct ChiSquared {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Pearson chi-square (1 df, no continuity correction) on the correct /
/// incorrect table of two systems.
ChiSquared chi_squared_2x2(std::size_t correct_a, std::size_t total_a, std::size_t correct_b, std::size_t total_b);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);
/// Survival function of the chi-square distribution.
double chi_squared_sf(double x, double dof);

// ---------------------------------------------------------------------------
// Wug test

struct WugItem {
  PhonemeString stem;
  PhonemeString regular_form;
  PhonemeString irregular_form;
  double human_regular = 0.0;
  double human_irregular = 0.0;
};

/// Columns: stem, regular form, irregular form, human p(regular), human p(irregular).
std::vector<WugItem> parse_wug_tsv(std::string_view text, const phon::Inventory& inventory);
std::vector<WugItem> load_wug_tsv(const std::filesystem::path& path, const phon::Inventory& inventory);

struct WugResult {
  Correlation regular;
  Correlation irregular;
  std::vector<double> model_regular;
  std::vector<double> model_irregular;
};

/// Correlates exp(sequence_log_prob) of each pre-chosen form with the human
/// production probabilities, regular and irregular pools separately. With
/// `pairwise`, the two scores of each stem are renormalized to sum to 1.
WugResult wug_eval(const ed::EdModel& model, std::span<const WugItem> items, bool multitask, bool pairwise = false);

// ---------------------------------------------------------------------------
// Curves and summary tables

struct Condition {
  std::string name;
  std::vector<ed::EpochStats> epochs;
};

/// condition,epoch,loss,accuracy,regular,irregular
std::string curves_csv(std::span<const Condition> conditions);

/// First epoch whose tracked accuracy reaches `threshold`.
std::optional<std::size_t> epochs_to_accuracy(std::span<const ed::EpochStats> stats, double threshold);

struct TableRow {
  std::string name;
  /// [all, regular, irregular][train, dev, test], in percent; NaN when absent.
  double cells[3][3];
};

/// Reference rows for the English past tense.
const std::vector<TableRow>& reference_rows();
/// The rule-learner baseline row; its scores are fixed constants.
const TableRow& baseline_row();

struct SplitReports {
  std::optional<AccuracyReport> train, dev, test;
};

TableRow make_row(std::string name, const SplitReports& reports);

/// Plain-text table with all/regular/irregular x train/dev/test columns.
/// A dagger marks cells whose difference from the baseline is significant
/// at p < 0.05 under chi_squared_2x2.
std::string format_table(std::span<const TableRow> rows, std::span<const SplitReports> reports = {});

}  // namespace morph::exp
