#pragma once

#include <span>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "morphlab/ed_model.hpp"

namespace morph::testing {

/// Phonemes "a", "b", ... with no tags.
inline ed::Vocabulary letter_vocab(std::size_t phonemes, std::vector<std::string> tags = {}) {
  std::vector<std::string> symbols;
  for (std::size_t i = 0; i < phonemes; ++i) symbols.emplace_back(1, static_cast<char>('a' + i));
  return ed::Vocabulary(std::move(symbols), std::move(tags));
}

inline ed::EdConfig tiny_config(std::uint64_t seed = 0, std::size_t dim = 8, std::size_t layers = 2) {
  ed::EdConfig c;
  c.embedding = dim;
  c.hidden = dim;
  c.layers = layers;
  c.dropout = 0.0;
  c.seed = seed;
  return c;
}

/// Redraws every parameter, biases included, from uniform(-scale, scale) so
/// that output distributions are far from uniform.
inline void scramble(ed::EdModel& model, std::uint64_t seed, double scale) {
  nn::Rng rng(seed);
  for (auto& p : model.params()) {
    for (double& v : p.value.data()) v = rng.uniform(-scale, scale);
  }
}

inline ed::Symbols random_input(nn::Rng& rng, const ed::Vocabulary& vocab, std::size_t min_len, std::size_t max_len) {
  const std::size_t n = min_len + rng.below(max_len - min_len + 1);
  ed::Symbols out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(ed::Vocabulary::kEos + 1 + static_cast<int>(rng.below(vocab.phoneme_count())));
  return out;
}

/// Output symbol list (without EOS) for every phoneme string of length <= n.
inline std::vector<ed::Symbols> all_strings(const ed::Vocabulary& vocab, std::size_t n) {
  std::vector<ed::Symbols> out{{}};
  std::vector<ed::Symbols> frontier{{}};
  for (std::size_t len = 1; len <= n; ++len) {
    std::vector<ed::Symbols> next;
    for (const auto& s : frontier) {
      for (std::size_t p = 0; p < vocab.phoneme_count(); ++p) {
        auto t = s;
        t.push_back(ed::Vocabulary::kEos + 1 + static_cast<int>(p));
        next.push_back(t);
        out.push_back(t);
      }
    }
    frontier = std::move(next);
  }
  return out;
}

inline ed::Symbols with_eos(ed::Symbols s) {
  s.push_back(ed::Vocabulary::kEos);
  return s;
}

/// Finite-difference check of the mean NLL gradient over `items`.
inline GradCheck ed_gradient_check(ed::EdModel& model, std::span<const ed::TrainItem> items, double h = 1e-5) {
  model.params().zero_grad();
  for (const auto& item : items) {
    nn::Tape tape;
    ed::Session s(model, tape, nullptr);
    const nn::Var lp = s.sequence_log_prob(item.input, item.output);
    tape.backward(tape.scale(lp, -1.0 / static_cast<double>(items.size())));
  }
  return check_gradients(model.params(), [&] { return ed::mean_nll(model, items); }, h);
}

}  // namespace morph::testing
