#include "morphlab/phonology.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "morphlab/errors.hpp"

namespace morph::phon {

namespace {

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find('\t', start);
    if (end == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, end - start)));
    start = end + 1;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

FeatureValue parse_value(std::string_view cell, std::size_t row) {
  if (cell == "+") return FeatureValue::kPlus;
  if (cell == "-" || cell == "\xE2\x88\x92") return FeatureValue::kMinus;  // ASCII or U+2212
  if (cell == "0") return FeatureValue::kZero;
  throw ParseError(row, "feature value must be +, - or 0, got '" + std::string(cell) + "'");
}

char value_char(FeatureValue v) {
  switch (v) {
    case FeatureValue::kPlus: return '+';
    case FeatureValue::kMinus: return '-';
    case FeatureValue::kZero: return '0';
  }
  return '0';
}

}  // namespace

// ---------------------------------------------------------------------------
// Inventory

Inventory::Inventory(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.size() >= kBoundary) throw Error("inventory too large");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    const std::string& s = symbols_[i];
    if (s.empty()) throw Error("inventory symbol " + std::to_string(i) + " is empty");
    if (s == kBoundarySymbol) throw Error("the boundary symbol '#' cannot be an inventory phoneme");
    if (s.find_first_of(" \t\r\n") != std::string::npos) {
      throw Error("inventory symbol '" + s + "' contains whitespace");
    }
    if (!index_.emplace(s, static_cast<PhonemeId>(i)).second) {
      throw Error("duplicate inventory symbol '" + s + "'");
    }
    longest_ = std::max(longest_, s.size());
  }
}

Inventory Inventory::parse(std::string_view text) {
  std::vector<std::string> symbols;
  for (std::string_view line : split_lines(text)) {
    line = trim(line);
    if (!line.empty()) symbols.emplace_back(line);
  }
  return Inventory(std::move(symbols));
}

Inventory Inventory::load(const std::filesystem::path& path) { return parse(read_file(path)); }

const std::string& Inventory::symbol(PhonemeId id) const {
  if (id >= symbols_.size()) throw Error("phoneme index out of range: " + std::to_string(id));
  return symbols_[id];
}

std::optional<PhonemeId> Inventory::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PhonemeId Inventory::at(std::string_view symbol) const {
  if (auto id = find(symbol)) return *id;
  throw UnknownSymbol(std::string(symbol), 0);
}

std::string Inventory::serialize() const {
  std::string out;
  for (const auto& s : symbols_) {
    out += s;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tokenization

PhonemeString tokenize(std::string_view raw, const Inventory& inventory, TokenizeMode mode) {
  PhonemeString out;
  std::size_t pos = 0;
  std::size_t codepoint = 0;
  while (pos < raw.size()) {
    const char c = raw[pos];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
      ++codepoint;
      continue;
    }
    const std::size_t max_len = std::min(inventory.longest_symbol_bytes(), raw.size() - pos);
    bool matched = false;
    for (std::size_t len = max_len; len > 0; --len) {
      if (auto id = inventory.find(raw.substr(pos, len))) {
        out.ids.push_back(*id);
        for (std::size_t i = pos; i < pos + len; ++i) {
          if ((static_cast<unsigned char>(raw[i]) & 0xC0) != 0x80) ++codepoint;
        }
        pos += len;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(c)), raw.size() - pos);
    if (mode == TokenizeMode::kStrict) throw UnknownSymbol(std::string(raw.substr(pos, len)), codepoint);
    pos += len;
    ++codepoint;
  }
  return out;
}

std::string render(const PhonemeString& word, const Inventory& inventory) {
  std::string out;
  for (PhonemeId id : word.ids) out += inventory.symbol(id);
  return out;
}

// ---------------------------------------------------------------------------
// Wickelphones

std::vector<Wickelphone> phi(const PhonemeString& word) {
  std::vector<Wickelphone> out;
  const std::size_t n = word.size();
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PhonemeId left = i == 0 ? kBoundary : word[i - 1];
    const PhonemeId right = i + 1 == n ? kBoundary : word[i + 1];
    out.push_back({left, word[i], right});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string render(const Wickelphone& wp, const Inventory& inventory) {
  auto sym = [&](PhonemeId id) {
    return id == kBoundary ? std::string(kBoundarySymbol) : inventory.symbol(id);
  };
  return sym(wp.left) + sym(wp.center) + sym(wp.right);
}

// ---------------------------------------------------------------------------
// FeatureTable

FeatureTable::FeatureTable(std::vector<std::string> feature_names,
                           std::vector<std::vector<FeatureValue>> phoneme_rows,
                           std::vector<FeatureValue> boundary_row)
    : names_(std::move(feature_names)), rows_(std::move(phoneme_rows)), boundary_(std::move(boundary_row)) {
  const std::size_t width = names_.size();
  if (width == 0) throw Error("feature table has no features");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != width) {
      throw Error("feature row " + std::to_string(i) + " has " + std::to_string(rows_[i].size()) +
                  " values, expected " + std::to_string(width));
    }
  }
  if (boundary_.size() != width) throw Error("boundary feature row has the wrong length");

  std::set<ActiveValue> attested;
  auto collect = [&](const std::vector<FeatureValue>& row) {
    for (std::size_t j = 0; j < width; ++j) {
      if (row[j] != FeatureValue::kZero) attested.insert({j, row[j]});
    }
  };
  for (const auto& row : rows_) collect(row);
  collect(boundary_);
  active_.assign(attested.begin(), attested.end());

  auto actives = [&](const std::vector<FeatureValue>& row) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t a = 0; a < active_.size(); ++a) {
      if (row[active_[a].feature] == active_[a].value) out.push_back(a);
    }
    return out;
  };
  active_by_phoneme_.reserve(rows_.size());
  for (const auto& row : rows_) active_by_phoneme_.push_back(actives(row));
  active_boundary_ = actives(boundary_);
}

FeatureTable FeatureTable::parse(std::string_view text, const Inventory& inventory) {
  std::vector<std::string> names;
  std::vector<std::optional<std::vector<FeatureValue>>> rows(inventory.size());
  std::optional<std::vector<FeatureValue>> boundary;
  bool have_header = false;
  std::size_t row_number = 0;
  for (std::string_view line : split_lines(text)) {
    ++row_number;
    if (trim(line).empty()) continue;
    auto cells = split_tabs(line);
    if (!have_header) {
      for (std::size_t i = 1; i < cells.size(); ++i) names.emplace_back(cells[i]);
      have_header = true;
      continue;
    }
    if (cells.size() != names.size() + 1) {
      throw ParseError(row_number, "expected " + std::to_string(names.size() + 1) + " cells, got " +
                                       std::to_string(cells.size()));
    }
    std::vector<FeatureValue> values;
    values.reserve(names.size());
    for (std::size_t i = 1; i < cells.size(); ++i) values.push_back(parse_value(cells[i], row_number));
    const std::string_view symbol = cells[0];
    if (symbol == kBoundarySymbol) {
      if (boundary) throw ParseError(row_number, "duplicate row for '#'");
      boundary = std::move(values);
      continue;
    }
    auto id = inventory.find(symbol);
    if (!id) throw ParseError(row_number, "symbol '" + std::string(symbol) + "' is not in the inventory");
    if (rows[*id]) throw ParseError(row_number, "duplicate row for '" + std::string(symbol) + "'");
    rows[*id] = std::move(values);
  }
  if (!have_header) throw ParseError(0, "feature table is empty");
  std::vector<std::vector<FeatureValue>> dense;
  dense.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]) throw Error("feature table has no row for '" + inventory.symbol(static_cast<PhonemeId>(i)) + "'");
    dense.push_back(std::move(*rows[i]));
  }
  if (!boundary) throw Error("feature table has no row for '#'");
  return FeatureTable(std::move(names), std::move(dense), std::move(*boundary));
}

FeatureTable FeatureTable::load(const std::filesystem::path& path, const Inventory& inventory) {
  return parse(read_file(path), inventory);
}

const std::vector<FeatureValue>& FeatureTable::row(PhonemeId phoneme) const {
  if (phoneme == kBoundary) return boundary_;
  if (phoneme >= rows_.size()) throw Error("phoneme index out of range for feature table");
  return rows_[phoneme];
}

FeatureValue FeatureTable::value(PhonemeId phoneme, std::size_t feature) const {
  return row(phoneme).at(feature);
}

std::span<const std::uint32_t> FeatureTable::active_of(PhonemeId phoneme) const {
  if (phoneme == kBoundary) return active_boundary_;
  if (phoneme >= active_by_phoneme_.size()) throw Error("phoneme index out of range for feature table");
  return active_by_phoneme_[phoneme];
}

std::size_t FeatureTable::wickelfeature_count() const {
  const std::size_t n = active_.size();
  return n * n * n;
}

std::string FeatureTable::describe_value(std::uint32_t active) const {
  const ActiveValue& a = active_.at(active);
  return std::string(1, value_char(a.value)) + names_[a.feature];
}

std::string FeatureTable::describe(std::size_t wickelfeature) const {
  const std::size_t n = active_.size();
  const auto right = static_cast<std::uint32_t>(wickelfeature % n);
  const auto center = static_cast<std::uint32_t>((wickelfeature / n) % n);
  const auto left = static_cast<std::uint32_t>(wickelfeature / (n * n));
  return "<" + describe_value(left) + "," + describe_value(center) + "," + describe_value(right) + ">";
}

std::optional<std::size_t> FeatureTable::find_triple(std::string_view left, std::string_view center,
                                                     std::string_view right) const {
  auto lookup = [&](std::string_view label) -> std::optional<std::uint32_t> {
    for (std::uint32_t a = 0; a < active_.size(); ++a) {
      if (describe_value(a) == label) return a;
    }
    return std::nullopt;
  };
  auto l = lookup(left);
  auto c = lookup(center);
  auto r = lookup(right);
  if (!l || !c || !r) return std::nullopt;
  return triple_index(*l, *c, *r);
}

std::string FeatureTable::serialize(const Inventory& inventory) const {
  std::string out = "phoneme";
  for (const auto& n : names_) out += "\t" + n;
  out += '\n';
  auto emit = [&](const std::string& sym, const std::vector<FeatureValue>& row) {
    out += sym;
    for (FeatureValue v : row) {
      out += '\t';
      out += value_char(v);
    }
    out += '\n';
  };
  for (std::size_t i = 0; i < rows_.size(); ++i) emit(inventory.symbol(static_cast<PhonemeId>(i)), rows_[i]);
  emit(std::string(kBoundarySymbol), boundary_);
  return out;
}

// ---------------------------------------------------------------------------
// Wickelfeature encoding

WickelfeatureVector WickelfeatureVector::from_bits(std::vector<std::int8_t> bits) {
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 1 && bits[i] != -1) {
      throw Error("wickelfeature entry " + std::to_string(i) + " is not -1 or +1");
    }
  }
  WickelfeatureVector v(0);
  v.bits_ = std::move(bits);
  return v;
}

std::size_t WickelfeatureVector::count_on() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::int8_t{1}));
}

WickelfeatureVector f(std::span<const Wickelphone> wickelphones, const FeatureTable& table) {
  WickelfeatureVector out(table.wickelfeature_count());
  for (const Wickelphone& wp : wickelphones) {
    auto ls = table.active_of(wp.left);
    auto cs = table.active_of(wp.center);
    auto rs = table.active_of(wp.right);
    for (auto l : ls)
      for (auto c : cs)
        for (auto r : rs) out.set(table.triple_index(l, c, r), true);
  }
  return out;
}

WickelfeatureVector pi(const PhonemeString& word, const FeatureTable& table) {
  const auto wickelphones = phi(word);
  return f(wickelphones, table);
}

std::size_t hamming(const WickelfeatureVector& a, const WickelfeatureVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("hamming: vectors differ in length");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

}  // namespace morph::phon
