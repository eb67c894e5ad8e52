#include "winnowtc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "winnowtc/format.hpp"

namespace winnowtc {

FormatError::FormatError(const std::string& detail, std::size_t line)
    : FormatError(line ? "line " + std::to_string(line) + ": " + detail : detail, detail, line) {}

FormatError::FormatError(std::string message, std::string detail, std::size_t line)
    : std::runtime_error(message), detail_(std::move(detail)), line_(line) {}

FormatError FormatError::in_file(const std::string& file) const {
  std::string message = file + ":";
  if (line_) message += std::to_string(line_) + ":";
  return FormatError(message + " " + detail_, detail_, line_);
}

std::string_view to_string(StrengthMode mode) {
  switch (mode) {
    case StrengthMode::Binary: return "binary";
    case StrengthMode::Linear: return "linear";
    case StrengthMode::Sqrt: return "sqrt";
  }
  return "binary";
}

StrengthMode parse_strength_mode(std::string_view name) {
  if (name == "binary") return StrengthMode::Binary;
  if (name == "linear") return StrengthMode::Linear;
  if (name == "sqrt") return StrengthMode::Sqrt;
  throw std::invalid_argument("unknown strength mode '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- SparseVector

SparseVector::SparseVector(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!(e.strength > 0.0) || !std::isfinite(e.strength))
      throw std::invalid_argument("sparse vector strength must be finite and positive");
    if (i > 0 && entries_[i - 1].id >= e.id)
      throw std::invalid_argument("sparse vector ids must be strictly ascending");
  }
}

SparseVector SparseVector::from_unsorted(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
  return SparseVector(std::move(entries));
}

double SparseVector::total_strength() const noexcept {
  double total = 0.0;
  for (const auto& e : entries_) total += e.strength;
  return total;
}

SparseVector SparseVector::scaled(double factor) const {
  std::vector<Entry> out = entries_;
  for (auto& e : out) e.strength *= factor;
  return SparseVector(std::move(out));
}

// ------------------------------------------------------------------ tokenizing

std::vector<std::string> AlphaTokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t chars = 0;
  auto flush = [&] {
    if (chars >= 2) tokens.push_back(current);
    current.clear();
    chars = 0;
  };
  for (unsigned char c : text) {
    if (c < 0x80) {
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
        current.push_back(static_cast<char>(c | 0x20));
        ++chars;
      } else {
        flush();
      }
    } else {
      current.push_back(static_cast<char>(c));
      if ((c & 0xC0) != 0x80) ++chars;  // lead byte starts a code point
    }
  }
  flush();
  return tokens;
}

const Tokenizer& default_tokenizer() {
  static const AlphaTokenizer tokenizer;
  return tokenizer;
}

std::vector<std::string> tokenize(std::string_view text) {
  return default_tokenizer().tokenize(text);
}

// ------------------------------------------------------------------ vocabulary

Vocabulary::Vocabulary(std::vector<Entry> entries, std::int64_t min_frequency, double avg_active)
    : entries_(std::move(entries)), min_frequency_(min_frequency), avg_active_(avg_active) {
  if (min_frequency_ < 1) throw std::invalid_argument("min_frequency must be >= 1");
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].count < min_frequency_)
      throw std::invalid_argument("vocabulary entry '" + entries_[i].token +
                                  "' is below min_frequency");
    if (!index_.emplace(entries_[i].token, static_cast<FeatureId>(i)).second)
      throw std::invalid_argument("duplicate vocabulary token '" + entries_[i].token + "'");
  }
}

std::optional<FeatureId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::hash() const {
  std::ostringstream out;
  save(out);
  return to_hex(fnv1a64(out.str()));
}

void Vocabulary::save(std::ostream& out) const {
  out << "winnowtc-vocab v1 min_freq=" << min_frequency_
      << " avg_active=" << format_double(avg_active_) << '\n';
  for (std::size_t i = 0; i < entries_.size(); ++i)
    out << entries_[i].token << '\t' << i << '\t' << entries_[i].count << '\n';
}

namespace {

std::string_view header_value(std::string_view field, std::string_view key, std::size_t line) {
  if (field.substr(0, key.size()) != key || field.size() <= key.size() || field[key.size()] != '=')
    throw FormatError("expected '" + std::string(key) + "=...' in header", line);
  return field.substr(key.size() + 1);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Vocabulary Vocabulary::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty vocabulary file");
  strip_cr(line);
  auto head = split(line, ' ');
  if (head.size() != 4 || head[0] != "winnowtc-vocab" || head[1] != "v1")
    throw FormatError("bad vocabulary header", 1);
  std::int64_t min_freq = 0;
  double avg = 0.0;
  try {
    min_freq = parse_int(header_value(head[2], "min_freq", 1));
    avg = parse_double(header_value(head[3], "avg_active", 1));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what(), 1);
  }

  std::vector<Entry> entries;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw FormatError("expected token<TAB>id<TAB>count", lineno);
    std::int64_t id = 0, count = 0;
    try {
      id = parse_int(fields[1]);
      count = parse_int(fields[2]);
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what(), lineno);
    }
    if (id < 0 || static_cast<std::size_t>(id) != entries.size())
      throw FormatError("expected feature id " + std::to_string(entries.size()), lineno);
    entries.push_back(Entry{std::string(fields[0]), count});
  }
  try {
    return Vocabulary(std::move(entries), min_freq, avg);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save(out);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return load(in);
  } catch (const FormatError& e) {
    throw e.in_file(path.string());
  }
}

Vocabulary build_vocabulary(std::span<const RawDocument> docs, std::int64_t min_frequency,
                            const Tokenizer& tokenizer) {
  if (docs.empty()) throw std::invalid_argument("empty corpus");
  if (min_frequency < 1) throw std::invalid_argument("min_frequency must be >= 1");

  std::unordered_map<std::string, std::size_t> first_seen;
  std::vector<Vocabulary::Entry> counts;
  for (const auto& doc : docs) {
    for (auto& token : tokenizer.tokenize(doc.text)) {
      auto [it, inserted] = first_seen.emplace(token, counts.size());
      if (inserted) counts.push_back({std::move(token), 0});
      ++counts[it->second].count;
    }
  }

  std::vector<Vocabulary::Entry> kept;
  for (auto& e : counts)
    if (e.count >= min_frequency) kept.push_back(std::move(e));
  if (kept.empty()) throw std::invalid_argument("empty vocabulary: no token reaches min_frequency");

  std::unordered_set<std::string> retained;
  retained.reserve(kept.size());
  for (const auto& e : kept) retained.insert(e.token);

  std::size_t active_total = 0;
  for (const auto& doc : docs) {
    std::unordered_set<std::string> seen;
    for (auto& token : tokenizer.tokenize(doc.text))
      if (retained.count(token)) seen.insert(std::move(token));
    active_total += seen.size();
  }
  double avg = static_cast<double>(active_total) / static_cast<double>(docs.size());
  return Vocabulary(std::move(kept), min_frequency, avg);
}

// ----------------------------------------------------------------- vectorizing

SparseVector vectorize_tokens(std::span<const std::string> tokens, const Vocabulary& vocab,
                              StrengthMode mode) {
  std::map<FeatureId, std::int64_t> counts;
  for (const auto& token : tokens)
    if (auto id = vocab.find(token)) ++counts[*id];

  std::vector<SparseVector::Entry> entries;
  entries.reserve(counts.size());
  for (auto [id, n] : counts) {
    double strength = 1.0;
    switch (mode) {
      case StrengthMode::Binary: strength = 1.0; break;
      case StrengthMode::Linear: strength = static_cast<double>(n); break;
      case StrengthMode::Sqrt: strength = std::sqrt(static_cast<double>(n)); break;
    }
    entries.push_back({id, strength});
  }
  return SparseVector(std::move(entries));
}

SparseVector vectorize(const RawDocument& doc, const Vocabulary& vocab, StrengthMode mode,
                       const Tokenizer& tokenizer) {
  auto tokens = tokenizer.tokenize(doc.text);
  return vectorize_tokens(tokens, vocab, mode);
}

SparseVector normalize(const SparseVector& v) {
  if (v.empty()) return v;
  const double total = v.total_strength();
  std::vector<SparseVector::Entry> out(v.begin(), v.end());
  for (auto& e : out) e.strength /= total;
  return SparseVector(std::move(out));
}

// ---------------------------------------------------------------- corpus files

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\' || i + 1 == text.size()) {
      out.push_back(text[i]);
      continue;
    }
    switch (text[i + 1]) {
      case 't': out.push_back('\t'); ++i; break;
      case 'n': out.push_back('\n'); ++i; break;
      case 'r': out.push_back('\r'); ++i; break;
      case '\\': out.push_back('\\'); ++i; break;
      default: out.push_back('\\');
    }
  }
  return out;
}

std::vector<RawDocument> read_corpus(std::istream& in) {
  std::vector<RawDocument> docs;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw FormatError("expected <id> TAB <labels> TAB <text>", lineno);
    if (fields[0].empty()) throw FormatError("empty document id", lineno);
    RawDocument doc;
    doc.id = std::string(fields[0]);
    if (!ids.insert(doc.id).second) throw FormatError("duplicate document id '" + doc.id + "'", lineno);
    for (auto label : split(fields[1], ','))
      if (!label.empty()) doc.labels.emplace(label);
    doc.text = unescape_text(fields[2]);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<RawDocument> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return read_corpus(in);
  } catch (const FormatError& e) {
    throw e.in_file(path.string());
  }
}

void write_corpus(std::ostream& out, std::span<const RawDocument> docs) {
  for (const auto& doc : docs) {
    out << doc.id << '\t';
    bool first = true;
    for (const auto& label : doc.labels) {
      if (!first) out << ',';
      out << label;
      first = false;
    }
    out << '\t' << escape_text(doc.text) << '\n';
  }
}

void write_corpus(const std::filesystem::path& path, std::span<const RawDocument> docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_corpus(out, docs);
}

std::vector<std::string> collect_categories(std::span<const RawDocument> docs) {
  std::set<std::string> all;
  for (const auto& doc : docs) all.insert(doc.labels.begin(), doc.labels.end());
  return {all.begin(), all.end()};
}

}  // namespace winnowtc
