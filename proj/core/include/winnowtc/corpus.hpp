// Document ingestion: tokenizing, vocabulary construction and conversion of
// documents into sparse strength vectors.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace winnowtc {

using FeatureId = std::uint32_t;
using LabelSet = std::set<std::string>;

/// Raised for malformed corpus, vocabulary or model files. `line()` is
/// 1-based, 0 when the problem is not tied to a line.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& detail, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }
  /// Same error, reported as `<file>:<line>: <detail>`.
  FormatError in_file(const std::string& file) const;

 private:
  FormatError(std::string message, std::string detail, std::size_t line);
  std::string detail_;
  std::size_t line_;
};

struct RawDocument {
  std::string id;
  std::string text;
  LabelSet labels;  // empty: negative example for every category
};

/// How the occurrence count n(f,d) of a feature becomes its strength.
enum class StrengthMode { Binary, Linear, Sqrt };

std::string_view to_string(StrengthMode mode);
StrengthMode parse_strength_mode(std::string_view name);

/// Sparse document vector: (feature, strength) pairs, strictly ascending by
/// feature id, every strength finite and > 0.
class SparseVector {
 public:
  struct Entry {
    FeatureId id;
    double strength;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  SparseVector() = default;
  /// Validates ordering and positivity; throws std::invalid_argument.
  explicit SparseVector(std::vector<Entry> entries);
  /// Sorts first; duplicate ids are still rejected.
  static SparseVector from_unsorted(std::vector<Entry> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  std::span<const Entry> entries() const noexcept { return entries_; }

  double total_strength() const noexcept;
  SparseVector scaled(double factor) const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Splits text into tokens. Replaceable so a lemmatizing pipeline can be
/// plugged in without touching the rest of the corpus code.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
};

/// Lowercased maximal alphabetic runs of at least two characters. ASCII
/// letters are folded to lowercase; any non-ASCII UTF-8 sequence counts as
/// a letter and is kept verbatim. Digits and punctuation separate tokens.
class AlphaTokenizer final : public Tokenizer {
 public:
  std::vector<std::string> tokenize(std::string_view text) const override;
};

std::vector<std::string> tokenize(std::string_view text);
const Tokenizer& default_tokenizer();

class Vocabulary {
 public:
  struct Entry {
    std::string token;
    std::int64_t count;
  };

  Vocabulary() = default;
  Vocabulary(std::vector<Entry> entries, std::int64_t min_frequency, double avg_active);

  std::size_t size() const noexcept { return entries_.size(); }
  std::int64_t min_frequency() const noexcept { return min_frequency_; }
  /// Mean number of distinct retained tokens per training document.
  double avg_active() const noexcept { return avg_active_; }

  std::optional<FeatureId> find(std::string_view token) const;
  const Entry& entry(FeatureId id) const { return entries_.at(id); }
  std::span<const Entry> entries() const noexcept { return entries_; }

  /// FNV-1a over the serialized form; embedded in model files.
  std::string hash() const;

  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, FeatureId> index_;
  std::int64_t min_frequency_ = 1;
  double avg_active_ = 0.0;
};

inline constexpr std::int64_t kDefaultMinFrequency = 3;

/// Keeps tokens whose total occurrence count over `docs` reaches
/// `min_frequency`; ids follow first occurrence.
Vocabulary build_vocabulary(std::span<const RawDocument> docs,
                            std::int64_t min_frequency = kDefaultMinFrequency,
                            const Tokenizer& tokenizer = default_tokenizer());

SparseVector vectorize(const RawDocument& doc, const Vocabulary& vocab, StrengthMode mode,
                       const Tokenizer& tokenizer = default_tokenizer());
SparseVector vectorize_tokens(std::span<const std::string> tokens, const Vocabulary& vocab,
                              StrengthMode mode);

/// Divides every strength by the vector's total strength.
SparseVector normalize(const SparseVector& v);

// Corpus files: `<id> TAB <label,label,...> TAB <escaped text>` per line.
std::string escape_text(std::string_view text);
std::string unescape_text(std::string_view text);

std::vector<RawDocument> read_corpus(std::istream& in);
std::vector<RawDocument> read_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, std::span<const RawDocument> docs);
void write_corpus(const std::filesystem::path& path, std::span<const RawDocument> docs);

/// Sorted union of all labels in `docs`.
std::vector<std::string> collect_categories(std::span<const RawDocument> docs);

}  // namespace winnowtc
