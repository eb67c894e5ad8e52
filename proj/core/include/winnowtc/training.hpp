// Multi-epoch mistake-driven training with the threshold range and one-shot
// feature filtering.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "winnowtc/corpus.hpp"
#include "winnowtc/model.hpp"

namespace winnowtc {

/// Non-owning view of labeled examples. Vectors are shared across the
/// one-vs-rest problems of a corpus; only the label column differs.
class ExampleView {
 public:
  ExampleView(std::span<const SparseVector> vectors, std::span<const std::uint8_t> labels);

  std::size_t size() const noexcept { return vectors_.size(); }
  bool empty() const noexcept { return vectors_.empty(); }
  const SparseVector& vector(std::size_t i) const { return vectors_[i]; }
  bool label(std::size_t i) const { return labels_[i] != 0; }

 private:
  std::span<const SparseVector> vectors_;
  std::span<const std::uint8_t> labels_;
};

struct ExampleSet {
  std::vector<SparseVector> vectors;
  std::vector<std::uint8_t> labels;

  void add(SparseVector v, bool label) {
    vectors.push_back(std::move(v));
    labels.push_back(label ? 1 : 0);
  }
  std::size_t size() const noexcept { return vectors.size(); }
  ExampleView view() const { return ExampleView(vectors, labels); }
  operator ExampleView() const { return view(); }
};

struct FilterPolicy {
  bool enabled = false;
  /// Filter once an epoch's mistakes fall to this fraction of the examples.
  double trigger_mistake_fraction = 0.02;
  /// ... or at this epoch, whichever comes first.
  int trigger_max_epochs = 10;
};

struct TrainConfig {
  HyperParams hyper;
  int max_epochs = 50;
  StrengthMode strength = StrengthMode::Binary;
  bool normalize = false;
  FilterPolicy filter;
  std::optional<std::uint64_t> shuffle_seed;

  void validate() const;
};

struct TrainReport {
  int epochs_run = 0;
  std::vector<std::size_t> mistakes_per_epoch;
  std::size_t filtered_count = 0;
  std::optional<int> filter_epoch;
  bool converged = false;  // last epoch made no mistakes

  std::size_t total_mistakes() const;
};

/// Classifier for `algorithm` with the config's parameters and feature setup.
Classifier make_classifier(Algorithm algorithm, const TrainConfig& cfg, double avg_active,
                           std::size_t dimension, std::string vocab_hash = {},
                           std::string category = {});

/// One online trial: decide, then promote or demote on a mistake.
Outcome train_step(Classifier& c, const SparseVector& v, bool label);

/// One pass in `order` (identity when empty). Returns the mistake count.
std::size_t train_epoch(Classifier& c, ExampleView examples, std::span<const std::size_t> order = {});

/// Repeats epochs until one makes no mistakes or `max_epochs` is reached,
/// filtering once per the config's policy. The classifier's own parameters
/// drive the updates. Writes `epoch=<i> mistakes=<m> filtered=<k>` lines to
/// `log` when given. Throws std::invalid_argument on an empty example set.
TrainReport train(Classifier& c, ExampleView examples, const TrainConfig& cfg,
                  std::ostream* log = nullptr);

struct WeightRange {
  double lo;
  double hi;
};

/// Coefficients reachable from the initial weight by one promotion or one
/// demotion: [beta*w0, alpha*w0] for Positive Winnow, [w0-alpha, w0+alpha]
/// for the Perceptron, and for Balanced Winnow the effective coefficients
/// [w+ beta - w- alpha, w+ alpha - w- beta] of the initial pair.
WeightRange filter_range(const Classifier& c);

/// Discards every feature whose coefficient lies in `filter_range(c)`,
/// including all never-updated features. Returns the number discarded.
std::size_t apply_filter(Classifier& c);

}  // namespace winnowtc
