// Sparse linear classifiers: Positive Winnow, Balanced Winnow and the
// Perceptron. Weights are materialized lazily, so an update costs
// O(active features) no matter how large the feature space is.
#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "winnowtc/corpus.hpp"

namespace winnowtc {

enum class Algorithm { PositiveWinnow, BalancedWinnow, Perceptron };

/// "pw", "bw", "perc".
std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

struct HyperParams {
  double alpha = 1.5;  // promotion factor (Winnow) or additive step (Perceptron)
  double beta = 0.5;   // demotion factor; unused by the Perceptron
  double theta = 1.0;
  double theta_minus = 1.0;  // training-time lower threshold
  double theta_plus = 1.0;   // training-time upper threshold

  /// Winnow: alpha 1.5, beta 0.5. Perceptron: alpha 0.1 * theta.
  /// The threshold range collapses to theta.
  static HyperParams defaults(Algorithm algorithm, double theta = 1.0);

  /// Throws std::invalid_argument when the parameters are unusable for
  /// `algorithm`.
  void validate(Algorithm algorithm) const;
};

enum class Outcome { Correct, NeedPromote, NeedDemote };

struct PositiveWinnowModel {
  double initial_weight = 0.0;
  std::unordered_map<FeatureId, double> weights;
};

struct BalancedWinnowModel {
  struct Weight {
    double pos;
    double neg;
  };
  double initial_pos = 0.0;
  double initial_neg = 0.0;
  std::unordered_map<FeatureId, Weight> weights;
};

struct PerceptronModel {
  double initial_weight = 0.0;
  std::unordered_map<FeatureId, double> weights;
};

/// How documents must be vectorized to be scored by a classifier. Carried in
/// the model file so evaluation reproduces the training representation.
struct FeatureSetup {
  StrengthMode strength = StrengthMode::Binary;
  bool normalize = false;
  std::string vocab_hash;  // empty when not tied to a vocabulary file

  friend bool operator==(const FeatureSetup&, const FeatureSetup&) = default;
};

class Classifier {
 public:
  using Model = std::variant<PositiveWinnowModel, BalancedWinnowModel, PerceptronModel>;

  /// Initial weights follow the average active-feature count d:
  /// Positive Winnow and Perceptron theta/d, Balanced Winnow w+ = 2theta/d
  /// and w- = theta/d. With normalized strengths every document has total
  /// strength 1, so d is taken as 1 (Positive Winnow then starts at theta).
  /// `dimension` is the size of the feature space.
  Classifier(Algorithm algorithm, const HyperParams& params, double avg_active,
             std::size_t dimension, FeatureSetup setup = {}, std::string category = {});

  Algorithm algorithm() const noexcept;
  const HyperParams& params() const noexcept { return params_; }
  HyperParams& mutable_params() noexcept { return params_; }
  const FeatureSetup& setup() const noexcept { return setup_; }
  const std::string& category() const noexcept { return category_; }
  void set_category(std::string category) { category_ = std::move(category); }
  std::size_t dimension() const noexcept { return dimension_; }
  const Model& model() const noexcept { return model_; }

  /// Effective initial coefficient (w+ - w- for Balanced Winnow).
  double initial_coefficient() const noexcept;
  /// Current effective coefficient of `id`; 0 once filtered.
  double coefficient(FeatureId id) const;
  bool is_materialized(FeatureId id) const;
  std::size_t materialized_count() const noexcept;
  bool is_filtered(FeatureId id) const noexcept {
    return id < filtered_.size() && filtered_[id];
  }
  std::size_t filtered_count() const noexcept { return filtered_total_; }
  std::vector<FeatureId> filtered_ids() const;

  double score(const SparseVector& v) const;
  /// score > theta, strictly.
  bool predict(const SparseVector& v) const;

  /// Training-time decision with the threshold range: a positive is a
  /// mistake unless it scores above theta_plus, a negative unless it scores
  /// below theta_minus. A collapsed range behaves like the plain threshold
  /// (a negative scoring exactly theta is correct).
  Outcome train_outcome(const SparseVector& v, bool label) const;
  Outcome outcome_for_score(double score, bool label) const noexcept;

  void promote(const SparseVector& v);
  void demote(const SparseVector& v);

  /// Discards every feature, materialized or not, whose coefficient lies in
  /// the closed interval [lo, hi]. Returns the number newly discarded.
  std::size_t filter_range_inclusive(double lo, double hi);

  // Model file: header line, one line per materialized feature, then the
  // filtered list.
  void save(std::ostream& out) const;
  std::string serialize() const;
  static Classifier load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Classifier load(const std::filesystem::path& path);

 private:
  Classifier() = default;

  HyperParams params_;
  FeatureSetup setup_;
  std::string category_;
  std::size_t dimension_ = 0;
  Model model_;
  std::vector<bool> filtered_;
  std::size_t filtered_total_ = 0;
};

/// Logistic function 1 / (1 + e^-score).
double probability(double score);

}  // namespace winnowtc
