// Synthetic targets and corpora: Boolean concepts for mistake-bound checks,
// and Zipf-distributed text for the length, frequency and filtering studies.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "winnowtc/corpus.hpp"
#include "winnowtc/eval.hpp"
#include "winnowtc/model.hpp"
#include "winnowtc/training.hpp"

namespace winnowtc {

enum class TargetKind { Disjunction, Conjunction, RofK };

struct DriftEvent {
  std::size_t at;                  // example index where the new concept starts
  std::vector<FeatureId> relevant;  // replaces the relevant set
};

struct SynthTarget {
  TargetKind kind = TargetKind::Disjunction;
  std::size_t r = 1;  // RofK only
  std::vector<FeatureId> relevant;
  std::size_t n = 0;  // total features
  std::vector<DriftEvent> drift;  // ascending by `at`

  static SynthTarget disjunction(std::vector<FeatureId> relevant, std::size_t n);
  static SynthTarget conjunction(std::vector<FeatureId> relevant, std::size_t n);
  static SynthTarget r_of_k(std::size_t r, std::vector<FeatureId> relevant, std::size_t n);

  /// Relevant ids drawn from [0, n) without replacement.
  static std::vector<FeatureId> pick_relevant(std::size_t k, std::size_t n, std::uint64_t seed);

  /// Number of active relevant features needed for a positive label.
  std::size_t needed() const;
  bool evaluate(const SparseVector& v, const std::vector<FeatureId>& relevant_set) const;
  const std::vector<FeatureId>& relevant_at(std::size_t example) const;

  void validate() const;
};

struct SynthCorpusSpec {
  std::size_t n_docs = 1000;
  std::size_t min_len = 5;  // active features per document, uniform
  std::size_t max_len = 50;
  double noise_rate = 0.0;  // label flip probability
  double positive_rate = 0.5;  // share of documents built to be positive
  std::uint64_t seed = 1;
  /// 0 samples irrelevant features uniformly; > 0 by a Zipf law on id.
  double zipf_exponent = 0.0;

  void validate() const;
};

/// Boolean-strength examples. Each document aims at a positive label with
/// probability `positive_rate` and draws its count of relevant features to
/// match, the rest irrelevant. The label is the target on the active set (the
/// concept in force at that index), then flipped with `noise_rate`.
ExampleSet gen_examples(const SynthTarget& target, const SynthCorpusSpec& spec);

struct OnlineRun {
  std::size_t mistakes = 0;
  std::vector<std::uint8_t> mistake_at;  // per example
};

/// One online pass, no epochs, plain threshold, over a space of
/// `n_features`. Weights start at theta / n_features, the classical Winnow
/// start for mistake-bound analysis: with theta / d, features that never
/// recur would push every longer-than-average negative over the threshold.
OnlineRun online_run(Algorithm algorithm, const ExampleSet& examples, std::size_t n_features,
                     std::optional<HyperParams> params = std::nullopt);

std::size_t mistake_bound_run(Algorithm algorithm, const SynthTarget& target,
                              const SynthCorpusSpec& spec);

/// One row of a benchmark table.
struct VariantResult {
  std::string name;
  double bep = 0.0;  // macro over categories
  Contingency at_theta;
  std::size_t filtered = 0;
  std::size_t features = 0;  // dimension x categories
};

// ---------------------------------------------------------------- text-like

struct TextCorpusSpec {
  std::size_t categories = 10;
  std::size_t vocab_size = 20000;
  double zipf_exponent = 1.0;
  std::size_t train_docs = 2000;
  std::size_t test_docs = 1000;
  std::size_t min_len = 20;  // tokens
  std::size_t max_len = 300;
  std::size_t indicative_per_category = 25;
  double indicative_rate = 0.06;  // share of a member's tokens from its category
  double label_rate = 0.12;       // per-category membership probability
  double confuser_rate = 0.15;    // non-member borrowing another category's words
  std::uint64_t seed = 7;
};

struct TextCorpus {
  std::vector<RawDocument> train;
  std::vector<RawDocument> test;
};

/// Word ids become lowercase alphabetic tokens, so documents go through the
/// regular tokenizer and vocabulary.
std::string synth_word(std::size_t id);
TextCorpus gen_text_corpus(const TextCorpusSpec& spec);

/// A trained one-vs-rest system on a prepared corpus.
struct PipelineResult {
  EvalReport report;
  std::map<std::string, Classifier> classifiers;
  std::vector<TrainReport> train_reports;
  std::size_t dimension = 0;
};

/// Vocabulary (min frequency 3), vectorization per `cfg`, one classifier
/// per category, evaluation on the test half.
PipelineResult run_pipeline(const TextCorpus& corpus, Algorithm algorithm, const TrainConfig& cfg);

/// Basic Positive Winnow, normalized Positive Winnow and Balanced Winnow,
/// binary strengths, on Zipf text whose document lengths span 5 to 200
/// tokens.
std::vector<VariantResult> length_variation_benchmark(std::uint64_t seed = 11);

struct FilterBenchmark {
  VariantResult with_filter;
  VariantResult without_filter;
  double mean_filtered_fraction = 0.0;
  double min_filtered_fraction = 0.0;
};

/// Balanced Winnow with threshold range and sqrt strength, trained with and
/// without filtering on the Zipf text corpus.
FilterBenchmark filter_benchmark(const TextCorpusSpec& spec = {});

/// Each algorithm through basic, normalized (Positive Winnow only),
/// threshold range, linear frequency, sqrt frequency and filtering.
std::vector<VariantResult> ablation_benchmark(const TextCorpusSpec& spec = {});

}  // namespace winnowtc
