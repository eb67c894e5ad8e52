// Recall, precision and interpolated break-even points, per category and
// aggregated (macro and micro).
#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "winnowtc/corpus.hpp"
#include "winnowtc/model.hpp"

namespace winnowtc {

struct ScoredLabel {
  double score;
  bool label;
};

/// p1: members accepted, p2: members rejected, n1: non-members rejected,
/// n2: non-members accepted.
struct Contingency {
  std::size_t p1 = 0;
  std::size_t p2 = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  std::size_t total() const noexcept { return p1 + p2 + n1 + n2; }
  /// 0 when there are no members.
  double recall() const noexcept;
  /// 1 when nothing is accepted.
  double precision() const noexcept;

  Contingency& operator+=(const Contingency& o) noexcept;
  friend bool operator==(const Contingency&, const Contingency&) = default;
};

struct PRPoint {
  double threshold;
  double recall;
  double precision;
  Contingency counts;
};

/// Decision is score > threshold.
Contingency contingency(std::span<const ScoredLabel> scores, double threshold);

/// One point per cut of the descending score ranking, from accept-none
/// (threshold +inf) to accept-all (threshold -inf). Equal scores are never
/// split; inner thresholds sit midway between adjacent distinct scores.
/// Throws std::invalid_argument("undefined recall") without positives.
std::vector<PRPoint> pr_curve(std::span<const ScoredLabel> scores);

struct BreakEven {
  double value;
  bool approximate;  // no crossing: midpoint at the closest approach
};

/// Walks the curve for the first point with precision == recall or the
/// first sign change of precision - recall, interpolating linearly across
/// a sign change. Throws std::invalid_argument on an empty curve.
BreakEven break_even_point(std::span<const PRPoint> curve);
double break_even(std::span<const PRPoint> curve);

struct CategoryResult {
  double bep = 0.0;
  bool approximate = false;
  std::size_t positives = 0;
  Contingency at_theta;  // counts under the classifier's own decision rule
};

struct EvalReport {
  std::map<std::string, CategoryResult> per_category;  // categories with positives
  std::map<std::string, Contingency> skipped;           // no positive test document
  double macro_bep = 0.0;
  double micro_bep = 0.0;
  bool micro_approximate = false;
  Contingency contingency_at_theta;  // pooled over every category
};

/// Per-category scored lists plus each category's decision threshold.
struct CategoryScores {
  std::vector<ScoredLabel> scores;
  double threshold;
};

/// Macro: mean of per-category BEPs over categories with positives. Micro:
/// BEP of the pooled (score, label) list. Throws std::invalid_argument when
/// no category has a positive example.
EvalReport evaluate_scores(const std::map<std::string, CategoryScores>& categories);

/// Scores every document with every classifier. `labels[i]` belongs to
/// `vectors[i]`.
EvalReport evaluate(const std::map<std::string, Classifier>& classifiers,
                    std::span<const SparseVector> vectors, std::span<const LabelSet> labels);

/// `<category> TAB <bep> TAB <p1> <p2> <n1> <n2>` rows, then `macro` and
/// `micro` footer rows.
void write_report(std::ostream& out, const EvalReport& report);

}  // namespace winnowtc
