#include "winnowtc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "winnowtc/format.hpp"

namespace winnowtc {

double Contingency::recall() const noexcept {
  const std::size_t members = p1 + p2;
  return members == 0 ? 0.0 : static_cast<double>(p1) / static_cast<double>(members);
}

double Contingency::precision() const noexcept {
  const std::size_t accepted = p1 + n2;
  return accepted == 0 ? 1.0 : static_cast<double>(p1) / static_cast<double>(accepted);
}

Contingency& Contingency::operator+=(const Contingency& o) noexcept {
  p1 += o.p1;
  p2 += o.p2;
  n1 += o.n1;
  n2 += o.n2;
  return *this;
}

Contingency contingency(std::span<const ScoredLabel> scores, double threshold) {
  Contingency c;
  for (const auto& s : scores) {
    const bool accepted = s.score > threshold;
    if (s.label)
      ++(accepted ? c.p1 : c.p2);
    else
      ++(accepted ? c.n2 : c.n1);
  }
  return c;
}

std::vector<PRPoint> pr_curve(std::span<const ScoredLabel> scores) {
  std::size_t positives = 0;
  for (const auto& s : scores) {
    if (std::isnan(s.score)) throw std::invalid_argument("NaN score");
    positives += s.label ? 1 : 0;
  }
  if (positives == 0) throw std::invalid_argument("undefined recall");

  std::vector<ScoredLabel> ranked(scores.begin(), scores.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  constexpr double inf = std::numeric_limits<double>::infinity();
  Contingency c;
  c.p2 = positives;
  c.n1 = ranked.size() - positives;

  std::vector<PRPoint> curve;
  curve.push_back({inf, c.recall(), c.precision(), c});
  for (std::size_t i = 0; i < ranked.size();) {
    const double group = ranked[i].score;
    for (; i < ranked.size() && ranked[i].score == group; ++i) {
      if (ranked[i].label) {
        ++c.p1;
        --c.p2;
      } else {
        ++c.n2;
        --c.n1;
      }
    }
    const double threshold = i < ranked.size() ? group + (ranked[i].score - group) / 2.0 : -inf;
    curve.push_back({threshold, c.recall(), c.precision(), c});
  }
  return curve;
}

BreakEven break_even_point(std::span<const PRPoint> curve) {
  if (curve.empty()) throw std::invalid_argument("empty precision/recall curve");
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double gap = curve[i].precision - curve[i].recall;
    if (gap == 0.0) return {curve[i].precision, false};
    if (i == 0) continue;
    const double prev = curve[i - 1].precision - curve[i - 1].recall;
    if ((prev > 0.0) != (gap > 0.0)) {
      const double t = prev / (prev - gap);
      const double r = curve[i - 1].recall + t * (curve[i].recall - curve[i - 1].recall);
      const double p = curve[i - 1].precision + t * (curve[i].precision - curve[i - 1].precision);
      return {(r + p) / 2.0, false};
    }
  }
  const auto closest = std::min_element(curve.begin(), curve.end(), [](const PRPoint& a, const PRPoint& b) {
    return std::abs(a.precision - a.recall) < std::abs(b.precision - b.recall);
  });
  return {(closest->precision + closest->recall) / 2.0, true};
}

double break_even(std::span<const PRPoint> curve) { return break_even_point(curve).value; }

EvalReport evaluate_scores(const std::map<std::string, CategoryScores>& categories) {
  EvalReport report;
  std::vector<ScoredLabel> pooled;
  double macro_sum = 0.0;
  for (const auto& [name, cat] : categories) {
    const Contingency at_theta = contingency(cat.scores, cat.threshold);
    report.contingency_at_theta += at_theta;
    pooled.insert(pooled.end(), cat.scores.begin(), cat.scores.end());
    const std::size_t positives = at_theta.p1 + at_theta.p2;
    if (positives == 0) {
      report.skipped.emplace(name, at_theta);
      continue;
    }
    auto bep = break_even_point(pr_curve(cat.scores));
    report.per_category.emplace(name, CategoryResult{bep.value, bep.approximate, positives, at_theta});
    macro_sum += bep.value;
  }
  if (report.per_category.empty())
    throw std::invalid_argument("no category has a positive test example");
  report.macro_bep = macro_sum / static_cast<double>(report.per_category.size());
  auto micro = break_even_point(pr_curve(pooled));
  report.micro_bep = micro.value;
  report.micro_approximate = micro.approximate;
  return report;
}

EvalReport evaluate(const std::map<std::string, Classifier>& classifiers,
                    std::span<const SparseVector> vectors, std::span<const LabelSet> labels) {
  if (vectors.size() != labels.size())
    throw std::invalid_argument("test vectors and labels differ in length");
  std::map<std::string, CategoryScores> categories;
  for (const auto& [name, c] : classifiers) {
    CategoryScores cat{{}, c.params().theta};
    cat.scores.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i)
      cat.scores.push_back({c.score(vectors[i]), labels[i].count(name) != 0});
    categories.emplace(name, std::move(cat));
  }
  return evaluate_scores(categories);
}

void write_report(std::ostream& out, const EvalReport& report) {
  for (const auto& [name, r] : report.per_category) {
    const auto& c = r.at_theta;
    out << name << '\t' << format_double(r.bep) << '\t' << c.p1 << ' ' << c.p2 << ' ' << c.n1 << ' '
        << c.n2 << '\n';
  }
  out << "macro\t" << format_double(report.macro_bep) << '\n';
  out << "micro\t" << format_double(report.micro_bep) << '\n';
}

}  // namespace winnowtc
