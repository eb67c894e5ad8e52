#include "winnowtc/training.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <variant>

#include "winnowtc/random.hpp"

namespace winnowtc {

ExampleView::ExampleView(std::span<const SparseVector> vectors, std::span<const std::uint8_t> labels)
    : vectors_(vectors), labels_(labels) {
  if (vectors.size() != labels.size())
    throw std::invalid_argument("example vectors and labels differ in length");
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (filter.enabled) {
    if (!(filter.trigger_mistake_fraction > 0.0 && filter.trigger_mistake_fraction <= 1.0))
      throw std::invalid_argument("filter trigger fraction must be in (0,1]");
    if (filter.trigger_max_epochs < 1) throw std::invalid_argument("filter trigger epoch must be >= 1");
  }
}

std::size_t TrainReport::total_mistakes() const {
  return std::accumulate(mistakes_per_epoch.begin(), mistakes_per_epoch.end(), std::size_t{0});
}

Classifier make_classifier(Algorithm algorithm, const TrainConfig& cfg, double avg_active,
                           std::size_t dimension, std::string vocab_hash, std::string category) {
  FeatureSetup setup{cfg.strength, cfg.normalize, std::move(vocab_hash)};
  return Classifier(algorithm, cfg.hyper, avg_active, dimension, std::move(setup), std::move(category));
}

Outcome train_step(Classifier& c, const SparseVector& v, bool label) {
  const Outcome outcome = c.train_outcome(v, label);
  if (outcome == Outcome::NeedPromote)
    c.promote(v);
  else if (outcome == Outcome::NeedDemote)
    c.demote(v);
  return outcome;
}

std::size_t train_epoch(Classifier& c, ExampleView examples, std::span<const std::size_t> order) {
  std::size_t mistakes = 0;
  const std::size_t n = order.empty() ? examples.size() : order.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order.empty() ? k : order[k];
    if (train_step(c, examples.vector(i), examples.label(i)) != Outcome::Correct) ++mistakes;
  }
  return mistakes;
}

TrainReport train(Classifier& c, ExampleView examples, const TrainConfig& cfg, std::ostream* log) {
  if (examples.empty()) throw std::invalid_argument("empty example set");
  cfg.validate();

  std::vector<std::size_t> order;
  if (cfg.shuffle_seed) {
    order.resize(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(*cfg.shuffle_seed);
    rng.shuffle(std::span<std::size_t>(order));
  }

  // A run shorter than the trigger epoch still filters, at its last epoch.
  const int filter_at = std::min(cfg.filter.trigger_max_epochs, cfg.max_epochs);
  const double trigger = cfg.filter.trigger_mistake_fraction * static_cast<double>(examples.size());

  TrainReport report;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const std::size_t mistakes = train_epoch(c, examples, order);
    report.mistakes_per_epoch.push_back(mistakes);
    report.epochs_run = epoch;

    bool filtered_now = false;
    if (cfg.filter.enabled && !report.filter_epoch &&
        (static_cast<double>(mistakes) <= trigger || epoch == filter_at)) {
      report.filtered_count = apply_filter(c);
      report.filter_epoch = epoch;
      filtered_now = true;
    }
    if (log)
      *log << "epoch=" << epoch << " mistakes=" << mistakes << " filtered=" << report.filtered_count
           << '\n';
    // Filtering changes scores, so training goes on after it.
    if (mistakes == 0 && !filtered_now) break;
  }
  report.converged = report.mistakes_per_epoch.back() == 0;
  return report;
}

WeightRange filter_range(const Classifier& c) {
  const auto& p = c.params();
  return std::visit(
      [&](const auto& m) -> WeightRange {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, BalancedWinnowModel>) {
          return {m.initial_pos * p.beta - m.initial_neg * p.alpha,
                  m.initial_pos * p.alpha - m.initial_neg * p.beta};
        } else if constexpr (std::is_same_v<M, PerceptronModel>) {
          return {m.initial_weight - p.alpha, m.initial_weight + p.alpha};
        } else {
          return {m.initial_weight * p.beta, m.initial_weight * p.alpha};
        }
      },
      c.model());
}

std::size_t apply_filter(Classifier& c) {
  const auto range = filter_range(c);
  return c.filter_range_inclusive(range.lo, range.hi);
}

}  // namespace winnowtc
