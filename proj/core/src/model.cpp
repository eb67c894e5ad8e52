#include "winnowtc/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "winnowtc/format.hpp"

namespace winnowtc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class Map>
std::vector<FeatureId> sorted_keys(const Map& map) {
  std::vector<FeatureId> keys;
  keys.reserve(map.size());
  for (const auto& kv : map) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::PositiveWinnow: return "pw";
    case Algorithm::BalancedWinnow: return "bw";
    case Algorithm::Perceptron: return "perc";
  }
  return "pw";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "pw") return Algorithm::PositiveWinnow;
  if (name == "bw") return Algorithm::BalancedWinnow;
  if (name == "perc") return Algorithm::Perceptron;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

HyperParams HyperParams::defaults(Algorithm algorithm, double theta) {
  HyperParams p;
  p.theta = p.theta_minus = p.theta_plus = theta;
  if (algorithm == Algorithm::Perceptron) {
    p.alpha = 0.1 * theta;
    p.beta = 0.0;
  }
  return p;
}

void HyperParams::validate(Algorithm algorithm) const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("theta must be > 0");
  if (!(theta_minus <= theta && theta <= theta_plus))
    throw std::invalid_argument("thresholds must satisfy theta_minus <= theta <= theta_plus");
  if (algorithm == Algorithm::Perceptron) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw std::invalid_argument("perceptron step alpha must be > 0");
    return;
  }
  if (!(alpha > 1.0) || !std::isfinite(alpha))
    throw std::invalid_argument("winnow promotion alpha must be > 1");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("winnow demotion beta must be in (0,1)");
}

Classifier::Classifier(Algorithm algorithm, const HyperParams& params, double avg_active,
                       std::size_t dimension, FeatureSetup setup, std::string category)
    : params_(params), setup_(std::move(setup)), category_(std::move(category)), dimension_(dimension) {
  if (!(avg_active > 0.0) || !std::isfinite(avg_active))
    throw std::invalid_argument("average active feature count must be > 0");
  params_.validate(algorithm);
  const double d = setup_.normalize ? 1.0 : avg_active;
  const double theta = params_.theta;
  switch (algorithm) {
    case Algorithm::PositiveWinnow: model_ = PositiveWinnowModel{theta / d, {}}; break;
    case Algorithm::BalancedWinnow: model_ = BalancedWinnowModel{2.0 * theta / d, theta / d, {}}; break;
    case Algorithm::Perceptron: model_ = PerceptronModel{theta / d, {}}; break;
  }
}

Algorithm Classifier::algorithm() const noexcept {
  switch (model_.index()) {
    case 0: return Algorithm::PositiveWinnow;
    case 1: return Algorithm::BalancedWinnow;
    default: return Algorithm::Perceptron;
  }
}

double Classifier::initial_coefficient() const noexcept {
  return std::visit(overloaded{
                        [](const BalancedWinnowModel& m) { return m.initial_pos - m.initial_neg; },
                        [](const auto& m) { return m.initial_weight; },
                    },
                    model_);
}

double Classifier::coefficient(FeatureId id) const {
  if (is_filtered(id)) return 0.0;
  return std::visit(overloaded{
                        [id](const BalancedWinnowModel& m) {
                          auto it = m.weights.find(id);
                          return it == m.weights.end() ? m.initial_pos - m.initial_neg
                                                       : it->second.pos - it->second.neg;
                        },
                        [id](const auto& m) {
                          auto it = m.weights.find(id);
                          return it == m.weights.end() ? m.initial_weight : it->second;
                        },
                    },
                    model_);
}

bool Classifier::is_materialized(FeatureId id) const {
  return std::visit([id](const auto& m) { return m.weights.count(id) != 0; }, model_);
}

std::size_t Classifier::materialized_count() const noexcept {
  return std::visit([](const auto& m) { return m.weights.size(); }, model_);
}

std::vector<FeatureId> Classifier::filtered_ids() const {
  std::vector<FeatureId> ids;
  ids.reserve(filtered_total_);
  for (std::size_t i = 0; i < filtered_.size(); ++i)
    if (filtered_[i]) ids.push_back(static_cast<FeatureId>(i));
  return ids;
}

double Classifier::score(const SparseVector& v) const {
  return std::visit(overloaded{
                        [&](const BalancedWinnowModel& m) {
                          double total = 0.0;
                          for (const auto& e : v) {
                            if (is_filtered(e.id)) continue;
                            auto it = m.weights.find(e.id);
                            const double c = it == m.weights.end()
                                                 ? m.initial_pos - m.initial_neg
                                                 : it->second.pos - it->second.neg;
                            total += e.strength * c;
                          }
                          return total;
                        },
                        [&](const auto& m) {
                          double total = 0.0;
                          for (const auto& e : v) {
                            if (is_filtered(e.id)) continue;
                            auto it = m.weights.find(e.id);
                            total += e.strength * (it == m.weights.end() ? m.initial_weight : it->second);
                          }
                          return total;
                        },
                    },
                    model_);
}

bool Classifier::predict(const SparseVector& v) const { return score(v) > params_.theta; }

Outcome Classifier::outcome_for_score(double s, bool label) const noexcept {
  if (label) return s <= params_.theta_plus ? Outcome::NeedPromote : Outcome::Correct;
  const bool in_range = params_.theta_minus < params_.theta_plus && s == params_.theta_minus;
  return (s > params_.theta_minus || in_range) ? Outcome::NeedDemote : Outcome::Correct;
}

Outcome Classifier::train_outcome(const SparseVector& v, bool label) const {
  return outcome_for_score(score(v), label);
}

void Classifier::promote(const SparseVector& v) {
  const double alpha = params_.alpha, beta = params_.beta;
  std::visit(overloaded{
                 [&](PositiveWinnowModel& m) {
                   for (const auto& e : v) {
                     if (is_filtered(e.id)) continue;
                     auto [it, fresh] = m.weights.try_emplace(e.id, m.initial_weight);
                     it->second *= alpha;
                   }
                 },
                 [&](BalancedWinnowModel& m) {
                   for (const auto& e : v) {
                     if (is_filtered(e.id)) continue;
                     auto [it, fresh] = m.weights.try_emplace(e.id, BalancedWinnowModel::Weight{m.initial_pos, m.initial_neg});
                     it->second.pos *= alpha;
                     it->second.neg *= beta;
                   }
                 },
                 [&](PerceptronModel& m) {
                   for (const auto& e : v) {
                     if (is_filtered(e.id)) continue;
                     auto [it, fresh] = m.weights.try_emplace(e.id, m.initial_weight);
                     it->second += alpha;
                   }
                 },
             },
             model_);
}

void Classifier::demote(const SparseVector& v) {
  const double alpha = params_.alpha, beta = params_.beta;
  std::visit(overloaded{
                 [&](PositiveWinnowModel& m) {
                   for (const auto& e : v) {
                     if (is_filtered(e.id)) continue;
                     auto [it, fresh] = m.weights.try_emplace(e.id, m.initial_weight);
                     it->second *= beta;
                   }
                 },
                 [&](BalancedWinnowModel& m) {
                   for (const auto& e : v) {
                     if (is_filtered(e.id)) continue;
                     auto [it, fresh] = m.weights.try_emplace(e.id, BalancedWinnowModel::Weight{m.initial_pos, m.initial_neg});
                     it->second.pos *= beta;
                     it->second.neg *= alpha;
                   }
                 },
                 [&](PerceptronModel& m) {
                   for (const auto& e : v) {
                     if (is_filtered(e.id)) continue;
                     auto [it, fresh] = m.weights.try_emplace(e.id, m.initial_weight);
                     it->second -= alpha;
                   }
                 },
             },
             model_);
}

std::size_t Classifier::filter_range_inclusive(double lo, double hi) {
  if (filtered_.size() < dimension_) filtered_.resize(dimension_, false);
  std::size_t count = 0;
  auto inside = [lo, hi](double c) { return lo <= c && c <= hi; };
  std::visit(
      [&](auto& m) {
        for (std::size_t i = 0; i < dimension_; ++i) {
          if (filtered_[i]) continue;
          const auto id = static_cast<FeatureId>(i);
          auto it = m.weights.find(id);
          double c = 0.0;
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, BalancedWinnowModel>)
            c = it == m.weights.end() ? m.initial_pos - m.initial_neg : it->second.pos - it->second.neg;
          else
            c = it == m.weights.end() ? m.initial_weight : it->second;
          if (!inside(c)) continue;
          filtered_[i] = true;
          if (it != m.weights.end()) m.weights.erase(it);
          ++count;
        }
      },
      model_);
  filtered_total_ += count;
  return count;
}

// ---------------------------------------------------------------- model files

void Classifier::save(std::ostream& out) const {
  out << "winnowtc-model v1 variant=" << to_string(algorithm())
      << " theta=" << format_double(params_.theta) << " alpha=" << format_double(params_.alpha)
      << " beta=" << format_double(params_.beta) << " init=";
  std::visit(overloaded{
                 [&](const BalancedWinnowModel& m) {
                   out << format_double(m.initial_pos) << ',' << format_double(m.initial_neg);
                 },
                 [&](const auto& m) { out << format_double(m.initial_weight); },
             },
             model_);
  out << " theta_minus=" << format_double(params_.theta_minus)
      << " theta_plus=" << format_double(params_.theta_plus)
      << " strength=" << to_string(setup_.strength) << " normalize=" << (setup_.normalize ? 1 : 0)
      << " dim=" << dimension_ << " vocab=" << (setup_.vocab_hash.empty() ? "-" : setup_.vocab_hash)
      << " category=" << category_ << '\n';

  std::visit(overloaded{
                 [&](const BalancedWinnowModel& m) {
                   for (auto id : sorted_keys(m.weights)) {
                     const auto& w = m.weights.at(id);
                     out << id << '\t' << format_double(w.pos) << '\t' << format_double(w.neg) << '\n';
                   }
                 },
                 [&](const auto& m) {
                   for (auto id : sorted_keys(m.weights))
                     out << id << '\t' << format_double(m.weights.at(id)) << '\n';
                 },
             },
             model_);

  out << "filtered:";
  bool first = true;
  for (std::size_t i = 0; i < filtered_.size(); ++i) {
    if (!filtered_[i]) continue;
    out << (first ? " " : ",") << i;
    first = false;
  }
  out << '\n';
}

std::string Classifier::serialize() const {
  std::ostringstream out;
  save(out);
  return out.str();
}

Classifier Classifier::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty model file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::string_view header(line);
  const auto cat_pos = header.find(" category=");
  if (header.substr(0, 18) != "winnowtc-model v1 " || cat_pos == std::string_view::npos)
    throw FormatError("bad model header", 1);

  std::map<std::string, std::string, std::less<>> fields;
  for (auto field : split(header.substr(18, cat_pos - 18), ' ')) {
    auto eq = field.find('=');
    if (eq == std::string_view::npos) throw FormatError("malformed header field '" + std::string(field) + "'", 1);
    fields.emplace(std::string(field.substr(0, eq)), std::string(field.substr(eq + 1)));
  }
  auto get = [&](std::string_view key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw FormatError("model header lacks '" + std::string(key) + "'", 1);
    return it->second;
  };

  Classifier c;
  std::size_t lineno = 1;
  try {
    const Algorithm algorithm = parse_algorithm(get("variant"));
    c.category_ = std::string(header.substr(cat_pos + 10));
    c.params_.theta = parse_double(get("theta"));
    c.params_.alpha = parse_double(get("alpha"));
    c.params_.beta = parse_double(get("beta"));
    c.params_.theta_minus = fields.count("theta_minus") ? parse_double(get("theta_minus")) : c.params_.theta;
    c.params_.theta_plus = fields.count("theta_plus") ? parse_double(get("theta_plus")) : c.params_.theta;
    c.params_.validate(algorithm);
    c.setup_.strength = fields.count("strength") ? parse_strength_mode(get("strength")) : StrengthMode::Binary;
    c.setup_.normalize = fields.count("normalize") && get("normalize") == "1";
    if (fields.count("vocab") && get("vocab") != "-") c.setup_.vocab_hash = get("vocab");
    c.dimension_ = static_cast<std::size_t>(parse_int(get("dim")));

    auto init = split(get("init"), ',');
    switch (algorithm) {
      case Algorithm::PositiveWinnow:
      case Algorithm::Perceptron: {
        if (init.size() != 1) throw FormatError("init must hold one value", 1);
        const double w0 = parse_double(init[0]);
        if (algorithm == Algorithm::PositiveWinnow)
          c.model_ = PositiveWinnowModel{w0, {}};
        else
          c.model_ = PerceptronModel{w0, {}};
        break;
      }
      case Algorithm::BalancedWinnow:
        if (init.size() != 2) throw FormatError("init must hold w+,w-", 1);
        c.model_ = BalancedWinnowModel{parse_double(init[0]), parse_double(init[1]), {}};
        break;
    }

    bool saw_filtered = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line.rfind("filtered:", 0) == 0) {
        c.filtered_.assign(c.dimension_, false);
        std::string_view rest = std::string_view(line).substr(9);
        if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        if (!rest.empty()) {
          for (auto tok : split(rest, ',')) {
            auto id = parse_int(tok);
            if (id < 0 || static_cast<std::size_t>(id) >= c.dimension_)
              throw FormatError("filtered id out of range", lineno);
            if (!c.filtered_[static_cast<std::size_t>(id)]) ++c.filtered_total_;
            c.filtered_[static_cast<std::size_t>(id)] = true;
          }
        }
        saw_filtered = true;
        continue;
      }
      if (saw_filtered) throw FormatError("weights after filtered list", lineno);
      auto cols = split(line, '\t');
      const auto id = parse_int(cols[0]);
      if (id < 0 || static_cast<std::size_t>(id) >= c.dimension_)
        throw FormatError("feature id out of range", lineno);
      const auto fid = static_cast<FeatureId>(id);
      const bool ok = std::visit(overloaded{
                                     [&](BalancedWinnowModel& m) {
                                       if (cols.size() != 3) return false;
                                       return m.weights.emplace(fid, BalancedWinnowModel::Weight{parse_double(cols[1]), parse_double(cols[2])}).second;
                                     },
                                     [&](auto& m) {
                                       if (cols.size() != 2) return false;
                                       return m.weights.emplace(fid, parse_double(cols[1])).second;
                                     },
                                 },
                                 c.model_);
      if (!ok) throw FormatError("malformed or duplicate weight line", lineno);
    }
    if (!saw_filtered) throw FormatError("model file lacks the filtered: line");
    for (auto id : c.filtered_ids())
      if (c.is_materialized(id)) throw FormatError("feature " + std::to_string(id) + " is both weighted and filtered");
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what(), lineno);
  }
  return c;
}

void Classifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save(out);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

Classifier Classifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return load(in);
  } catch (const FormatError& e) {
    throw e.in_file(path.string());
  }
}

double probability(double score) {
  if (score >= 0.0) return 1.0 / (1.0 + std::exp(-score));
  const double e = std::exp(score);
  return e / (1.0 + e);
}

}  // namespace winnowtc
