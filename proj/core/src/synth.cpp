#include "winnowtc/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "winnowtc/random.hpp"

namespace winnowtc {

namespace {

/// Inverse-CDF sampler for P(i) proportional to 1 / (i + 1)^s, i in [0, n).
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
      cdf_[i] = total;
    }
  }

  std::size_t operator()(Rng& rng) const {
    const double u = rng.unit() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

void check_relevant(const std::vector<FeatureId>& relevant, std::size_t n) {
  std::unordered_set<FeatureId> seen;
  for (auto id : relevant) {
    if (id >= n) throw std::invalid_argument("relevant feature outside [0, n)");
    if (!seen.insert(id).second) throw std::invalid_argument("duplicate relevant feature");
  }
}

}  // namespace

// ------------------------------------------------------------------- targets

SynthTarget SynthTarget::disjunction(std::vector<FeatureId> relevant, std::size_t n) {
  SynthTarget t{TargetKind::Disjunction, 1, std::move(relevant), n, {}};
  t.validate();
  return t;
}

SynthTarget SynthTarget::conjunction(std::vector<FeatureId> relevant, std::size_t n) {
  SynthTarget t{TargetKind::Conjunction, 0, std::move(relevant), n, {}};
  t.r = t.relevant.size();
  t.validate();
  return t;
}

SynthTarget SynthTarget::r_of_k(std::size_t r, std::vector<FeatureId> relevant, std::size_t n) {
  SynthTarget t{TargetKind::RofK, r, std::move(relevant), n, {}};
  t.validate();
  return t;
}

std::vector<FeatureId> SynthTarget::pick_relevant(std::size_t k, std::size_t n, std::uint64_t seed) {
  if (k > n) throw std::invalid_argument("cannot pick more relevant features than exist");
  Rng rng(seed);
  std::unordered_set<FeatureId> chosen;
  std::vector<FeatureId> out;
  while (out.size() < k) {
    const auto id = static_cast<FeatureId>(rng.index(n));
    if (chosen.insert(id).second) out.push_back(id);
  }
  return out;
}

std::size_t SynthTarget::needed() const {
  switch (kind) {
    case TargetKind::Disjunction: return 1;
    case TargetKind::Conjunction: return relevant.size();
    case TargetKind::RofK: return r;
  }
  return 1;
}

bool SynthTarget::evaluate(const SparseVector& v, const std::vector<FeatureId>& relevant_set) const {
  std::size_t hits = 0;
  for (auto id : relevant_set)
    hits += std::binary_search(v.begin(), v.end(), SparseVector::Entry{id, 0.0},
                               [](const auto& a, const auto& b) { return a.id < b.id; })
                ? 1
                : 0;
  return hits >= needed();
}

const std::vector<FeatureId>& SynthTarget::relevant_at(std::size_t example) const {
  const std::vector<FeatureId>* current = &relevant;
  for (const auto& d : drift)
    if (d.at <= example) current = &d.relevant;
  return *current;
}

void SynthTarget::validate() const {
  const std::size_t k = relevant.size();
  if (k == 0) throw std::invalid_argument("target needs at least one relevant feature");
  if (k > n) throw std::invalid_argument("k must not exceed n");
  if (kind == TargetKind::RofK && (r < 1 || r > k)) throw std::invalid_argument("r-of-k needs 1 <= r <= k");
  check_relevant(relevant, n);
  std::size_t last = 0;
  for (const auto& d : drift) {
    if (d.relevant.size() != k) throw std::invalid_argument("drift must keep the number of relevant features");
    if (d.at < last) throw std::invalid_argument("drift schedule must be ascending");
    last = d.at;
    check_relevant(d.relevant, n);
  }
}

void SynthCorpusSpec::validate() const {
  if (min_len < 1 || min_len > max_len) throw std::invalid_argument("bad length range");
  if (!(noise_rate >= 0.0 && noise_rate < 1.0)) throw std::invalid_argument("noise rate must be in [0,1)");
  if (!(positive_rate >= 0.0 && positive_rate <= 1.0)) throw std::invalid_argument("positive rate must be in [0,1]");
  if (zipf_exponent < 0.0) throw std::invalid_argument("zipf exponent must be >= 0");
}

// ----------------------------------------------------------------- examples

ExampleSet gen_examples(const SynthTarget& target, const SynthCorpusSpec& spec) {
  target.validate();
  spec.validate();
  const std::size_t k = target.relevant.size();
  if (spec.max_len > target.n - k) throw std::invalid_argument("documents longer than the irrelevant pool");

  Rng rng(spec.seed);
  std::optional<ZipfSampler> zipf;
  if (spec.zipf_exponent > 0.0) zipf.emplace(target.n, spec.zipf_exponent);

  ExampleSet out;
  out.vectors.reserve(spec.n_docs);
  out.labels.reserve(spec.n_docs);

  const std::vector<FeatureId>* rel = nullptr;
  std::unordered_set<FeatureId> rel_set;
  std::vector<FeatureId> pool;
  std::unordered_set<FeatureId> active;
  const std::size_t need = target.needed();

  for (std::size_t i = 0; i < spec.n_docs; ++i) {
    const auto& current = target.relevant_at(i);
    if (&current != rel) {
      rel = &current;
      rel_set = {current.begin(), current.end()};
    }
    const auto len = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(spec.min_len),
                                                          static_cast<std::int64_t>(spec.max_len)));
    const std::size_t cap = std::min(k, len);
    std::size_t count = 0;
    if (rng.bernoulli(spec.positive_rate))
      count = need <= cap ? static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(need),
                                                                 static_cast<std::int64_t>(cap)))
                          : cap;
    else
      count = static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(std::min(need - 1, cap))));

    active.clear();
    pool = current;
    for (std::size_t j = 0; j < count; ++j) {
      const auto pick = j + static_cast<std::size_t>(rng.index(pool.size() - j));
      std::swap(pool[j], pool[pick]);
      active.insert(pool[j]);
    }
    while (active.size() < len) {
      const auto id = static_cast<FeatureId>(zipf ? (*zipf)(rng) : rng.index(target.n));
      if (!rel_set.count(id)) active.insert(id);
    }

    std::vector<SparseVector::Entry> entries;
    entries.reserve(active.size());
    for (auto id : active) entries.push_back({id, 1.0});
    auto v = SparseVector::from_unsorted(std::move(entries));
    bool label = target.evaluate(v, current);
    if (spec.noise_rate > 0.0 && rng.bernoulli(spec.noise_rate)) label = !label;
    out.add(std::move(v), label);
  }
  return out;
}

OnlineRun online_run(Algorithm algorithm, const ExampleSet& examples, std::size_t n_features,
                     std::optional<HyperParams> params) {
  if (examples.size() == 0) throw std::invalid_argument("empty example stream");
  if (n_features == 0) throw std::invalid_argument("empty feature space");
  Classifier c(algorithm, params.value_or(HyperParams::defaults(algorithm)),
               static_cast<double>(n_features), n_features);
  OnlineRun run;
  run.mistake_at.reserve(examples.size());
  const auto view = examples.view();
  for (std::size_t i = 0; i < view.size(); ++i) {
    const bool mistake = train_step(c, view.vector(i), view.label(i)) != Outcome::Correct;
    run.mistake_at.push_back(mistake ? 1 : 0);
    run.mistakes += mistake ? 1 : 0;
  }
  return run;
}

std::size_t mistake_bound_run(Algorithm algorithm, const SynthTarget& target, const SynthCorpusSpec& spec) {
  return online_run(algorithm, gen_examples(target, spec), target.n).mistakes;
}

// ---------------------------------------------------------------- text-like

std::string synth_word(std::size_t id) {
  std::string word = "w";
  do {
    word.push_back(static_cast<char>('a' + id % 26));
    id /= 26;
  } while (id);
  return word;
}

namespace {

constexpr std::array<const char*, 16> kCategoryNames = {
    "earn",  "acq",   "money-fx", "grain",   "crude", "trade",    "interest", "ship",
    "wheat", "corn",  "dlr",      "supply",  "oilseed", "sugar", "coffee",   "gnp"};

std::string category_name(std::size_t i) {
  if (i < kCategoryNames.size()) return kCategoryNames[i];
  return "cat" + std::to_string(i);
}

}  // namespace

TextCorpus gen_text_corpus(const TextCorpusSpec& spec) {
  if (spec.categories == 0 || spec.vocab_size < 100) throw std::invalid_argument("text corpus too small");
  if (spec.min_len < 1 || spec.min_len > spec.max_len) throw std::invalid_argument("bad length range");
  Rng rng(spec.seed);
  ZipfSampler background(spec.vocab_size, spec.zipf_exponent);

  // Indicative words come from the middle of the frequency ranking.
  const std::size_t lo = spec.vocab_size / 50, hi = spec.vocab_size / 4;
  if ((hi - lo) < spec.categories * spec.indicative_per_category)
    throw std::invalid_argument("vocabulary too small for the indicative word sets");
  std::vector<std::size_t> middle(hi - lo);
  for (std::size_t i = 0; i < middle.size(); ++i) middle[i] = lo + i;
  rng.shuffle(std::span<std::size_t>(middle));
  std::vector<std::vector<std::size_t>> indicative(spec.categories);
  for (std::size_t c = 0, next = 0; c < spec.categories; ++c)
    for (std::size_t j = 0; j < spec.indicative_per_category; ++j) indicative[c].push_back(middle[next++]);

  auto make_doc = [&](const std::string& id) {
    RawDocument doc;
    doc.id = id;
    std::vector<std::size_t> members;
    for (std::size_t c = 0; c < spec.categories; ++c)
      if (rng.bernoulli(spec.label_rate)) members.push_back(c);
    std::optional<std::size_t> confuser;
    if (rng.bernoulli(spec.confuser_rate)) {
      const auto b = static_cast<std::size_t>(rng.index(spec.categories));
      if (std::find(members.begin(), members.end(), b) == members.end()) confuser = b;
    }
    for (auto c : members) doc.labels.insert(category_name(c));

    const auto len = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(spec.min_len),
                                                          static_cast<std::int64_t>(spec.max_len)));
    std::string text;
    for (std::size_t j = 0; j < len; ++j) {
      std::size_t word;
      if (!members.empty() && rng.bernoulli(spec.indicative_rate)) {
        const auto& set = indicative[members[rng.index(members.size())]];
        word = set[rng.index(set.size())];
      } else if (confuser && rng.bernoulli(spec.indicative_rate / 2.0)) {
        const auto& set = indicative[*confuser];
        word = set[rng.index(set.size())];
      } else {
        word = background(rng);
      }
      if (!text.empty()) text += (j % 17 == 0) ? ". " : " ";
      text += synth_word(word);
    }
    doc.text = std::move(text);
    return doc;
  };

  TextCorpus corpus;
  corpus.train.reserve(spec.train_docs);
  corpus.test.reserve(spec.test_docs);
  for (std::size_t i = 0; i < spec.train_docs; ++i) corpus.train.push_back(make_doc("train-" + std::to_string(i)));
  for (std::size_t i = 0; i < spec.test_docs; ++i) corpus.test.push_back(make_doc("test-" + std::to_string(i)));
  return corpus;
}

PipelineResult run_pipeline(const TextCorpus& corpus, Algorithm algorithm, const TrainConfig& cfg) {
  const Vocabulary vocab = build_vocabulary(corpus.train, kDefaultMinFrequency);
  auto prepare = [&](const std::vector<RawDocument>& docs) {
    std::vector<SparseVector> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
      auto v = vectorize(d, vocab, cfg.strength);
      out.push_back(cfg.normalize ? normalize(v) : std::move(v));
    }
    return out;
  };
  const auto train_vectors = prepare(corpus.train);
  const auto test_vectors = prepare(corpus.test);

  PipelineResult result;
  result.dimension = vocab.size();
  const std::string hash = vocab.hash();
  for (const auto& category : collect_categories(corpus.train)) {
    std::vector<std::uint8_t> labels;
    labels.reserve(corpus.train.size());
    for (const auto& d : corpus.train) labels.push_back(d.labels.count(category) ? 1 : 0);
    auto c = make_classifier(algorithm, cfg, vocab.avg_active(), vocab.size(), hash, category);
    result.train_reports.push_back(train(c, ExampleView(train_vectors, labels), cfg));
    result.classifiers.emplace(category, std::move(c));
  }

  std::vector<LabelSet> test_labels;
  test_labels.reserve(corpus.test.size());
  for (const auto& d : corpus.test) test_labels.push_back(d.labels);
  result.report = evaluate(result.classifiers, test_vectors, test_labels);
  return result;
}

namespace {

VariantResult summarize(std::string name, const PipelineResult& r) {
  VariantResult v;
  v.name = std::move(name);
  v.bep = r.report.macro_bep;
  v.at_theta = r.report.contingency_at_theta;
  for (const auto& t : r.train_reports) v.filtered += t.filtered_count;
  v.features = r.dimension * r.classifiers.size();
  return v;
}

TrainConfig basic_config(Algorithm algorithm) {
  TrainConfig cfg;
  cfg.hyper = HyperParams::defaults(algorithm);
  return cfg;
}

}  // namespace

std::vector<VariantResult> length_variation_benchmark(std::uint64_t seed) {
  TextCorpusSpec spec;
  spec.min_len = 5;
  spec.max_len = 200;
  spec.seed = seed;
  const auto corpus = gen_text_corpus(spec);

  std::vector<VariantResult> rows;
  TrainConfig pw = basic_config(Algorithm::PositiveWinnow);
  rows.push_back(summarize("pw", run_pipeline(corpus, Algorithm::PositiveWinnow, pw)));
  pw.normalize = true;
  rows.push_back(summarize("pw-norm", run_pipeline(corpus, Algorithm::PositiveWinnow, pw)));
  rows.push_back(summarize("bw", run_pipeline(corpus, Algorithm::BalancedWinnow,
                                              basic_config(Algorithm::BalancedWinnow))));
  return rows;
}

FilterBenchmark filter_benchmark(const TextCorpusSpec& spec) {
  const auto corpus = gen_text_corpus(spec);
  TrainConfig cfg;
  cfg.hyper = HyperParams::defaults(Algorithm::BalancedWinnow);
  cfg.hyper.theta_minus = 0.9;
  cfg.hyper.theta_plus = 1.1;
  cfg.strength = StrengthMode::Sqrt;

  FilterBenchmark out;
  out.without_filter = summarize("bw-range-sqrt", run_pipeline(corpus, Algorithm::BalancedWinnow, cfg));
  cfg.filter.enabled = true;
  const auto filtered = run_pipeline(corpus, Algorithm::BalancedWinnow, cfg);
  out.with_filter = summarize("bw+", filtered);

  double sum = 0.0, min = 1.0;
  for (const auto& t : filtered.train_reports) {
    const double fraction = static_cast<double>(t.filtered_count) / static_cast<double>(filtered.dimension);
    sum += fraction;
    min = std::min(min, fraction);
  }
  out.mean_filtered_fraction = sum / static_cast<double>(filtered.train_reports.size());
  out.min_filtered_fraction = min;
  return out;
}

std::vector<VariantResult> ablation_benchmark(const TextCorpusSpec& spec) {
  const auto corpus = gen_text_corpus(spec);
  std::vector<VariantResult> rows;
  for (auto algorithm : {Algorithm::BalancedWinnow, Algorithm::PositiveWinnow, Algorithm::Perceptron}) {
    const std::string prefix = std::string(to_string(algorithm)) + "/";
    TrainConfig cfg = basic_config(algorithm);
    rows.push_back(summarize(prefix + "basic", run_pipeline(corpus, algorithm, cfg)));
    if (algorithm == Algorithm::PositiveWinnow) {
      cfg.normalize = true;
      rows.push_back(summarize(prefix + "norm", run_pipeline(corpus, algorithm, cfg)));
    }
    cfg.hyper.theta_minus = 0.9 * cfg.hyper.theta;
    cfg.hyper.theta_plus = 1.1 * cfg.hyper.theta;
    rows.push_back(summarize(prefix + "theta-range", run_pipeline(corpus, algorithm, cfg)));
    cfg.strength = StrengthMode::Linear;
    rows.push_back(summarize(prefix + "linear", run_pipeline(corpus, algorithm, cfg)));
    cfg.strength = StrengthMode::Sqrt;
    rows.push_back(summarize(prefix + "sqrt", run_pipeline(corpus, algorithm, cfg)));
    cfg.filter.enabled = true;
    rows.push_back(summarize(prefix + "discard", run_pipeline(corpus, algorithm, cfg)));
  }
  return rows;
}

}  // namespace winnowtc
