#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "winnowtc/eval.hpp"
#include "winnowtc/format.hpp"
#include "winnowtc/synth.hpp"

namespace winnowtc::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVocabFile = "vocab.txt";

void write_file_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("error writing " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot write " + path.string() + ": " + ec.message());
  }
}

std::vector<RawDocument> load_corpus(const fs::path& path) {
  if (!fs::exists(path)) throw std::runtime_error("corpus file not found: " + path.string());
  return read_corpus(path);
}

struct LoadedModels {
  Vocabulary vocab;
  std::map<std::string, Classifier> classifiers;
};

LoadedModels load_models(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("model directory not found: " + dir.string());
  const fs::path vocab_path = dir / kVocabFile;
  if (!fs::exists(vocab_path)) throw std::runtime_error("missing " + vocab_path.string());
  LoadedModels loaded{Vocabulary::load(vocab_path), {}};
  const std::string hash = loaded.vocab.hash();

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".model") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .model files in " + dir.string());

  for (const auto& file : files) {
    auto c = Classifier::load(file);
    if (c.setup().vocab_hash != hash)
      throw std::runtime_error(file.string() + ": vocabulary hash " + c.setup().vocab_hash +
                               " does not match " + vocab_path.string() + " (" + hash + ")");
    if (c.dimension() != loaded.vocab.size())
      throw std::runtime_error(file.string() + ": feature space size differs from the vocabulary");
    std::string category = c.category();
    if (!loaded.classifiers.emplace(category, std::move(c)).second)
      throw std::runtime_error("two model files for category '" + category + "'");
  }
  return loaded;
}

SparseVector prepare(const RawDocument& doc, const Vocabulary& vocab, const FeatureSetup& setup) {
  auto v = vectorize(doc, vocab, setup.strength);
  return setup.normalize ? normalize(v) : v;
}

void write_table_row(std::ostream& out, const VariantResult& row) {
  const auto& c = row.at_theta;
  out << row.name << '\t' << format_double(row.bep) << '\t' << c.p1 << ' ' << c.p2 << ' ' << c.n1 << ' '
      << c.n2 << '\n';
}

}  // namespace

std::string model_file_name(const std::string& category) {
  std::string name;
  for (char ch : category) {
    const bool safe = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                      ch == '-' || ch == '_' || ch == '.';
    name.push_back(safe ? ch : '_');
  }
  if (name.empty() || name.front() == '.') name.insert(name.begin(), '_');
  return name + ".model";
}

std::vector<std::pair<std::string, std::string>> read_flat_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw FormatError(path.string() + ": expected key = value", lineno);
    auto key = trim(view.substr(0, eq));
    auto value = trim(view.substr(eq + 1));
    if (key.empty()) throw FormatError(path.string() + ": empty key", lineno);
    entries.emplace_back(std::string(key), std::string(value));
  }
  return entries;
}

ResolvedLearner resolve(const LearnerFlags& flags) {
  const bool plus = flags.algorithm == "bw+";
  const Algorithm algorithm = parse_algorithm(plus ? "bw" : flags.algorithm);

  TrainConfig cfg;
  cfg.hyper = HyperParams::defaults(algorithm, flags.theta);
  if (flags.alpha) cfg.hyper.alpha = *flags.alpha;
  if (flags.beta) cfg.hyper.beta = *flags.beta;
  cfg.hyper.theta_minus = flags.theta_minus.value_or(plus ? 0.9 * flags.theta : flags.theta);
  cfg.hyper.theta_plus = flags.theta_plus.value_or(plus ? 1.1 * flags.theta : flags.theta);
  cfg.strength = flags.strength ? parse_strength_mode(*flags.strength)
                                : (plus ? StrengthMode::Sqrt : StrengthMode::Binary);
  if (flags.normalize && algorithm != Algorithm::PositiveWinnow)
    throw std::invalid_argument("--normalize applies to the pw algorithm only");
  cfg.normalize = flags.normalize;
  cfg.max_epochs = flags.max_epochs;
  cfg.filter.enabled = flags.filter.value_or(plus);
  cfg.filter.trigger_mistake_fraction = flags.filter_trigger;
  cfg.filter.trigger_max_epochs = flags.filter_epochs;
  cfg.shuffle_seed = flags.seed;
  cfg.hyper.validate(algorithm);
  cfg.validate();
  return {algorithm, cfg};
}

// --------------------------------------------------------------------- vocab

int run_vocab(const VocabOptions& opts, std::ostream&, std::ostream& err) {
  try {
    if (opts.min_freq < 1) throw std::invalid_argument("--min-freq must be >= 1");
    const auto docs = load_corpus(opts.corpus);
    const auto vocab = build_vocabulary(docs, opts.min_freq);
    std::ostringstream text;
    vocab.save(text);
    write_file_atomically(opts.out, text.str());
    err << "vocabulary: " << vocab.size() << " tokens, avg_active=" << format_double(vocab.avg_active())
        << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

// --------------------------------------------------------------------- train

int run_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const auto learner = resolve(opts.learner);
    const auto docs = load_corpus(opts.corpus);
    if (!fs::exists(opts.vocab)) throw std::runtime_error("vocabulary file not found: " + opts.vocab.string());
    const auto vocab = Vocabulary::load(opts.vocab);
    const std::string hash = vocab.hash();
    if (opts.min_freq && *opts.min_freq != vocab.min_frequency())
      throw std::runtime_error("--min-freq " + std::to_string(*opts.min_freq) + " differs from " +
                               opts.vocab.string() + " (min_freq=" + std::to_string(vocab.min_frequency()) + ")");
    if (docs.empty()) throw std::runtime_error(opts.corpus.string() + ": empty corpus");
    const auto rebuilt = build_vocabulary(docs, vocab.min_frequency());
    if (rebuilt.hash() != hash)
      throw std::runtime_error("vocabulary " + opts.vocab.string() + " (hash " + hash +
                               ") was not built from " + opts.corpus.string() + " (hash " +
                               rebuilt.hash() + ")");
    const auto categories = collect_categories(docs);
    if (categories.empty()) throw std::runtime_error(opts.corpus.string() + ": no document carries a label");

    const FeatureSetup setup{learner.config.strength, learner.config.normalize, hash};
    std::vector<SparseVector> vectors;
    vectors.reserve(docs.size());
    for (const auto& d : docs) vectors.push_back(prepare(d, vocab, setup));

    struct Job {
      std::string model_text;
      std::string log;
      TrainReport report;
      std::string error;
    };
    std::vector<Job> jobs(categories.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < categories.size(); i = next++) {
        try {
          std::vector<std::uint8_t> labels;
          labels.reserve(docs.size());
          for (const auto& d : docs) labels.push_back(d.labels.count(categories[i]) ? 1 : 0);
          auto c = make_classifier(learner.algorithm, learner.config, vocab.avg_active(), vocab.size(),
                                   hash, categories[i]);
          std::ostringstream log;
          jobs[i].report = train(c, ExampleView(vectors, labels), learner.config,
                                 opts.learner.verbose ? &log : nullptr);
          jobs[i].log = log.str();
          jobs[i].model_text = c.serialize();
        } catch (const std::exception& e) {
          jobs[i].error = e.what();
        }
      }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(categories.size())));
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
      worker();
    }
    for (std::size_t i = 0; i < categories.size(); ++i)
      if (!jobs[i].error.empty()) throw std::runtime_error(categories[i] + ": " + jobs[i].error);

    fs::create_directories(opts.out_dir);
    for (const auto& entry : fs::directory_iterator(opts.out_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".model") fs::remove(entry.path());
    std::map<std::string, std::string> used;
    for (std::size_t i = 0; i < categories.size(); ++i) {
      std::string name = model_file_name(categories[i]);
      for (int k = 2; used.count(name); ++k)
        name = model_file_name(categories[i] + "-" + std::to_string(k));
      used.emplace(name, categories[i]);
      write_file_atomically(opts.out_dir / name, jobs[i].model_text);
    }
    std::ostringstream vocab_text;
    vocab.save(vocab_text);
    write_file_atomically(opts.out_dir / kVocabFile, vocab_text.str());

    for (std::size_t i = 0; i < categories.size(); ++i) {
      if (opts.learner.verbose) out << "category=" << categories[i] << '\n' << jobs[i].log;
      const auto& r = jobs[i].report;
      err << categories[i] << ": epochs=" << r.epochs_run << " mistakes=" << r.total_mistakes()
          << " filtered=" << r.filtered_count << (r.converged ? " converged" : "") << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

// ---------------------------------------------------------------------- eval

int run_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    auto loaded = load_models(opts.models);
    const auto docs = load_corpus(opts.corpus);

    for (const auto& category : collect_categories(docs))
      if (!loaded.classifiers.count(category))
        err << "warning: no model for category '" << category << "'; skipped\n";

    std::map<std::pair<StrengthMode, bool>, std::vector<SparseVector>> vectors;
    std::map<std::string, CategoryScores> categories;
    for (const auto& [name, c] : loaded.classifiers) {
      auto key = std::make_pair(c.setup().strength, c.setup().normalize);
      auto it = vectors.find(key);
      if (it == vectors.end()) {
        std::vector<SparseVector> vs;
        vs.reserve(docs.size());
        for (const auto& d : docs) vs.push_back(prepare(d, loaded.vocab, c.setup()));
        it = vectors.emplace(key, std::move(vs)).first;
      }
      CategoryScores cat{{}, c.params().theta};
      cat.scores.reserve(docs.size());
      for (std::size_t i = 0; i < docs.size(); ++i)
        cat.scores.push_back({c.score(it->second[i]), docs[i].labels.count(name) != 0});
      categories.emplace(name, std::move(cat));
    }

    const auto report = evaluate_scores(categories);
    for (const auto& [name, c] : report.skipped)
      err << "warning: category '" << name << "' has no positive test document; left out of macro\n";
    for (const auto& [name, r] : report.per_category)
      if (r.approximate) err << "note: " << name << ": approximate BEP (precision and recall never cross)\n";
    if (report.micro_approximate) err << "note: micro: approximate BEP\n";
    err << "note: macro = mean of per-category BEPs (summary figure); micro = BEP of pooled decisions\n";

    std::ostringstream text;
    write_report(text, report);
    if (opts.out)
      write_file_atomically(*opts.out, text.str());
    else
      out << text.str();
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

// ------------------------------------------------------------------- predict

int run_predict(const PredictOptions& opts, std::istream& in, std::ostream& out, std::ostream& err) {
  try {
    const auto loaded = load_models(opts.models);
    std::string text;
    if (opts.text) {
      text = *opts.text;
    } else if (opts.file) {
      std::ifstream file(*opts.file, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open " + opts.file->string());
      text.assign(std::istreambuf_iterator<char>(file), {});
    } else {
      text.assign(std::istreambuf_iterator<char>(in), {});
    }
    if (text.empty()) return 0;

    const RawDocument doc{"input", text, {}};
    struct Row {
      std::string category;
      double score;
      double theta;
    };
    std::vector<Row> rows;
    for (const auto& [name, c] : loaded.classifiers)
      rows.push_back({name, c.score(prepare(doc, loaded.vocab, c.setup())), c.params().theta});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.score > b.score; });
    for (const auto& r : rows)
      out << r.category << '\t' << format_double(r.score) << '\t' << format_double(probability(r.score - r.theta))
          << '\t' << (r.score > r.theta ? 1 : 0) << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

// --------------------------------------------------------------------- bench

int run_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    std::ostringstream table;
    if (opts.suite == "length") {
      for (const auto& row : length_variation_benchmark(opts.seed)) write_table_row(table, row);
    } else if (opts.suite == "filter") {
      TextCorpusSpec spec;
      spec.seed = opts.seed;
      const auto result = filter_benchmark(spec);
      write_table_row(table, result.without_filter);
      write_table_row(table, result.with_filter);
      err << "filtered features per category: mean " << format_double(result.mean_filtered_fraction)
          << ", min " << format_double(result.min_filtered_fraction) << '\n';
    } else if (opts.suite == "ablation") {
      TextCorpusSpec spec;
      spec.seed = opts.seed;
      for (const auto& row : ablation_benchmark(spec)) write_table_row(table, row);
    } else if (opts.suite == "bound") {
      for (auto algorithm : {Algorithm::BalancedWinnow, Algorithm::PositiveWinnow, Algorithm::Perceptron}) {
        for (std::size_t n : {1000u, 10000u, 100000u, 1000000u}) {
          auto target = SynthTarget::disjunction(SynthTarget::pick_relevant(5, n, opts.seed), n);
          SynthCorpusSpec spec;
          spec.n_docs = 5000;
          spec.seed = opts.seed;
          table << to_string(algorithm) << "/n=" << n << '\t' << mistake_bound_run(algorithm, target, spec)
                << '\n';
        }
      }
    } else {
      throw std::invalid_argument("unknown bench suite '" + opts.suite + "'");
    }
    if (opts.out)
      write_file_atomically(*opts.out, table.str());
    else
      out << table.str();
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

// ---------------------------------------------------------------------- main

namespace {

/// Splices `--key=value` pairs from a `--config` file in right after the
/// subcommand name, so flags given on the command line (parsed later, last
/// value wins) take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 2; i < args.size(); ++i) {
    std::string path;
    std::size_t span = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      span = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      span = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + span));
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_flat_config(path)) injected.push_back("--" + key + "=" + value);
    args.insert(args.begin() + 2, injected.begin(), injected.end());
    break;
  }
  return args;
}

void add_learner_flags(CLI::App* cmd, LearnerFlags& f, std::string& strength, double& theta_minus,
                       double& theta_plus, double& alpha, double& beta, bool& filter, std::uint64_t& seed,
                       std::string& config) {
  cmd->add_option("--algorithm", f.algorithm, "pw | bw | perc | bw+")->capture_default_str();
  cmd->add_flag("--normalize", f.normalize, "normalized strengths (pw only)");
  cmd->add_option("--strength", strength, "binary | linear | sqrt");
  cmd->add_option("--theta", f.theta, "decision threshold")->capture_default_str();
  cmd->add_option("--theta-minus", theta_minus, "training lower threshold");
  cmd->add_option("--theta-plus", theta_plus, "training upper threshold");
  cmd->add_option("--alpha", alpha, "promotion factor / perceptron step");
  cmd->add_option("--beta", beta, "demotion factor");
  cmd->add_option("--max-epochs", f.max_epochs, "epoch cap")->capture_default_str();
  cmd->add_flag("--filter,!--no-filter", filter, "discard features once during training");
  cmd->add_option("--filter-trigger", f.filter_trigger, "filter when epoch mistakes <= this fraction")
      ->capture_default_str();
  cmd->add_option("--filter-epochs", f.filter_epochs, "filter at this epoch at the latest")->capture_default_str();
  cmd->add_option("--seed", seed, "shuffle examples once with this seed");
  cmd->add_flag("--verbose", f.verbose, "print epoch=<i> mistakes=<m> filtered=<k> lines");
  // Expanded before parsing; registered for --help.
  cmd->add_option("--config", config, "flat key = value file; command-line flags win");
}

}  // namespace

int main_entry(std::vector<std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"winnowtc: mistake-driven text categorization"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  VocabOptions vocab_opts;
  auto* vocab = app.add_subcommand("vocab", "build a vocabulary file from a corpus");
  vocab->add_option("--corpus", vocab_opts.corpus, "corpus file")->required();
  vocab->add_option("--min-freq", vocab_opts.min_freq, "minimum corpus occurrences")->capture_default_str();
  vocab->add_option("--out", vocab_opts.out, "vocabulary file to write")->required();

  TrainOptions train_opts;
  std::string strength;
  double theta_minus = 0, theta_plus = 0, alpha = 0, beta = 0;
  bool filter = false;
  std::uint64_t seed = 0;
  std::string config;
  auto* train_cmd = app.add_subcommand("train", "train one classifier per category");
  train_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  train_cmd->add_option("--corpus", train_opts.corpus, "training corpus")->required();
  train_cmd->add_option("--vocab", train_opts.vocab, "vocabulary built from the same corpus")->required();
  train_cmd->add_option("--out", train_opts.out_dir, "model directory")->required();
  std::int64_t train_min_freq = kDefaultMinFrequency;
  auto* train_min_freq_opt = train_cmd->add_option("--min-freq", train_min_freq, "must match the vocabulary");
  train_cmd->add_option("--jobs", train_opts.jobs, "categories trained in parallel")->capture_default_str();
  add_learner_flags(train_cmd, train_opts.learner, strength, theta_minus, theta_plus, alpha, beta, filter, seed, config);

  EvalOptions eval_opts;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "break-even report for a model directory");
  eval_cmd->add_option("--models", eval_opts.models, "model directory")->required();
  eval_cmd->add_option("--corpus", eval_opts.corpus, "test corpus")->required();
  eval_cmd->add_option("--out", eval_out, "report file (default: standard output)");

  PredictOptions predict_opts;
  std::string text, file;
  auto* predict_cmd = app.add_subcommand("predict", "score one document against every category");
  predict_cmd->add_option("--models", predict_opts.models, "model directory")->required();
  auto* text_opt = predict_cmd->add_option("--text", text, "document text");
  auto* file_opt = predict_cmd->add_option("--file", file, "document file (default: standard input)");
  text_opt->excludes(file_opt);

  BenchOptions bench_opts;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "synthetic benchmark tables");
  bench_cmd->add_option("--suite", bench_opts.suite, "length | filter | ablation | bound")->capture_default_str();
  bench_cmd->add_option("--seed", bench_opts.seed, "corpus seed")->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "table file (default: standard output)");

  try {
    args = expand_config(std::move(args));
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  if (*vocab) return run_vocab(vocab_opts, out, err);
  if (*train_cmd) {
    auto& f = train_opts.learner;
    auto given = [&](const char* name) { return train_cmd->get_option(name)->count() > 0; };
    if (given("--strength")) f.strength = strength;
    if (given("--theta-minus")) f.theta_minus = theta_minus;
    if (given("--theta-plus")) f.theta_plus = theta_plus;
    if (given("--alpha")) f.alpha = alpha;
    if (given("--beta")) f.beta = beta;
    if (given("--filter")) f.filter = filter;
    if (given("--seed")) f.seed = seed;
    if (train_min_freq_opt->count()) train_opts.min_freq = train_min_freq;
    return run_train(train_opts, out, err);
  }
  if (*eval_cmd) {
    if (!eval_out.empty()) eval_opts.out = eval_out;
    return run_eval(eval_opts, out, err);
  }
  if (*predict_cmd) {
    if (text_opt->count()) predict_opts.text = text;
    if (file_opt->count()) predict_opts.file = file;
    return run_predict(predict_opts, in, out, err);
  }
  if (!bench_out.empty()) bench_opts.out = bench_out;
  return run_bench(bench_opts, out, err);
}

}  // namespace winnowtc::cli
