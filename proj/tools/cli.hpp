// winnowtc command line: vocab, train, eval, predict, bench.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "winnowtc/corpus.hpp"
#include "winnowtc/model.hpp"
#include "winnowtc/training.hpp"

namespace winnowtc::cli {

struct VocabOptions {
  std::filesystem::path corpus;
  std::int64_t min_freq = kDefaultMinFrequency;
  std::filesystem::path out;
};

/// Flags shared by training and benchmarking. Unset optionals fall back to
/// the algorithm's defaults (or to the bw+ alias).
struct LearnerFlags {
  std::string algorithm = "bw";
  bool normalize = false;
  std::optional<std::string> strength;
  double theta = 1.0;
  std::optional<double> theta_minus;
  std::optional<double> theta_plus;
  std::optional<double> alpha;
  std::optional<double> beta;
  int max_epochs = 50;
  std::optional<bool> filter;
  double filter_trigger = 0.02;
  int filter_epochs = 10;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

struct ResolvedLearner {
  Algorithm algorithm;
  TrainConfig config;
};

/// Applies defaults and the `bw+` alias (bw, theta range 0.9/1.1 of theta,
/// sqrt strength, filtering), each only where the flag was not given.
ResolvedLearner resolve(const LearnerFlags& flags);

struct TrainOptions {
  std::filesystem::path corpus;
  std::filesystem::path vocab;
  std::filesystem::path out_dir;
  LearnerFlags learner;
  std::optional<std::int64_t> min_freq;  // must match the vocabulary when given
  unsigned jobs = 1;
};

struct EvalOptions {
  std::filesystem::path models;
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> out;
};

struct PredictOptions {
  std::filesystem::path models;
  std::optional<std::string> text;
  std::optional<std::filesystem::path> file;
};

struct BenchOptions {
  std::string suite = "length";  // length | filter | ablation | bound
  std::uint64_t seed = 11;
  std::optional<std::filesystem::path> out;
};

// Each returns the process exit status; data goes to `out`, diagnostics to
// `err`.
int run_vocab(const VocabOptions& opts, std::ostream& out, std::ostream& err);
int run_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);
int run_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);
int run_predict(const PredictOptions& opts, std::istream& in, std::ostream& out, std::ostream& err);
int run_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);

/// Model file name for a category: unsafe characters become '_'.
std::string model_file_name(const std::string& category);

/// Flat `key = value` config file; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_flat_config(const std::filesystem::path& path);

/// Full command line, argv[0] included.
int main_entry(std::vector<std::string> args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace winnowtc::cli
