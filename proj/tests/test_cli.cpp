#include <chrono>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "winnowtc/eval.hpp"
#include "winnowtc/format.hpp"
#include "winnowtc/random.hpp"

using namespace winnowtc;
namespace fs = std::filesystem;

namespace {

const fs::path kData = WINNOWTC_TEST_DATA;

struct Run {
  int status;
  std::string out, err;
};

Run run(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "winnowtc");
  std::istringstream in(input);
  std::ostringstream out, err;
  const int status = cli::main_entry(args, in, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct TempDir {
  fs::path path;
  TempDir() {
    Rng rng(static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(this)) ^
            static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
    path = fs::temp_directory_path() / ("winnowtc-test-" + to_hex(rng.next()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

struct Row {
  std::string name;
  double bep;
  std::string counts;
};

std::vector<Row> parse_report(const std::string& text) {
  std::vector<Row> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto f = split(line, '\t');
    REQUIRE(f.size() >= 2);
    rows.push_back({std::string(f[0]), parse_double(f[1]), f.size() > 2 ? std::string(f[2]) : ""});
  }
  return rows;
}

const fs::path kTrain = kData / "synth10_train.tsv";
const fs::path kTest = kData / "synth10_test.tsv";

void build_vocab(const TempDir& t) {
  REQUIRE(run({"vocab", "--corpus", kTrain.string(), "--out", (t / "vocab.txt").string()}).status == 0);
}

}  // namespace

TEST_CASE("vocab writes the frequency header") {
  TempDir t;
  build_vocab(t);
  CHECK(slurp(t / "vocab.txt").rfind("winnowtc-vocab v1 min_freq=3 avg_active=", 0) == 0);
  REQUIRE(run({"vocab", "--corpus", kTrain.string(), "--min-freq", "5", "--out", (t / "v5").string()}).status == 0);
  CHECK(slurp(t / "v5").rfind("winnowtc-vocab v1 min_freq=5 ", 0) == 0);
}

TEST_CASE("one-document corpus: avg_active is its distinct token count") {
  TempDir t;
  spit(t / "one.tsv", "d1\tx\taa bb aa cc\n");
  REQUIRE(run({"vocab", "--corpus", (t / "one.tsv").string(), "--min-freq", "1", "--out", (t / "v").string()}).status == 0);
  CHECK(slurp(t / "v").rfind("winnowtc-vocab v1 min_freq=1 avg_active=3\n", 0) == 0);
}

TEST_CASE("input errors name the file and line") {
  TempDir t;
  const auto missing = run({"vocab", "--corpus", (t / "nope.tsv").string(), "--out", (t / "v").string()});
  CHECK(missing.status != 0);
  CHECK(missing.err.find((t / "nope.tsv").string()) != std::string::npos);
  CHECK_FALSE(fs::exists(t / "v"));

  spit(t / "bad.tsv", "a\tx\tfine text\nb\tmissing-field\n");
  const auto bad = run({"vocab", "--corpus", (t / "bad.tsv").string(), "--out", (t / "v").string()});
  CHECK(bad.status != 0);
  CHECK(bad.err.find("bad.tsv:2:") != std::string::npos);

  const auto unwritable = run({"vocab", "--corpus", kTrain.string(), "--out", (t / "no/such/dir/v").string()});
  CHECK(unwritable.status != 0);
}

TEST_CASE("train validates its inputs") {
  TempDir t;
  build_vocab(t);
  const auto v = (t / "vocab.txt").string();
  auto unknown = run({"train", "--corpus", kTrain.string(), "--vocab", v, "--out", (t / "m").string(), "--algorithm", "svm"});
  CHECK(unknown.status != 0);
  CHECK(unknown.err.find("svm") != std::string::npos);
  CHECK_FALSE(fs::exists(t / "m"));

  auto mismatch = run({"train", "--corpus", kTest.string(), "--vocab", v, "--out", (t / "m").string()});
  CHECK(mismatch.status != 0);
  CHECK(mismatch.err.find("vocabulary") != std::string::npos);

  auto norm = run({"train", "--corpus", kTrain.string(), "--vocab", v, "--out", (t / "m").string(), "--algorithm", "bw", "--normalize"});
  CHECK(norm.status != 0);

  auto freq = run({"train", "--corpus", kTrain.string(), "--vocab", v, "--out", (t / "m").string(), "--min-freq", "2"});
  CHECK(freq.status != 0);
}

TEST_CASE("bw+ enables the threshold range, sqrt strengths and filtering") {
  TempDir t;
  build_vocab(t);
  const auto r = run({"train", "--corpus", kTrain.string(), "--vocab", (t / "vocab.txt").string(), "--out",
                      (t / "m").string(), "--algorithm", "bw+", "--verbose"});
  REQUIRE(r.status == 0);
  const auto model = slurp(t / "m" / "acq.model");
  CHECK(model.find("variant=bw ") != std::string::npos);
  CHECK(model.find(" theta_minus=0.9 theta_plus=1.1 strength=sqrt ") != std::string::npos);
  CHECK(model.find("filtered: ") != std::string::npos);
  CHECK(r.out.rfind("category=acq\nepoch=1 mistakes=", 0) == 0);

  std::size_t models = 0;
  for (const auto& e : fs::directory_iterator(t / "m")) models += e.path().extension() == ".model";
  CHECK(models == 10);
}

TEST_CASE("normalized pw starts every weight at theta") {
  TempDir t;
  build_vocab(t);
  REQUIRE(run({"train", "--corpus", kTrain.string(), "--vocab", (t / "vocab.txt").string(), "--out", (t / "m").string(),
               "--algorithm", "pw", "--normalize", "--max-epochs", "1"})
              .status == 0);
  const auto model = slurp(t / "m" / "earn.model");
  CHECK(model.find(" init=1 ") != std::string::npos);
  CHECK(model.find(" normalize=1 ") != std::string::npos);
}

TEST_CASE("training is deterministic and independent of the worker count") {
  TempDir t;
  build_vocab(t);
  auto train = [&](const std::string& dir, const std::string& jobs) {
    REQUIRE(run({"train", "--corpus", kTrain.string(), "--vocab", (t / "vocab.txt").string(), "--out", (t / dir).string(),
                 "--algorithm", "bw+", "--seed", "5", "--jobs", jobs})
                .status == 0);
  };
  const auto corpus_before = slurp(kTrain);
  train("a", "1");
  train("b", "1");
  train("c", "3");
  CHECK(slurp(kTrain) == corpus_before);
  for (const auto& e : fs::directory_iterator(t / "a")) {
    const auto name = e.path().filename();
    CHECK(slurp(e.path()) == slurp(t / "b" / name));
    CHECK(slurp(e.path()) == slurp(t / "c" / name));
  }
}

TEST_CASE("config file values yield to command-line flags") {
  TempDir t;
  build_vocab(t);
  spit(t / "run.conf", "# fixture\nalgorithm = pw\nmax-epochs = 1\ntheta = 2\n");
  REQUIRE(run({"train", "--config", (t / "run.conf").string(), "--corpus", kTrain.string(), "--vocab",
               (t / "vocab.txt").string(), "--out", (t / "m").string(), "--theta", "3", "--verbose"})
              .status == 0);
  const auto model = slurp(t / "m" / "acq.model");
  CHECK(model.find("variant=pw theta=3 ") != std::string::npos);
  const auto r = run({"train", "--config", (t / "run.conf").string(), "--corpus", kTrain.string(), "--vocab",
                      (t / "vocab.txt").string(), "--out", (t / "m").string(), "--verbose"});
  CHECK(r.out.find("epoch=2") == std::string::npos);
  CHECK(run({"train", "--config", (t / "none.conf").string()}).status != 0);
}

TEST_CASE("eval matches the golden reports from the reference pipeline") {
  TempDir t;
  build_vocab(t);
  const std::vector<std::pair<std::vector<std::string>, std::string>> cases{
      {{"--algorithm", "bw"}, "golden_bw.tsv"},
      {{"--algorithm", "pw", "--normalize"}, "golden_pw_norm.tsv"},
  };
  for (const auto& [flags, golden] : cases) {
    std::vector<std::string> args{"train", "--corpus", kTrain.string(), "--vocab", (t / "vocab.txt").string(), "--out",
                                  (t / "m").string()};
    args.insert(args.end(), flags.begin(), flags.end());
    REQUIRE(run(args).status == 0);
    const auto r = run({"eval", "--models", (t / "m").string(), "--corpus", kTest.string()});
    REQUIRE(r.status == 0);
    CHECK(r.err.find("macro") != std::string::npos);
    const auto got = parse_report(r.out);
    const auto want = parse_report(slurp(kData / golden));
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].name == want[i].name);
      CHECK(std::abs(got[i].bep - want[i].bep) <= 1e-9);
      CHECK(got[i].counts == want[i].counts);
    }
  }
}

TEST_CASE("eval from disk equals evaluation in memory") {
  TempDir t;
  build_vocab(t);
  REQUIRE(run({"train", "--corpus", kTrain.string(), "--vocab", (t / "vocab.txt").string(), "--out", (t / "m").string(),
               "--algorithm", "bw+"})
              .status == 0);
  REQUIRE(run({"eval", "--models", (t / "m").string(), "--corpus", kTest.string(), "--out", (t / "r.tsv").string()}).status == 0);

  const auto train_docs = read_corpus(kTrain);
  const auto test_docs = read_corpus(kTest);
  const auto vocab = build_vocabulary(train_docs);
  cli::LearnerFlags flags;
  flags.algorithm = "bw+";
  auto resolved = cli::resolve(flags);
  std::vector<SparseVector> xs, ts;
  for (const auto& d : train_docs) xs.push_back(vectorize(d, vocab, resolved.config.strength));
  for (const auto& d : test_docs) ts.push_back(vectorize(d, vocab, resolved.config.strength));
  std::vector<LabelSet> test_labels;
  for (const auto& d : test_docs) test_labels.push_back(d.labels);
  std::map<std::string, Classifier> classifiers;
  for (const auto& cat : collect_categories(train_docs)) {
    std::vector<std::uint8_t> labels;
    for (const auto& d : train_docs) labels.push_back(d.labels.count(cat) ? 1 : 0);
    auto c = make_classifier(resolved.algorithm, resolved.config, vocab.avg_active(), vocab.size(), vocab.hash(), cat);
    train(c, ExampleView(xs, labels), resolved.config);
    CHECK(c.serialize() == slurp(t / "m" / cli::model_file_name(cat)));
    classifiers.emplace(cat, std::move(c));
  }
  std::ostringstream report;
  write_report(report, evaluate(classifiers, ts, test_labels));
  CHECK(report.str() == slurp(t / "r.tsv"));
}

TEST_CASE("perfectly separable categories evaluate to 1 and missing models are reported") {
  TempDir t;
  std::string train, test;
  for (int i = 0; i < 30; ++i) {
    train += "tr" + std::to_string(i) + "\t" + (i % 2 ? "alpha" : "beta") + "\t" + (i % 2 ? "apple apricot" : "banana berry") +
             " common words\n";
    test += "te" + std::to_string(i) + "\t" + (i % 2 ? "alpha" : "beta,gamma") + "\t" +
            (i % 2 ? "apple apricot" : "banana berry") + " common words\n";
  }
  spit(t / "train.tsv", train);
  spit(t / "test.tsv", test);
  REQUIRE(run({"vocab", "--corpus", (t / "train.tsv").string(), "--out", (t / "v").string()}).status == 0);
  REQUIRE(run({"train", "--corpus", (t / "train.tsv").string(), "--vocab", (t / "v").string(), "--out", (t / "m").string()}).status == 0);
  const auto r = run({"eval", "--models", (t / "m").string(), "--corpus", (t / "test.tsv").string()});
  REQUIRE(r.status == 0);
  CHECK(r.out == "alpha\t1\t15 0 15 0\nbeta\t1\t15 0 15 0\nmacro\t1\nmicro\t1\n");
  CHECK(r.err.find("gamma") != std::string::npos);
}

TEST_CASE("eval refuses models built on another vocabulary") {
  TempDir t;
  build_vocab(t);
  REQUIRE(run({"train", "--corpus", kTrain.string(), "--vocab", (t / "vocab.txt").string(), "--out", (t / "m").string(),
               "--max-epochs", "1"})
              .status == 0);
  spit(t / "m" / "vocab.txt", "winnowtc-vocab v1 min_freq=3 avg_active=1\nzz\t0\t3\n");
  const auto r = run({"eval", "--models", (t / "m").string(), "--corpus", kTest.string()});
  CHECK(r.status != 0);
  CHECK(r.err.find("hash") != std::string::npos);
  CHECK(run({"eval", "--models", (t / "absent").string(), "--corpus", kTest.string()}).status != 0);
}

TEST_CASE("predict") {
  TempDir t;
  const Vocabulary vocab({{"aa", 3}, {"bb", 3}, {"cc", 3}}, 3, 2.0);
  fs::create_directories(t / "m");
  vocab.save(t / "m" / "vocab.txt");
  FeatureSetup setup{StrengthMode::Binary, false, vocab.hash()};
  // Perceptron weights start at theta / 2 = 0.5: "aa bb" scores exactly theta.
  Classifier at_theta(Algorithm::Perceptron, HyperParams::defaults(Algorithm::Perceptron), 2.0, 3, setup, "edge");
  Classifier high(Algorithm::Perceptron, HyperParams::defaults(Algorithm::Perceptron), 2.0, 3, setup, "high");
  high.promote(SparseVector({{0, 1.0}}));
  Classifier low(Algorithm::Perceptron, HyperParams::defaults(Algorithm::Perceptron), 2.0, 3, setup, "low");
  low.demote(SparseVector({{0, 1.0}}));
  at_theta.save(t / "m" / "edge.model");
  high.save(t / "m" / "high.model");
  low.save(t / "m" / "low.model");

  const auto r = run({"predict", "--models", (t / "m").string(), "--text", "AA bb"});
  REQUIRE(r.status == 0);
  CHECK(r.out == "high\t" + format_double(0.6 + 0.5) + "\t" + format_double(probability(0.6 + 0.5 - 1.0)) + "\t1\n" +
                     "edge\t1\t0.5\t0\n" + "low\t" + format_double(0.4 + 0.5) + "\t" +
                     format_double(probability(0.4 + 0.5 - 1.0)) + "\t0\n");

  const auto unknown = run({"predict", "--models", (t / "m").string()}, "zz qq");
  CHECK(unknown.out == "edge\t0\t" + format_double(probability(-1.0)) + "\t0\n" + "high\t0\t" +
                           format_double(probability(-1.0)) + "\t0\n" + "low\t0\t" + format_double(probability(-1.0)) +
                           "\t0\n");

  const auto empty = run({"predict", "--models", (t / "m").string()}, "");
  CHECK(empty.status == 0);
  CHECK(empty.out.empty());

  spit(t / "doc.txt", "cc");
  CHECK(run({"predict", "--models", (t / "m").string(), "--file", (t / "doc.txt").string()}).out.rfind("edge\t0.5\t", 0) == 0);
}

TEST_CASE("bench prints report rows") {
  const auto r = run({"bench", "--suite", "bound", "--seed", "3"});
  REQUIRE(r.status == 0);
  CHECK(r.out.rfind("bw/n=1000\t", 0) == 0);
  CHECK(run({"bench", "--suite", "nope"}).status != 0);
}

TEST_CASE("model file names are filesystem safe") {
  CHECK(cli::model_file_name("money-fx") == "money-fx.model");
  CHECK(cli::model_file_name("a/b c") == "a_b_c.model");
  CHECK(cli::model_file_name("..") == "_...model");
}

TEST_CASE("missing subcommand is an error") { CHECK(run({}).status != 0); }
