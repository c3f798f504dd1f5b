#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "fnd/dataset.hpp"
#include "fnd/selftrain.hpp"
#include "fnd/sentiment.hpp"

using namespace fnd;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fnd_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string corpus_path() { return (bundled_data_dir() / "synthetic_fnn.jsonl").string(); }

// A small, fast self-training configuration on the bundled corpus.
std::vector<std::string> quick_selftrain(const fs::path& out) {
  return {"selftrain", "--k",          "3",  "--epochs",      "1",  "--embed-dim", "8",
          "--hidden-dim", "8",         "--dense-dim", "4", "--max-seq-len", "16", "--out",       out.string()};
}

}  // namespace

TEST_CASE("ingest the bundled corpus") {
  const auto dir = scratch("ingest");
  const auto r = invoke({"ingest", "--data", corpus_path(), "--out", dir.string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("records:   2000") != std::string::npos);
  CHECK(r.out.find("unlabeled: 0") != std::string::npos);
  const auto copy = load_records(dir / "corpus.jsonl", CorpusFormat::jsonl);
  CHECK(copy.size() >= 2000);
  fs::remove_all(dir);
}

TEST_CASE("ingest failures exit with a usage code and say why") {
  const auto dir = scratch("ingest_bad");
  std::ofstream(dir / "bad.jsonl") << "{\"id\":\"a\"}\n{\"id\": broken}\n";
  auto r = invoke({"ingest", "--data", (dir / "bad.jsonl").string(), "--out", dir.string()});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("line 2") != std::string::npos);

  std::ofstream(dir / "empty.jsonl").flush();
  r = invoke({"ingest", "--data", (dir / "empty.jsonl").string(), "--out", dir.string()});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("empty corpus") != std::string::npos);

  r = invoke({"ingest", "--data", (dir / "missing.jsonl").string()});
  CHECK(r.code == cli::kExitUsage);
  fs::remove_all(dir);
}

TEST_CASE("usage and config errors exit with 2") {
  const auto dir = scratch("usage");
  CHECK(invoke({}).code == cli::kExitUsage);
  CHECK(invoke({"train"}).code == cli::kExitUsage);
  CHECK(invoke({"selftrain", "--sigma", "0.4", "--out", dir.string()}).code == cli::kExitUsage);
  CHECK(invoke({"selftrain", "--pooling", "max", "--out", dir.string()}).code == cli::kExitUsage);
  CHECK(invoke({"selftrain", "--k", "abc"}).code == cli::kExitUsage);
  CHECK(invoke({"baseline", "--method", "svm", "--out", dir.string()}).code == cli::kExitUsage);
  CHECK(invoke({"baseline", "--out", dir.string()}).code == cli::kExitUsage);
  CHECK(invoke({"baseline", "--method", "nb", "--alpha", "0", "--out", dir.string()}).code == cli::kExitUsage);
  CHECK(invoke({"selftrain", "--sentiment", "precomputed", "--out", dir.string()}).code == cli::kExitUsage);

  std::ofstream(dir / "config.json") << "{\"sigma\": 0.9, \"learning_rate\": 1}";
  const auto r = invoke({"selftrain", "--config", (dir / "config.json").string()});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("learning_rate") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("run config file round trip and flag overrides") {
  const auto dir = scratch("config");
  auto c = cli::default_run_config();
  c.sigma = 0.9;
  c.k = 4;
  c.output_dir = (dir / "run").string();
  cli::save_run_config(dir / "c.json", c);
  const auto back = cli::load_run_config(dir / "c.json");
  CHECK(back.sigma == 0.9);
  CHECK(back.k == 4);
  CHECK(back.output_dir == c.output_dir);
  CHECK(back.data_path == c.data_path);

  const auto r = invoke({"baseline", "--method", "nb", "--config", (dir / "c.json").string(), "--seed", "7"});
  REQUIRE(r.code == cli::kExitOk);
  const auto snapshot = cli::load_run_config(dir / "run" / "config.json");
  CHECK(snapshot.sigma == 0.9);
  CHECK(snapshot.seed == 7);
  fs::remove_all(dir);
}

TEST_CASE("baselines report four metrics and are deterministic") {
  const auto dir = scratch("baseline");
  for (const std::string method : {"logreg", "nb"}) {
    const auto a = dir / (method + "_a");
    const auto b = dir / (method + "_b");
    REQUIRE(invoke({"baseline", "--method", method, "--out", a.string()}).code == cli::kExitOk);
    REQUIRE(invoke({"baseline", "--method", method, "--out", b.string()}).code == cli::kExitOk);
    const auto file = "baseline_" + method + ".json";
    CHECK(slurp(a / file) == slurp(b / file));
    CHECK(slurp(a / ("baseline_" + method + ".txt")) == slurp(b / ("baseline_" + method + ".txt")));

    const auto report = nlohmann::json::parse(slurp(a / file));
    REQUIRE(report.is_array());
    REQUIRE(report.size() == 1);
    for (const char* key : {"accuracy", "precision", "recall", "f1"}) {
      const double v = report[0].at(key).get<double>();
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    if (method == "nb") CHECK(report[0].at("alpha").get<double>() == 1.0);
    CHECK(fs::exists(a / "config.json"));
  }
  fs::remove_all(dir);
}

TEST_CASE("a fold plan that leaks a validation record aborts with 3") {
  const auto dir = scratch("leak");
  const auto records = load_records(corpus_path(), CorpusFormat::jsonl);
  const auto s = split(records, {}, 42);
  auto plan = make_folds(records, s, 3, 42);
  plan.folds[1].push_back(s.validation.front());
  save_fold_plan(dir / "plan.json", plan);

  auto args = quick_selftrain(dir / "run");
  args.insert(args.end(), {"--fold-plan", (dir / "plan.json").string()});
  const auto r = invoke(args);
  CHECK(r.code == cli::kExitInvariant);
  CHECK(r.err.find(s.validation.front()) != std::string::npos);

  std::ofstream(dir / "broken.json") << "[1, 2";
  args = quick_selftrain(dir / "run");
  args.insert(args.end(), {"--fold-plan", (dir / "broken.json").string()});
  CHECK(invoke(args).code == cli::kExitUsage);
  fs::remove_all(dir);
}

TEST_CASE("selftrain writes a complete, replayable, reproducible run") {
  const auto dir = scratch("selftrain");
  const auto first = dir / "a";
  const auto second = dir / "b";
  const auto r = invoke(quick_selftrain(first));
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("Fold+3-Test") != std::string::npos);
  for (const char* name : {"config.json", "vocab.tsv", "stats.json", "fold_plan.json", "round_log.jsonl",
                           "checkpoint.json", "report.json", "report.txt"}) {
    CHECK_MESSAGE(fs::exists(first / name), name);
  }
  const auto report = nlohmann::json::parse(slurp(first / "report.json"));
  REQUIRE(report.size() == 3);
  CHECK(report[0].at("label") == "Fold1-Val");
  CHECK(report[2].at("label") == "Fold+3-Test");
  CHECK(report[2].at("evaluated_on") == "test");

  const auto table = slurp(first / "report.txt");
  const auto header = table.substr(0, table.find('\n'));
  const auto col = [&](const char* name) { return header.find(name); };
  CHECK(col("Round") < col("Accuracy"));
  CHECK(col("Accuracy") < col("Precision"));
  CHECK(col("Precision") < col("Recall"));
  CHECK(col("Recall") < col("F1-Score"));

  const auto log = read_round_log(first / "round_log.jsonl");
  CHECK(replay_round_log(log).rounds == 3);

  REQUIRE(invoke(quick_selftrain(second)).code == cli::kExitOk);
  CHECK(slurp(first / "report.json") == slurp(second / "report.json"));
  CHECK(slurp(first / "report.txt") == slurp(second / "report.txt"));
  CHECK(slurp(first / "round_log.jsonl") == slurp(second / "round_log.jsonl"));

  const auto eval = invoke({"evaluate", "--run-dir", first.string(), "--split", "test"});
  REQUIRE(eval.code == cli::kExitOk);
  const auto scored = nlohmann::json::parse(slurp(first / "evaluate_test.json"));
  CHECK(scored[0].at("f1").get<double>() == doctest::Approx(report[2].at("f1").get<double>()));
  CHECK(invoke({"evaluate", "--run-dir", first.string(), "--split", "holdout"}).code == cli::kExitUsage);
  CHECK(invoke({"evaluate", "--run-dir", (dir / "nowhere").string()}).code == cli::kExitUsage);
  fs::remove_all(dir);
}
