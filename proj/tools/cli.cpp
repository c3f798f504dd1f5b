#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "fnd/baselines.hpp"
#include "fnd/dataset.hpp"
#include "fnd/errors.hpp"
#include "fnd/metrics.hpp"
#include "fnd/model.hpp"
#include "fnd/selftrain.hpp"
#include "fnd/sentiment.hpp"

namespace fnd::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Training schedule of the neural learner; not part of RunConfig.
constexpr std::size_t kBatchSize = 8;
constexpr double kLearningRate = 3e-3;

// ---- config ---------------------------------------------------------------

ordered_json to_json(const RunConfig& c) {
  return {{"data_path", c.data_path},
          {"data_format", c.data_format},
          {"train_ratio", c.train_ratio},
          {"validation_ratio", c.validation_ratio},
          {"test_ratio", c.test_ratio},
          {"seed", c.seed},
          {"k", c.k},
          {"sigma", c.sigma},
          {"embed_dim", c.embed_dim},
          {"hidden_dim", c.hidden_dim},
          {"dense_dim", c.dense_dim},
          {"max_seq_len", c.max_seq_len},
          {"pooling", c.pooling},
          {"epochs_per_round", c.epochs_per_round},
          {"reject_policy", c.reject_policy},
          {"sentiment_encoder", c.sentiment_encoder},
          {"sentiment_sidecar", c.sentiment_sidecar},
          {"output_dir", c.output_dir}};
}

template <class T>
void read_field(const nlohmann::json& obj, const char* key, T& field) {
  try {
    field = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

struct Prepared {
  RunConfig config;
  std::vector<NewsRecord> records;
  DatasetSplit split;
  NormalizationStats stats;
  Vocabulary vocab;
  std::unique_ptr<SentimentEncoder> encoder;
  std::unique_ptr<FeatureAssembler> assembler;
  AssembledCorpus corpus;

  ModelConfig model_config() const {
    ModelConfig m;
    m.vocab_size = vocab.size();
    m.embed_dim = config.embed_dim;
    m.hidden_dim = config.hidden_dim;
    m.dense_dim = config.dense_dim;
    m.text_channels = 2;
    m.aux_dim = kAuxWidth;
    m.max_seq_len = config.max_seq_len;
    m.pooling = parse_pooling(config.pooling);
    return m;
  }

  std::vector<NewsRecord> records_in(const std::vector<std::string>& ids) const {
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < records.size(); ++i) position.emplace(records[i].id, i);
    std::vector<NewsRecord> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(records[position.at(id)]);
    return out;
  }
};

CorpusFormat corpus_format(const RunConfig& c) {
  return c.data_format == "auto" ? guess_corpus_format(c.data_path) : parse_corpus_format(c.data_format);
}

std::vector<NewsRecord> load_corpus(const std::string& path, CorpusFormat format) {
  auto records = load_records(path, format);
  if (records.empty()) throw ConfigError("empty corpus: " + path + " holds no records");
  return records;
}

std::unique_ptr<SentimentEncoder> make_encoder(const RunConfig& c) {
  if (c.sentiment_encoder == "precomputed") {
    return std::make_unique<PrecomputedEncoder>(PrecomputedEncoder::from_csv(c.sentiment_sidecar));
  }
  return std::make_unique<LexiconEncoder>(LexiconEncoder::bundled());
}

// Loads, splits and featurizes. When `vocab_file` is given the vocabulary is
// read from it instead of being rebuilt.
std::unique_ptr<Prepared> prepare(const RunConfig& config, const fs::path& vocab_file = {}) {
  validate(config);
  auto p = std::make_unique<Prepared>();
  p->config = config;
  p->records = load_corpus(config.data_path, corpus_format(config));
  p->split = split(p->records, {config.train_ratio, config.validation_ratio, config.test_ratio}, config.seed);
  p->stats = compute_stats(p->records_in(p->split.train), p->split);
  p->vocab = vocab_file.empty() ? build_vocabulary(p->records, p->split) : Vocabulary::load(vocab_file);
  p->encoder = make_encoder(config);
  p->assembler = std::make_unique<FeatureAssembler>(p->vocab, *p->encoder, p->stats, p->split, config.max_seq_len);
  p->corpus = assemble_corpus(p->records, *p->assembler);
  return p;
}

void save_stats(const fs::path& path, const NormalizationStats& s) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(s.train_fingerprint));
  const ordered_json obj = {{"columns", {"retweet_count", "user_tweet_count", "follower_count", "following_count",
                                         "like_count"}},
                            {"median", s.median},
                            {"mean", s.mean},
                            {"stddev", s.stddev},
                            {"train_hash", hash}};
  std::ofstream(path, std::ios::binary) << obj.dump(2) << '\n';
}

// ---- reports --------------------------------------------------------------

struct ReportRow {
  std::string label;
  Metrics metrics;
  std::vector<std::pair<std::string, std::string>> extra;  // rendered in order after the metrics
};

std::string fixed4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

std::string render_table(const std::vector<ReportRow>& rows, const char* first_header) {
  std::vector<std::string> headers = {first_header, "Accuracy", "Precision", "Recall", "F1-Score"};
  if (!rows.empty()) {
    for (const auto& [name, value] : rows.front().extra) headers.push_back(name);
  }
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::vector<std::string> line = {r.label, fixed4(r.metrics.accuracy), fixed4(r.metrics.precision),
                                     fixed4(r.metrics.recall), fixed4(r.metrics.f1)};
    for (const auto& kv : r.extra) line.push_back(kv.second);
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    width[c] = headers[c].size();
    for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << line[c];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(width[c])) << line[c];
      }
    }
    os << '\n';
  };
  emit(headers);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  os << std::string(total - 2, '-') << '\n';
  for (const auto& line : cells) emit(line);
  return os.str();
}

void put_metrics(ordered_json& obj, const Metrics& m) {
  obj["accuracy"] = m.accuracy;
  obj["precision"] = m.precision;
  obj["recall"] = m.recall;
  obj["f1"] = m.f1;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// ---- option plumbing ------------------------------------------------------

// Binds a flag to a scratch value and copies it into the config only when
// the flag was given, so file values survive unless overridden.
class Overrides {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& flag, T RunConfig::*field, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    appliers_.push_back([opt, value, field](RunConfig& c) {
      if (opt->count() > 0) c.*field = *value;
    });
  }

  void apply(RunConfig& c) const {
    for (const auto& f : appliers_) f(c);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> appliers_;
};

void add_data_options(CLI::App* app, Overrides& o) {
  o.add(app, "--data", &RunConfig::data_path, "Corpus file (JSONL or CSV)");
  o.add(app, "--format", &RunConfig::data_format, "auto, jsonl or csv");
}

void add_run_options(CLI::App* app, Overrides& o) {
  add_data_options(app, o);
  o.add(app, "--train-ratio", &RunConfig::train_ratio, "Share of records in the train split");
  o.add(app, "--validation-ratio", &RunConfig::validation_ratio, "Share of records in the validation split");
  o.add(app, "--test-ratio", &RunConfig::test_ratio, "Share of records in the test split");
  o.add(app, "--seed", &RunConfig::seed, "Seed for splits, folds, initialization and batching");
  o.add(app, "--k", &RunConfig::k, "Number of folds / self-training rounds");
  o.add(app, "--sigma", &RunConfig::sigma, "Confidence threshold in (0.5, 1)");
  o.add(app, "--embed-dim", &RunConfig::embed_dim, "Embedding size");
  o.add(app, "--hidden-dim", &RunConfig::hidden_dim, "LSTM hidden size");
  o.add(app, "--dense-dim", &RunConfig::dense_dim, "Dense layer size");
  o.add(app, "--max-seq-len", &RunConfig::max_seq_len, "Tokens kept per text field");
  o.add(app, "--pooling", &RunConfig::pooling, "attention or last_hidden");
  o.add(app, "--epochs", &RunConfig::epochs_per_round, "Training epochs per round");
  o.add(app, "--reject-policy", &RunConfig::reject_policy, "drop or defer");
  o.add(app, "--sentiment", &RunConfig::sentiment_encoder, "lexicon or precomputed");
  o.add(app, "--sentiment-sidecar", &RunConfig::sentiment_sidecar, "CSV of precomputed sentiment scores");
  o.add(app, "--out", &RunConfig::output_dir, "Output directory");
}

RunConfig resolve_config(const std::string& config_file, const Overrides& o) {
  RunConfig c = config_file.empty() ? default_run_config() : load_run_config(config_file);
  o.apply(c);
  return c;
}

// ---- commands -------------------------------------------------------------

int cmd_ingest(const RunConfig& config, const std::string& output, std::ostream& out) {
  if (config.data_path.empty()) throw ConfigError("no input corpus given (--data)");
  if (!fs::exists(config.data_path)) throw ConfigError("input corpus not found: " + config.data_path);
  const auto records = load_corpus(config.data_path, corpus_format(config));
  std::size_t fake = 0, real = 0;
  for (const auto& r : records) {
    fake += r.label == Label::fake;
    real += r.label == Label::real;
  }
  const fs::path target = output.empty() ? fs::path(config.output_dir) / "corpus.jsonl" : fs::path(output);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  write_jsonl(target, records);
  out << "records:   " << records.size() << '\n'
      << "labeled:   " << fake + real << " (fake " << fake << ", real " << real << ")\n"
      << "unlabeled: " << records.size() - fake - real << '\n'
      << "written:   " << target.string() << '\n';
  return kExitOk;
}

ReportRow round_row(const RoundReport& r) {
  return {r.label,
          r.metrics,
          {{"Train", std::to_string(r.train_size)},
           {"Accepted", std::to_string(r.accepted_0 + r.accepted_1)},
           {"Rejected", std::to_string(r.rejected)}}};
}

ordered_json round_json(const RoundReport& r) {
  return {{"round", r.round},
          {"label", r.label},
          {"evaluated_on", split_part_name(r.evaluated_on)},
          {"accuracy", r.metrics.accuracy},
          {"precision", r.metrics.precision},
          {"recall", r.metrics.recall},
          {"f1", r.metrics.f1},
          {"train_size", r.train_size},
          {"pseudo_labeled", r.pseudo_labeled},
          {"scored", r.scored},
          {"accepted_1", r.accepted_1},
          {"accepted_0", r.accepted_0},
          {"rejected", r.rejected},
          {"deferred", r.deferred}};
}

int cmd_selftrain(const RunConfig& config, const std::string& fold_plan_file, std::ostream& out) {
  auto p = prepare(config);
  const fs::path dir = config.output_dir;
  fs::create_directories(dir);
  save_run_config(dir / "config.json", config);
  p->vocab.save(dir / "vocab.tsv");
  save_stats(dir / "stats.json", p->stats);

  const FoldPlan plan =
      fold_plan_file.empty() ? make_folds(p->records, p->split, config.k, config.seed) : load_fold_plan(fold_plan_file);
  save_fold_plan(dir / "fold_plan.json", plan);

  SelfTrainConfig st;
  st.k = config.k;
  st.sigma = config.sigma;
  st.epochs_per_round = config.epochs_per_round;
  st.seed = config.seed;
  st.reject_policy = parse_reject_policy(config.reject_policy);

  NeuralTrainingOptions training;
  training.epochs = config.epochs_per_round;
  training.batch_size = kBatchSize;
  training.optimizer.learning_rate = kLearningRate;
  NeuralLearner learner(p->corpus, p->model_config(), training);

  const auto result = run_self_training(p->split, plan, p->corpus, learner, st);
  write_round_log(dir / "round_log.jsonl", result.log);
  learner.model().save(dir / "checkpoint.json");

  ordered_json report = ordered_json::array();
  std::vector<ReportRow> rows;
  for (const auto& r : result.reports) {
    report.push_back(round_json(r));
    rows.push_back(round_row(r));
  }
  const std::string table = render_table(rows, "Round");
  write_text(dir / "report.json", report.dump(2) + "\n");
  write_text(dir / "report.txt", table);
  out << table << "run directory: " << dir.string() << '\n';
  return kExitOk;
}

struct BaselineOptions {
  std::string method;
  double alpha = 1.0;
  double l2 = 1e-3;
  double learning_rate = 0.1;
  std::size_t epochs = 300;
};

int cmd_baseline(const RunConfig& config, const BaselineOptions& options, std::ostream& out) {
  if (options.method != "logreg" && options.method != "nb") {
    throw ConfigError("unknown baseline method '" + options.method + "' (expected logreg or nb)");
  }
  auto p = prepare(config);
  const bool nb = options.method == "nb";

  auto design = [&](const std::vector<std::string>& ids, std::vector<int>& labels) {
    FeatureMatrix x;
    for (const auto& id : ids) {
      const auto& record = p->records[p->corpus.index_of(id)];
      if (!record.labeled()) continue;
      x.append(nb ? bag_of_words(record, p->vocab) : baseline_row(record, p->vocab, p->corpus.features_of(id)));
      labels.push_back(record.label == Label::fake ? 1 : 0);
    }
    return x;
  };
  std::vector<int> train_labels, test_labels;
  const FeatureMatrix train_x = design(p->split.train, train_labels);
  const FeatureMatrix test_x = design(p->split.test, test_labels);
  if (train_x.rows == 0) throw ContractError("baseline: the train split has no labeled records");

  std::vector<int> predicted(test_x.rows);
  ReportRow row;
  ordered_json entry;
  if (nb) {
    const auto model = train_nb(train_x, train_labels, options.alpha);
    for (std::size_t i = 0; i < test_x.rows; ++i) predicted[i] = model.predict(test_x.row(i));
    row.label = "NaiveBayes-Test";
    row.extra = {{"Alpha", fixed4(options.alpha)}};
  } else {
    LogRegOptions lr{options.l2, options.epochs, options.learning_rate, config.seed};
    const auto model = train_logreg(train_x, train_labels, lr);
    for (std::size_t i = 0; i < test_x.rows; ++i) predicted[i] = model.predict(test_x.row(i));
    row.label = "LogReg-Test";
    row.extra = {{"L2", fixed4(options.l2)}};
  }
  row.metrics = compute_metrics(confusion(predicted, test_labels));
  row.extra.push_back({"Train", std::to_string(train_x.rows)});

  entry = {{"label", row.label}, {"method", options.method}, {"evaluated_on", "test"}};
  put_metrics(entry, row.metrics);
  entry["train_size"] = train_x.rows;
  entry["test_size"] = test_x.rows;
  entry["features"] = train_x.cols;
  if (nb) {
    entry["alpha"] = options.alpha;
  } else {
    entry["l2"] = options.l2;
    entry["learning_rate"] = options.learning_rate;
    entry["epochs"] = options.epochs;
  }
  entry["seed"] = config.seed;

  const fs::path dir = config.output_dir;
  fs::create_directories(dir);
  save_run_config(dir / "config.json", config);
  const std::string table = render_table({row}, "Method");
  write_text(dir / ("baseline_" + options.method + ".json"), ordered_json::array({entry}).dump(2) + "\n");
  write_text(dir / ("baseline_" + options.method + ".txt"), table);
  out << table;
  return kExitOk;
}

int cmd_evaluate(const std::string& run_dir, const std::string& split_name, const std::string& checkpoint,
                 std::ostream& out) {
  const fs::path dir = run_dir;
  const RunConfig config = load_run_config(dir / "config.json");
  auto p = prepare(config, dir / "vocab.tsv");
  SplitPart part;
  if (split_name == "validation") {
    part = SplitPart::validation;
  } else if (split_name == "test") {
    part = SplitPart::test;
  } else if (split_name == "train") {
    part = SplitPart::train;
  } else {
    throw ConfigError("unknown split '" + split_name + "' (expected train, validation or test)");
  }
  const Model model = Model::load(checkpoint.empty() ? dir / "checkpoint.json" : fs::path(checkpoint));
  if (model.config().vocab_size != p->vocab.size() || model.config().max_seq_len != config.max_seq_len) {
    throw ConfigError("checkpoint does not match the run's vocabulary or sequence length");
  }

  const auto& ids = part == SplitPart::train ? p->split.train
                    : part == SplitPart::test ? p->split.test
                                              : p->split.validation;
  std::vector<const FeatureVector*> inputs;
  std::vector<int> truth;
  for (const auto& id : ids) {
    const Label label = p->corpus.label_of(id);
    if (label == Label::unlabeled) continue;
    inputs.push_back(&p->corpus.features_of(id));
    truth.push_back(label == Label::fake ? 1 : 0);
  }
  const auto proba = predict_proba(model, std::span<const FeatureVector* const>(inputs));
  const Metrics m = compute_metrics(confusion_from_proba(proba, truth));
  const ReportRow row{std::string("Checkpoint-") + (part == SplitPart::test ? "Test" : part == SplitPart::train ? "Train" : "Val"),
                      m,
                      {{"Records", std::to_string(truth.size())}}};
  const std::string table = render_table({row}, "Split");
  ordered_json entry = {{"label", row.label}, {"evaluated_on", split_part_name(part)}};
  put_metrics(entry, m);
  entry["records"] = truth.size();
  write_text(dir / ("evaluate_" + split_name + ".json"), ordered_json::array({entry}).dump(2) + "\n");
  write_text(dir / ("evaluate_" + split_name + ".txt"), table);
  out << table;
  return kExitOk;
}

}  // namespace

// ---- public ---------------------------------------------------------------

RunConfig default_run_config() {
  RunConfig c;
  c.data_path = (bundled_data_dir() / "synthetic_fnn.jsonl").string();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!obj.is_object()) throw ConfigError("config file must hold a JSON object");
  RunConfig c = default_run_config();
  const ordered_json known = to_json(c);
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  auto maybe = [&](const char* key, auto& field) {
    if (obj.contains(key)) read_field(obj, key, field);
  };
  maybe("data_path", c.data_path);
  maybe("data_format", c.data_format);
  maybe("train_ratio", c.train_ratio);
  maybe("validation_ratio", c.validation_ratio);
  maybe("test_ratio", c.test_ratio);
  maybe("seed", c.seed);
  maybe("k", c.k);
  maybe("sigma", c.sigma);
  maybe("embed_dim", c.embed_dim);
  maybe("hidden_dim", c.hidden_dim);
  maybe("dense_dim", c.dense_dim);
  maybe("max_seq_len", c.max_seq_len);
  maybe("pooling", c.pooling);
  maybe("epochs_per_round", c.epochs_per_round);
  maybe("reject_policy", c.reject_policy);
  maybe("sentiment_encoder", c.sentiment_encoder);
  maybe("sentiment_sidecar", c.sentiment_sidecar);
  maybe("output_dir", c.output_dir);
  return c;
}

void save_run_config(const fs::path& path, const RunConfig& config) {
  write_text(path, to_json(config).dump(2) + "\n");
}

void validate(const RunConfig& c) {
  if (c.data_path.empty()) throw ConfigError("data_path is empty");
  if (!fs::exists(c.data_path)) throw ConfigError("data_path does not exist: " + c.data_path);
  if (c.data_format != "auto") parse_corpus_format(c.data_format);
  for (double r : {c.train_ratio, c.validation_ratio, c.test_ratio}) {
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("split ratios must lie in (0, 1)");
  }
  SelfTrainConfig st;
  st.k = c.k;
  st.sigma = c.sigma;
  st.epochs_per_round = c.epochs_per_round;
  st.validate();
  parse_reject_policy(c.reject_policy);
  parse_pooling(c.pooling);
  if (c.embed_dim == 0 || c.hidden_dim == 0 || c.dense_dim == 0 || c.max_seq_len == 0) {
    throw ConfigError("model dimensions must be at least 1");
  }
  if (c.sentiment_encoder == "precomputed") {
    if (c.sentiment_sidecar.empty()) throw ConfigError("the precomputed encoder needs sentiment_sidecar");
    if (!fs::exists(c.sentiment_sidecar)) throw ConfigError("sentiment_sidecar does not exist: " + c.sentiment_sidecar);
  } else if (c.sentiment_encoder != "lexicon") {
    throw ConfigError("unknown sentiment encoder '" + c.sentiment_encoder + "' (expected lexicon or precomputed)");
  }
  if (c.output_dir.empty()) throw ConfigError("output_dir is empty");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-training fake news classifier"};
  app.require_subcommand(1);

  std::string config_file;
  Overrides ingest_o, selftrain_o, baseline_o;

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and write a normalized JSONL copy");
  std::string ingest_output;
  add_data_options(ingest, ingest_o);
  ingest_o.add(ingest, "--out", &RunConfig::output_dir, "Directory for the normalized copy");
  ingest->add_option("--output", ingest_output, "Normalized JSONL file (default <out>/corpus.jsonl)");

  auto* selftrain = app.add_subcommand("selftrain", "Run the fold-wise self-training loop");
  std::string fold_plan_file;
  selftrain->add_option("--config", config_file, "JSON run config");
  selftrain->add_option("--fold-plan", fold_plan_file, "Use this fold plan instead of deriving one");
  add_run_options(selftrain, selftrain_o);

  auto* baseline = app.add_subcommand("baseline", "Train a supervised baseline on the train split");
  BaselineOptions bopts;
  baseline->add_option("--method", bopts.method, "logreg or nb")->required();
  baseline->add_option("--config", config_file, "JSON run config");
  baseline->add_option("--alpha", bopts.alpha, "Naive Bayes smoothing");
  baseline->add_option("--l2", bopts.l2, "Logistic regression L2 strength");
  baseline->add_option("--lr", bopts.learning_rate, "Logistic regression step size");
  baseline->add_option("--lr-epochs", bopts.epochs, "Logistic regression epochs");
  add_run_options(baseline, baseline_o);

  auto* evaluate = app.add_subcommand("evaluate", "Re-score a run's checkpoint on a split");
  std::string run_dir, split_name = "test", checkpoint;
  evaluate->add_option("--run-dir", run_dir, "Directory written by selftrain")->required();
  evaluate->add_option("--split", split_name, "train, validation or test");
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file (default <run-dir>/checkpoint.json)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      RunConfig c = default_run_config();
      c.data_path.clear();
      ingest_o.apply(c);
      return cmd_ingest(c, ingest_output, out);
    }
    if (selftrain->parsed()) return cmd_selftrain(resolve_config(config_file, selftrain_o), fold_plan_file, out);
    if (baseline->parsed()) return cmd_baseline(resolve_config(config_file, baseline_o), bopts, out);
    if (evaluate->parsed()) return cmd_evaluate(run_dir, split_name, checkpoint, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const LookupError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const LeakageError& e) {
    err << "leakage guard: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const ContractError& e) {
    err << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    err << "unexpected failure: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace fnd::cli
