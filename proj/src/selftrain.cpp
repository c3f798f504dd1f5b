#include "fnd/selftrain.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "fnd/errors.hpp"
#include "fnd/rng.hpp"

namespace fnd {

using nlohmann::ordered_json;

namespace {

int binary_label(Label label, const std::string& id) {
  if (label == Label::unlabeled) throw ContractError("record '" + id + "' has no label");
  return label == Label::fake ? 1 : 0;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

void guard_train_set(const TrainSet& train, const DatasetSplit& split, std::size_t round) {
  for (const auto& e : train.entries()) {
    const auto part = split.part_of(e.id);
    if (part && *part != SplitPart::train) {
      throw LeakageError("round " + std::to_string(round) + ": train set contains " + split_part_name(*part) +
                         " record '" + e.id + "'");
    }
    if (!part) throw ContractError("round " + std::to_string(round) + ": unknown record '" + e.id + "' in train set");
  }
}

}  // namespace

const char* reject_policy_name(RejectPolicy policy) { return policy == RejectPolicy::drop ? "drop" : "defer"; }

RejectPolicy parse_reject_policy(const std::string& name) {
  if (name == "drop") return RejectPolicy::drop;
  if (name == "defer") return RejectPolicy::defer;
  throw ConfigError("unknown reject policy '" + name + "' (expected drop or defer)");
}

void SelfTrainConfig::validate() const {
  if (!(sigma > 0.5 && sigma < 1.0)) {
    throw ConfigError("sigma must lie in (0.5, 1), got " + std::to_string(sigma));
  }
  if (k < 2) throw ConfigError("k must be at least 2, got " + std::to_string(k));
  if (epochs_per_round == 0) throw ConfigError("epochs_per_round must be at least 1");
}

const char* decision_name(Decision decision) {
  switch (decision) {
    case Decision::accepted_1: return "accepted_1";
    case Decision::accepted_0: return "accepted_0";
    case Decision::rejected: return "rejected";
  }
  return "rejected";
}

Decision parse_decision(const std::string& name) {
  if (name == "accepted_1") return Decision::accepted_1;
  if (name == "accepted_0") return Decision::accepted_0;
  if (name == "rejected") return Decision::rejected;
  throw ParseError("unknown decision '" + name + "'", 0);
}

Decision decide(double probability, double sigma) {
  if (probability > sigma) return Decision::accepted_1;
  if (probability < 1.0 - sigma) return Decision::accepted_0;
  return Decision::rejected;
}

std::size_t PseudoLabelBatch::count(Decision decision) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const PseudoLabel& e) { return e.decision == decision; }));
}

// ---- train set ------------------------------------------------------------

TrainSet::TrainSet(std::vector<TrainEntry> entries) {
  for (auto& e : entries) add(std::move(e));
}

void TrainSet::add(TrainEntry entry) {
  if (entry.label != 0 && entry.label != 1) throw ContractError("train label for '" + entry.id + "' is not 0 or 1");
  if (!ids_.insert(entry.id).second) throw ContractError("record '" + entry.id + "' is already in the train set");
  entries_.push_back(std::move(entry));
}

std::vector<std::string> TrainSet::ids() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.id);
  return out;
}

std::size_t TrainSet::pseudo_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const TrainEntry& e) { return e.pseudo; }));
}

Augmentation augment_train_set(const TrainSet& current, const PseudoLabelBatch& batch, RejectPolicy policy) {
  Augmentation out{current, {}};
  for (const auto& e : batch.entries) {
    if (current.contains(e.id)) {
      throw ContractError("pseudo-labeled record '" + e.id + "' is already in the train set");
    }
    switch (e.decision) {
      case Decision::accepted_1: out.train.add({e.id, 1, true}); break;
      case Decision::accepted_0: out.train.add({e.id, 0, true}); break;
      case Decision::rejected:
        if (policy == RejectPolicy::defer && !e.retry) out.deferred.push_back(e.id);
        break;
    }
  }
  return out;
}

// ---- neural learner -------------------------------------------------------

NeuralLearner::NeuralLearner(const AssembledCorpus& corpus, ModelConfig config, NeuralTrainingOptions options)
    : corpus_(corpus), config_(config), options_(options) {
  config_.validate();
  if (options_.epochs == 0) throw ConfigError("epochs must be at least 1");
  if (options_.batch_size == 0) throw ConfigError("batch size must be at least 1");
}

void NeuralLearner::fit(const TrainSet& train, std::uint64_t seed) {
  if (train.size() == 0) throw ContractError("fit: empty train set");
  model_ = std::make_unique<Model>(config_, seed);
  std::vector<Example> examples;
  examples.reserve(train.size());
  for (const auto& e : train.entries()) examples.push_back({&corpus_.features_of(e.id), static_cast<double>(e.label)});
  Rng order(mix_seed(seed, 0xba7c));
  Trainer trainer(*model_, options_.optimizer);
  epoch_losses_.clear();
  for (std::size_t epoch = 0; epoch < options_.epochs; ++epoch) {
    const auto batches = make_batches(examples, options_.batch_size, order);
    epoch_losses_.push_back(trainer.train_epoch(batches));
  }
}

std::vector<double> NeuralLearner::predict(std::span<const std::string> ids) const {
  const Model& m = model();
  std::vector<const FeatureVector*> inputs;
  inputs.reserve(ids.size());
  for (const auto& id : ids) inputs.push_back(&corpus_.features_of(id));
  return predict_proba(m, std::span<const FeatureVector* const>(inputs));
}

const Model& NeuralLearner::model() const {
  if (!model_) throw ContractError("learner has not been trained");
  return *model_;
}

// ---- loop -----------------------------------------------------------------

PseudoLabelBatch pseudo_label(const Learner& learner, std::span<const std::string> ids, double sigma,
                              std::size_t round) {
  if (ids.empty()) throw ContractError("pseudo_label: empty fold");
  const auto proba = learner.predict(ids);
  PseudoLabelBatch batch{round, sigma, {}};
  batch.entries.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) batch.entries.push_back({ids[i], proba[i], decide(proba[i], sigma), round});
  return batch;
}

Metrics evaluate(const Learner& learner, std::span<const std::string> ids, const DatasetSplit& split, SplitPart part,
                 const AssembledCorpus& corpus) {
  std::vector<int> truth;
  truth.reserve(ids.size());
  for (const auto& id : ids) {
    const auto actual = split.part_of(id);
    if (actual != part) {
      throw ContractError("evaluate: record '" + id + "' is not in the " + split_part_name(part) + " split");
    }
    truth.push_back(binary_label(corpus.label_of(id), id));
  }
  const auto proba = learner.predict(ids);
  return compute_metrics(confusion_from_proba(proba, truth));
}

std::string round_label(std::size_t round, std::size_t k) {
  if (round == 1) return "Fold1-Val";
  return "Fold+" + std::to_string(round) + (round == k ? "-Test" : "-Val");
}

SelfTrainResult run_self_training(const DatasetSplit& split, const FoldPlan& plan, const AssembledCorpus& corpus,
                                  Learner& learner, const SelfTrainConfig& config) {
  config.validate();
  if (plan.k != config.k) {
    throw ConfigError("fold plan has k=" + std::to_string(plan.k) + " but the run asks for k=" +
                      std::to_string(config.k));
  }
  check_no_leakage(plan, split);

  TrainSet train;
  std::vector<std::string> hidden_fold1;
  for (const auto& id : plan.folds[0]) {
    if (plan.exposes_label(id)) {
      train.add({id, binary_label(corpus.label_of(id), id), false});
    } else {
      hidden_fold1.push_back(id);
    }
  }
  if (train.size() == 0) throw ContractError("fold 1 exposes no labels");

  SelfTrainResult result;
  std::vector<std::string> deferred;
  for (std::size_t round = 1; round <= config.k; ++round) {
    PseudoLabelBatch batch{round, config.sigma, {}};
    if (round > 1) {
      std::vector<std::string> scored = plan.folds[round - 1];
      if (round == 2) scored.insert(scored.begin(), hidden_fold1.begin(), hidden_fold1.end());
      const std::unordered_set<std::string> retry(deferred.begin(), deferred.end());
      scored.insert(scored.end(), deferred.begin(), deferred.end());
      if (!scored.empty()) batch = pseudo_label(learner, scored, config.sigma, round);
      for (auto& e : batch.entries) e.retry = retry.count(e.id) > 0;
      auto augmented = augment_train_set(train, batch, config.reject_policy);
      train = std::move(augmented.train);
      deferred = std::move(augmented.deferred);
    }
    guard_train_set(train, split, round);
    learner.fit(train, mix_seed(config.seed, round));

    const bool last = round == config.k;
    const SplitPart part = last ? SplitPart::test : SplitPart::validation;
    const auto& eval_ids = last ? split.test : split.validation;

    RoundReport report;
    report.round = round;
    report.label = round_label(round, config.k);
    report.evaluated_on = part;
    report.metrics = evaluate(learner, eval_ids, split, part, corpus);
    report.train_size = train.size();
    report.pseudo_labeled = train.pseudo_count();
    report.scored = batch.entries.size();
    report.accepted_1 = batch.count(Decision::accepted_1);
    report.accepted_0 = batch.count(Decision::accepted_0);
    report.rejected = batch.count(Decision::rejected);
    report.deferred = deferred.size();
    report.train_fingerprint = fingerprint_ids(train.ids());

    result.reports.push_back(report);
    result.log.push_back({report, config.sigma, std::move(batch)});
  }
  result.final_train = std::move(train);
  return result;
}

// ---- round log ------------------------------------------------------------

void write_round_log(const std::filesystem::path& path, std::span<const RoundLogEntry> log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write round log " + path.string());
  for (const auto& entry : log) {
    const auto& r = entry.report;
    ordered_json batch = ordered_json::array();
    for (const auto& e : entry.batch.entries) {
      batch.push_back({{"id", e.id}, {"p", e.probability}, {"decision", decision_name(e.decision)}, {"retry", e.retry}});
    }
    const ordered_json obj = {
        {"round", r.round},
        {"label", r.label},
        {"evaluated_on", split_part_name(r.evaluated_on)},
        {"sigma", entry.sigma},
        {"train_size", r.train_size},
        {"pseudo_labeled", r.pseudo_labeled},
        {"train_hash", hex64(r.train_fingerprint)},
        {"scored", r.scored},
        {"accepted_1", r.accepted_1},
        {"accepted_0", r.accepted_0},
        {"rejected", r.rejected},
        {"deferred", r.deferred},
        {"metrics",
         {{"accuracy", r.metrics.accuracy},
          {"precision", r.metrics.precision},
          {"recall", r.metrics.recall},
          {"f1", r.metrics.f1}}},
        {"batch", batch}};
    out << obj.dump() << '\n';
  }
}

std::vector<RoundLogEntry> read_round_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open round log " + path.string(), 0);
  std::vector<RoundLogEntry> log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      RoundLogEntry entry;
      auto& r = entry.report;
      r.round = obj.at("round").get<std::size_t>();
      r.label = obj.at("label").get<std::string>();
      r.evaluated_on = obj.at("evaluated_on") == "test" ? SplitPart::test : SplitPart::validation;
      entry.sigma = obj.at("sigma").get<double>();
      r.train_size = obj.at("train_size").get<std::size_t>();
      r.pseudo_labeled = obj.at("pseudo_labeled").get<std::size_t>();
      r.train_fingerprint = parse_hex64(obj.at("train_hash").get<std::string>());
      r.scored = obj.at("scored").get<std::size_t>();
      r.accepted_1 = obj.at("accepted_1").get<std::size_t>();
      r.accepted_0 = obj.at("accepted_0").get<std::size_t>();
      r.rejected = obj.at("rejected").get<std::size_t>();
      r.deferred = obj.at("deferred").get<std::size_t>();
      const auto& m = obj.at("metrics");
      r.metrics = {m.at("accuracy").get<double>(), m.at("precision").get<double>(), m.at("recall").get<double>(),
                   m.at("f1").get<double>()};
      entry.batch.round = r.round;
      entry.batch.sigma = entry.sigma;
      for (const auto& e : obj.at("batch")) {
        entry.batch.entries.push_back({e.at("id").get<std::string>(), e.at("p").get<double>(),
                                       parse_decision(e.at("decision").get<std::string>()), r.round,
                                       e.at("retry").get<bool>()});
      }
      log.push_back(std::move(entry));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed round log entry: ") + e.what(), line_no);
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("malformed round log entry: ") + e.what(), line_no);
    }
  }
  return log;
}

ReplaySummary replay_round_log(std::span<const RoundLogEntry> log) {
  ReplaySummary summary;
  std::size_t previous_size = 0;
  std::size_t previous_pseudo = 0;
  std::unordered_set<std::string> absorbed;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& entry = log[i];
    const auto& r = entry.report;
    const std::string where = "round " + std::to_string(r.round) + ": ";
    if (r.round != i + 1) throw ContractError(where + "rounds are out of order");
    if (!(entry.sigma > 0.5 && entry.sigma < 1.0)) throw ContractError(where + "logged sigma outside (0.5, 1)");
    std::size_t accepted = 0;
    for (const auto& e : entry.batch.entries) {
      const Decision expected = decide(e.probability, entry.sigma);
      if (e.decision != expected) {
        throw ContractError(where + "record '" + e.id + "' with p=" + std::to_string(e.probability) + " logged as " +
                            decision_name(e.decision) + " but the rule gives " + decision_name(expected));
      }
      if (expected != Decision::rejected) {
        ++accepted;
        if (!absorbed.insert(e.id).second) throw ContractError(where + "record '" + e.id + "' absorbed twice");
      }
      ++summary.decisions;
    }
    if (accepted != r.accepted_0 + r.accepted_1 || entry.batch.entries.size() != r.scored) {
      throw ContractError(where + "logged counts disagree with the logged batch");
    }
    if (i == 0 && accepted != 0) throw ContractError(where + "the first round cannot absorb pseudo-labels");
    if (i > 0) {
      if (r.train_size < previous_size) throw ContractError(where + "train set shrank");
      if (r.train_size != previous_size + accepted || r.pseudo_labeled != previous_pseudo + accepted) {
        throw ContractError(where + "train set grew by " + std::to_string(r.train_size - previous_size) +
                            " but " + std::to_string(accepted) + " records were accepted");
      }
    }
    summary.absorbed += accepted;
    previous_size = r.train_size;
    previous_pseudo = r.pseudo_labeled;
  }
  summary.rounds = log.size();
  return summary;
}

}  // namespace fnd
