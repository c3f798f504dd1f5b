#pragma once

// Fold-wise pseudo-labeling loop.
//
// Round 1 trains on the labeled part of fold 1 and reports on validation.
// Each later round i scores fold i with the previous model, absorbs the
// confident predictions as hard labels, retrains from scratch and reports on
// validation, except the last round, which reports on test.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "fnd/dataset.hpp"
#include "fnd/metrics.hpp"
#include "fnd/model.hpp"

namespace fnd {

enum class RejectPolicy { drop, defer };

const char* reject_policy_name(RejectPolicy policy);
RejectPolicy parse_reject_policy(const std::string& name);

struct SelfTrainConfig {
  std::size_t k = 5;
  double sigma = 0.95;
  std::size_t epochs_per_round = 10;
  std::uint64_t seed = 0;
  RejectPolicy reject_policy = RejectPolicy::drop;

  // Throws ConfigError unless 0.5 < sigma < 1, k >= 2 and epochs >= 1.
  void validate() const;
};

enum class Decision { accepted_1, accepted_0, rejected };

const char* decision_name(Decision decision);
Decision parse_decision(const std::string& name);

// accepted_1 iff p > sigma, accepted_0 iff p < 1 - sigma.
Decision decide(double probability, double sigma);

struct PseudoLabel {
  std::string id;
  double probability = 0.0;
  Decision decision = Decision::rejected;
  std::size_t round = 0;
  bool retry = false;  // re-scored after being deferred in the previous round
};

struct PseudoLabelBatch {
  std::size_t round = 0;
  double sigma = 0.0;
  std::vector<PseudoLabel> entries;

  std::size_t count(Decision decision) const;
  std::size_t accepted() const { return count(Decision::accepted_0) + count(Decision::accepted_1); }
};

struct TrainEntry {
  std::string id;
  int label = 0;
  bool pseudo = false;
};

class TrainSet {
 public:
  TrainSet() = default;
  explicit TrainSet(std::vector<TrainEntry> entries);

  // Throws ContractError if the id is already present.
  void add(TrainEntry entry);
  bool contains(const std::string& id) const { return ids_.count(id) > 0; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<TrainEntry>& entries() const noexcept { return entries_; }
  std::vector<std::string> ids() const;
  std::size_t pseudo_count() const;

 private:
  std::vector<TrainEntry> entries_;
  std::unordered_set<std::string> ids_;
};

struct Augmentation {
  TrainSet train;
  // Rejected records to score once more next round (defer policy, first rejection only).
  std::vector<std::string> deferred;
};

// Accepted records join with their pseudo-labels; rejected ones are dropped,
// or deferred once under RejectPolicy::defer. Throws ContractError on an id
// already in the train set.
Augmentation augment_train_set(const TrainSet& current, const PseudoLabelBatch& batch, RejectPolicy policy);

// A model that can be refit from scratch on labeled ids and then score ids.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual void fit(const TrainSet& train, std::uint64_t seed) = 0;
  virtual std::vector<double> predict(std::span<const std::string> ids) const = 0;
};

struct NeuralTrainingOptions {
  std::size_t epochs = 10;
  std::size_t batch_size = 8;
  AdamConfig optimizer{.learning_rate = 3e-3};
};

// Trains a fresh Model on assembled features looked up by id.
class NeuralLearner final : public Learner {
 public:
  NeuralLearner(const AssembledCorpus& corpus, ModelConfig config, NeuralTrainingOptions options);

  void fit(const TrainSet& train, std::uint64_t seed) override;
  std::vector<double> predict(std::span<const std::string> ids) const override;

  const Model& model() const;
  // Mean loss of each epoch of the last fit.
  const std::vector<double>& epoch_losses() const noexcept { return epoch_losses_; }
  NeuralTrainingOptions& options() noexcept { return options_; }

 private:
  const AssembledCorpus& corpus_;
  ModelConfig config_;
  NeuralTrainingOptions options_;
  std::unique_ptr<Model> model_;
  std::vector<double> epoch_losses_;
};

// Scores `ids` and applies the sigma rule. Throws ContractError on an empty fold.
PseudoLabelBatch pseudo_label(const Learner& learner, std::span<const std::string> ids, double sigma,
                              std::size_t round);

// Thresholds at 0.5. Throws ContractError unless every id belongs to `part`.
Metrics evaluate(const Learner& learner, std::span<const std::string> ids, const DatasetSplit& split, SplitPart part,
                 const AssembledCorpus& corpus);

struct RoundReport {
  std::size_t round = 0;  // 1-based
  std::string label;      // "Fold1-Val", "Fold+2-Val", ..., "Fold+k-Test"
  SplitPart evaluated_on = SplitPart::validation;
  Metrics metrics;
  std::size_t train_size = 0;
  std::size_t pseudo_labeled = 0;
  std::size_t scored = 0;
  std::size_t accepted_1 = 0;
  std::size_t accepted_0 = 0;
  std::size_t rejected = 0;
  std::size_t deferred = 0;
  std::uint64_t train_fingerprint = 0;
};

std::string round_label(std::size_t round, std::size_t k);

struct RoundLogEntry {
  RoundReport report;
  double sigma = 0.0;
  PseudoLabelBatch batch;
};

struct SelfTrainResult {
  std::vector<RoundReport> reports;
  std::vector<RoundLogEntry> log;
  TrainSet final_train;
};

// Runs the k rounds. `learner` is refit every round and holds the final model
// afterwards. Throws LeakageError if a train set ever meets validation or test.
SelfTrainResult run_self_training(const DatasetSplit& split, const FoldPlan& plan, const AssembledCorpus& corpus,
                                  Learner& learner, const SelfTrainConfig& config);

// One JSON object per round.
void write_round_log(const std::filesystem::path& path, std::span<const RoundLogEntry> log);
std::vector<RoundLogEntry> read_round_log(const std::filesystem::path& path);

struct ReplaySummary {
  std::size_t rounds = 0;
  std::size_t decisions = 0;
  std::size_t absorbed = 0;
};

// Re-applies the sigma rule to every logged probability and checks that each
// round's train set is the previous one plus exactly its accepted records.
// Throws ContractError describing the first violation.
ReplaySummary replay_round_log(std::span<const RoundLogEntry> log);

}  // namespace fnd
