#pragma once

// Hybrid text + auxiliary-feature classifier.
//
// Each text channel runs embed -> LSTM -> pooling; pooled vectors are
// concatenated with the auxiliary columns and passed through a ReLU dense
// layer and a sigmoid output unit.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fnd/features.hpp"
#include "fnd/optim.hpp"
#include "fnd/rng.hpp"
#include "fnd/tensor.hpp"

namespace fnd {

enum class Pooling { attention, last_hidden };

const char* pooling_name(Pooling pooling);
Pooling parse_pooling(const std::string& name);

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t dense_dim = 32;
  std::size_t text_channels = 2;
  std::size_t aux_dim = 13;
  std::size_t max_seq_len = 100;
  Pooling pooling = Pooling::attention;

  // Throws ConfigError when a dimension is zero (aux_dim may be zero).
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct EmbeddingLayer {
  Tensor table;  // [vocab x dim]; row 0 is the padding row
};

// Fused gates in the order input, forget, cell, output.
struct LSTMLayer {
  Tensor w_input;   // [4H x E]
  Tensor w_hidden;  // [4H x H]
  Tensor bias;      // [4H]

  std::size_t hidden_dim() const { return bias.size() / 4; }
};

struct SelfAttentionPool {
  Tensor weight;   // [H x H]
  Tensor bias;     // [H]
  Tensor context;  // [H], scored against tanh(weight h_t + bias)
};

struct AttentionResult {
  Tensor summary;               // [H]
  std::vector<double> weights;  // one per position, 0 where masked
};

// `masked[t]` marks positions excluded from the pool. Throws ContractError
// when every position is masked and DimensionError on shape mismatch.
AttentionResult attention_pool(const SelfAttentionPool& pool, const Tensor& hidden, const std::vector<bool>& masked);

// Hidden states for the given inputs [T x E] -> [T x H], from zero state.
Tensor lstm_forward(const LSTMLayer& layer, const Tensor& inputs);

class Model {
 public:
  Model(ModelConfig config, std::uint64_t seed);

  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const noexcept { return config_; }

  // Probability of the positive class as a [1] tensor, recorded on the active tape.
  Tensor forward(const FeatureVector& input) const;
  double predict(const FeatureVector& input) const;

  std::span<Parameter> parameters() noexcept { return params_; }
  std::span<const Parameter> parameters() const noexcept { return params_; }
  Parameter& parameter(const std::string& name);
  const Parameter& parameter(const std::string& name) const;

  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);

 private:
  Model() = default;
  void bind_layers();
  Tensor encode_channel(std::size_t channel, const TokenSequence& seq) const;

  ModelConfig config_;
  std::vector<Parameter> params_;

  EmbeddingLayer embedding_;
  std::vector<LSTMLayer> lstms_;
  std::vector<SelfAttentionPool> pools_;
  Tensor dense_weight_, dense_bias_, output_weight_, output_bias_;
};

// Frozen-parameter inference over many inputs; output order matches input order.
std::vector<double> predict_proba(const Model& model, std::span<const FeatureVector* const> inputs);
std::vector<double> predict_proba(const Model& model, std::span<const FeatureVector> inputs);

struct Example {
  const FeatureVector* input = nullptr;
  double label = 0.0;
};

using Batch = std::vector<Example>;

// Shuffles with `rng` and cuts into batches of at most `batch_size`.
std::vector<Batch> make_batches(std::vector<Example> examples, std::size_t batch_size, Rng& rng);

class Trainer {
 public:
  // A learning rate of exactly 0 evaluates the loss without updating.
  Trainer(Model& model, AdamConfig optimizer);

  // One pass with mean BCE per batch; returns the mean of the batch losses.
  double train_epoch(std::span<const Batch> batches);

 private:
  Model& model_;
  bool frozen_;
  Adam adam_;
};

}  // namespace fnd
