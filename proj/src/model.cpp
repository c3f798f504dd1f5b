#include "fnd/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "fnd/errors.hpp"
#include "fnd/parallel.hpp"
#include "fnd/text.hpp"

namespace fnd {

namespace {

constexpr const char* kCheckpointFormat = "fnd-checkpoint";
constexpr int kCheckpointVersion = 1;

void xavier_fill(std::span<double> block, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& w : block) w = rng.uniform(-limit, limit);
}

Tensor xavier(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t({rows, cols});
  xavier_fill(t.mutable_data(), cols, rows, rng);
  return t;
}

// Each of the four gate blocks is initialized as its own [H x in] matrix.
Tensor gate_xavier(std::size_t hidden, std::size_t in, Rng& rng) {
  Tensor t({4 * hidden, in});
  auto data = t.mutable_data();
  for (std::size_t g = 0; g < 4; ++g) xavier_fill(data.subspan(g * hidden * in, hidden * in), in, hidden, rng);
  return t;
}

std::string channel_prefix(std::size_t channel) { return "channel" + std::to_string(channel) + "."; }

}  // namespace

const char* pooling_name(Pooling pooling) {
  return pooling == Pooling::attention ? "attention" : "last_hidden";
}

Pooling parse_pooling(const std::string& name) {
  if (name == "attention") return Pooling::attention;
  if (name == "last_hidden") return Pooling::last_hidden;
  throw ConfigError("unknown pooling '" + name + "' (expected attention or last_hidden)");
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string("model config: ") + what + " must be at least 1");
  };
  positive(vocab_size, "vocab_size");
  positive(embed_dim, "embed_dim");
  positive(hidden_dim, "hidden_dim");
  positive(dense_dim, "dense_dim");
  positive(max_seq_len, "max_seq_len");
  if (text_channels + aux_dim == 0) throw ConfigError("model config: no inputs (text_channels and aux_dim are 0)");
}

// ---- layers ---------------------------------------------------------------

Tensor lstm_forward(const LSTMLayer& layer, const Tensor& inputs) {
  const std::size_t hid = layer.hidden_dim();
  if (inputs.rank() != 2 || inputs.cols() != layer.w_input.cols()) {
    throw DimensionError("lstm: inputs " + shape_string(inputs.shape()) + " do not match input weights " +
                         shape_string(layer.w_input.shape()));
  }
  const std::size_t steps = inputs.rows();
  // Input contributions for every step at once: [T x 4H].
  const Tensor projected = add_rowwise(matmul(inputs, transpose(layer.w_input)), layer.bias);

  Tensor h({hid});
  Tensor c({hid});
  std::vector<Tensor> states;
  states.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const Tensor gates = add(row(projected, t), matmul(layer.w_hidden, h));
    const Tensor in_gate = sigmoid(slice(gates, 0, hid));
    const Tensor forget_gate = sigmoid(slice(gates, hid, hid));
    const Tensor candidate = tanh(slice(gates, 2 * hid, hid));
    const Tensor out_gate = sigmoid(slice(gates, 3 * hid, hid));
    c = add(mul(forget_gate, c), mul(in_gate, candidate));
    h = mul(out_gate, tanh(c));
    states.push_back(h);
  }
  return stack(states);
}

AttentionResult attention_pool(const SelfAttentionPool& pool, const Tensor& hidden, const std::vector<bool>& masked) {
  if (!hidden.defined() || hidden.rank() != 2) throw DimensionError("attention_pool: hidden states must be a matrix");
  const std::size_t steps = hidden.rows();
  const std::size_t hid = hidden.cols();
  if (masked.size() != steps) {
    throw DimensionError("attention_pool: mask has " + std::to_string(masked.size()) + " entries for " +
                         std::to_string(steps) + " positions");
  }
  if (pool.weight.shape() != Shape{hid, hid} || pool.bias.shape() != Shape{hid} || pool.context.shape() != Shape{hid}) {
    throw DimensionError("attention_pool: parameters do not match hidden size " + std::to_string(hid));
  }
  std::vector<std::size_t> kept;
  for (std::size_t t = 0; t < steps; ++t)
    if (!masked[t]) kept.push_back(t);
  if (kept.empty()) throw ContractError("attention_pool: every position is masked");

  const Tensor states = kept.size() == steps ? hidden : select_rows(hidden, kept);
  const Tensor keys = tanh(add_rowwise(matmul(states, transpose(pool.weight)), pool.bias));
  const Tensor alpha = softmax(matmul(keys, pool.context));
  Tensor summary = matmul(transpose(states), alpha);

  std::vector<double> weights(steps, 0.0);
  for (std::size_t i = 0; i < kept.size(); ++i) weights[kept[i]] = alpha[i];
  return {std::move(summary), std::move(weights)};
}

// ---- model ----------------------------------------------------------------

Model::Model(ModelConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const std::size_t e = config_.embed_dim, h = config_.hidden_dim;

  auto add_param = [&](std::string name, Tensor value) { params_.push_back({std::move(name), std::move(value)}); };
  if (config_.text_channels > 0) add_param("embedding.table", xavier(config_.vocab_size, e, rng));
  for (std::size_t ch = 0; ch < config_.text_channels; ++ch) {
    const std::string p = channel_prefix(ch);
    add_param(p + "lstm.w_input", gate_xavier(h, e, rng));
    add_param(p + "lstm.w_hidden", gate_xavier(h, h, rng));
    add_param(p + "lstm.bias", Tensor({4 * h}));
    if (config_.pooling == Pooling::attention) {
      add_param(p + "attention.weight", xavier(h, h, rng));
      add_param(p + "attention.bias", Tensor({h}));
      Tensor context({h});
      xavier_fill(context.mutable_data(), h, 1, rng);
      add_param(p + "attention.context", std::move(context));
    }
  }
  const std::size_t fused = config_.text_channels * h + config_.aux_dim;
  add_param("dense.weight", xavier(config_.dense_dim, fused, rng));
  add_param("dense.bias", Tensor({config_.dense_dim}));
  add_param("output.weight", xavier(1, config_.dense_dim, rng));
  add_param("output.bias", Tensor({1}));
  for (auto& p : params_) p.value.set_requires_grad(true);
  bind_layers();
}

void Model::bind_layers() {
  std::unordered_set<std::string> seen;
  for (const auto& p : params_) {
    if (!seen.insert(p.name).second) throw ContractError("duplicate parameter name '" + p.name + "'");
  }
  lstms_.clear();
  pools_.clear();
  if (config_.text_channels > 0) embedding_.table = parameter("embedding.table").value;
  for (std::size_t ch = 0; ch < config_.text_channels; ++ch) {
    const std::string p = channel_prefix(ch);
    lstms_.push_back({parameter(p + "lstm.w_input").value, parameter(p + "lstm.w_hidden").value,
                      parameter(p + "lstm.bias").value});
    if (config_.pooling == Pooling::attention) {
      pools_.push_back({parameter(p + "attention.weight").value, parameter(p + "attention.bias").value,
                        parameter(p + "attention.context").value});
    }
  }
  dense_weight_ = parameter("dense.weight").value;
  dense_bias_ = parameter("dense.bias").value;
  output_weight_ = parameter("output.weight").value;
  output_bias_ = parameter("output.bias").value;
}

Parameter& Model::parameter(const std::string& name) {
  auto it = std::find_if(params_.begin(), params_.end(), [&](const Parameter& p) { return p.name == name; });
  if (it == params_.end()) throw LookupError("model has no parameter '" + name + "'");
  return *it;
}

const Parameter& Model::parameter(const std::string& name) const {
  return const_cast<Model*>(this)->parameter(name);
}

Tensor Model::encode_channel(std::size_t channel, const TokenSequence& seq) const {
  const std::size_t hid = config_.hidden_dim;
  if (seq.ids.size() != config_.max_seq_len) {
    throw DimensionError("channel " + std::to_string(channel) + ": sequence length " + std::to_string(seq.ids.size()) +
                         " differs from max_seq_len " + std::to_string(config_.max_seq_len));
  }
  if (seq.true_length > seq.ids.size()) {
    throw DimensionError("channel " + std::to_string(channel) + ": true length exceeds sequence length");
  }
  std::vector<std::size_t> ids;
  std::vector<bool> masked;
  ids.reserve(seq.true_length);
  for (std::size_t t = 0; t < seq.true_length; ++t) {
    const auto id = seq.ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw DimensionError("token id " + std::to_string(id) + " outside vocabulary of " +
                           std::to_string(config_.vocab_size));
    }
    ids.push_back(static_cast<std::size_t>(id));
    masked.push_back(id == kPadId);
  }
  // Nothing to read: the channel contributes a zero summary.
  if (std::find(masked.begin(), masked.end(), false) == masked.end()) return Tensor({hid});

  const Tensor states = lstm_forward(lstms_[channel], select_rows(embedding_.table, ids));
  if (config_.pooling == Pooling::attention) return attention_pool(pools_[channel], states, masked).summary;
  std::size_t last = masked.size() - 1;
  while (masked[last]) --last;
  return row(states, last);
}

Tensor Model::forward(const FeatureVector& input) const {
  if (input.text_channels.size() != config_.text_channels) {
    throw DimensionError("expected " + std::to_string(config_.text_channels) + " text channels, got " +
                         std::to_string(input.text_channels.size()));
  }
  if (input.aux.size() != config_.aux_dim) {
    throw DimensionError("expected " + std::to_string(config_.aux_dim) + " auxiliary features, got " +
                         std::to_string(input.aux.size()));
  }
  std::vector<Tensor> parts;
  parts.reserve(config_.text_channels + 1);
  for (std::size_t ch = 0; ch < config_.text_channels; ++ch) parts.push_back(encode_channel(ch, input.text_channels[ch]));
  if (config_.aux_dim > 0) parts.push_back(Tensor::vector(input.aux));
  const Tensor fused = concat(parts);
  const Tensor hidden = relu(add(matmul(dense_weight_, fused), dense_bias_));
  return sigmoid(add(matmul(output_weight_, hidden), output_bias_));
}

double Model::predict(const FeatureVector& input) const { return forward(input).item(); }

std::vector<double> predict_proba(const Model& model, std::span<const FeatureVector* const> inputs) {
  std::vector<double> out(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) { out[i] = model.predict(*inputs[i]); });
  return out;
}

std::vector<double> predict_proba(const Model& model, std::span<const FeatureVector> inputs) {
  std::vector<const FeatureVector*> ptrs;
  ptrs.reserve(inputs.size());
  for (const auto& f : inputs) ptrs.push_back(&f);
  return predict_proba(model, std::span<const FeatureVector* const>(ptrs));
}

// ---- checkpoint -----------------------------------------------------------

void Model::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json cfg = {{"vocab_size", config_.vocab_size}, {"embed_dim", config_.embed_dim},
                                {"hidden_dim", config_.hidden_dim}, {"dense_dim", config_.dense_dim},
                                {"text_channels", config_.text_channels}, {"aux_dim", config_.aux_dim},
                                {"max_seq_len", config_.max_seq_len}, {"pooling", pooling_name(config_.pooling)}};
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  for (const auto& p : params_) {
    params.push_back({{"name", p.name},
                      {"shape", p.value.shape()},
                      {"data", std::vector<double>(p.value.data().begin(), p.value.data().end())}});
  }
  nlohmann::ordered_json doc = {
      {"format", kCheckpointFormat}, {"version", kCheckpointVersion}, {"config", cfg}, {"parameters", params}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << doc.dump() << '\n';
}

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path.string(), 0);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what(), 0);
  }
  try {
    if (doc.at("format") != kCheckpointFormat || doc.at("version") != kCheckpointVersion) {
      throw ParseError("checkpoint " + path.string() + ": unsupported format or version", 0);
    }
    const auto& c = doc.at("config");
    Model m;
    m.config_.vocab_size = c.at("vocab_size").get<std::size_t>();
    m.config_.embed_dim = c.at("embed_dim").get<std::size_t>();
    m.config_.hidden_dim = c.at("hidden_dim").get<std::size_t>();
    m.config_.dense_dim = c.at("dense_dim").get<std::size_t>();
    m.config_.text_channels = c.at("text_channels").get<std::size_t>();
    m.config_.aux_dim = c.at("aux_dim").get<std::size_t>();
    m.config_.max_seq_len = c.at("max_seq_len").get<std::size_t>();
    m.config_.pooling = parse_pooling(c.at("pooling").get<std::string>());
    m.config_.validate();

    // Shapes must agree with a freshly built model of the same config.
    const Model reference(m.config_, 0);
    const auto& stored = doc.at("parameters");
    if (stored.size() != reference.params_.size()) {
      throw ParseError("checkpoint " + path.string() + ": expected " + std::to_string(reference.params_.size()) +
                       " parameters, found " + std::to_string(stored.size()), 0);
    }
    for (std::size_t i = 0; i < stored.size(); ++i) {
      const auto& ref = reference.params_[i];
      auto name = stored[i].at("name").get<std::string>();
      auto shape = stored[i].at("shape").get<Shape>();
      auto data = stored[i].at("data").get<std::vector<double>>();
      if (name != ref.name || shape != ref.value.shape()) {
        throw ParseError("checkpoint " + path.string() + ": parameter '" + name + "' " + shape_string(shape) +
                         " does not match expected '" + ref.name + "' " + shape_string(ref.value.shape()), 0);
      }
      Tensor value(std::move(shape), std::move(data));
      value.set_requires_grad(true);
      m.params_.push_back({std::move(name), std::move(value)});
    }
    m.bind_layers();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what(), 0);
  } catch (const DimensionError& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what(), 0);
  }
}

// ---- training -------------------------------------------------------------

std::vector<Batch> make_batches(std::vector<Example> examples, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  rng.shuffle(examples);
  std::vector<Batch> batches;
  for (std::size_t i = 0; i < examples.size(); i += batch_size) {
    const std::size_t end = std::min(examples.size(), i + batch_size);
    batches.emplace_back(examples.begin() + static_cast<std::ptrdiff_t>(i),
                         examples.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

namespace {
AdamConfig optimizer_or_placeholder(const AdamConfig& config) {
  if (config.learning_rate < 0.0) throw ConfigError("learning rate must not be negative");
  if (config.learning_rate > 0.0) return config;
  AdamConfig placeholder = config;
  placeholder.learning_rate = 1.0;
  return placeholder;
}
}  // namespace

Trainer::Trainer(Model& model, AdamConfig optimizer)
    : model_(model), frozen_(optimizer.learning_rate == 0.0), adam_(optimizer_or_placeholder(optimizer)) {}

double Trainer::train_epoch(std::span<const Batch> batches) {
  if (batches.empty()) throw ContractError("train_epoch: empty batch stream");
  double total = 0.0;
  for (const auto& batch : batches) {
    if (batch.empty()) throw ContractError("train_epoch: empty batch");
    std::vector<double> labels;
    labels.reserve(batch.size());
    for (const auto& ex : batch) {
      if (ex.input == nullptr) throw ContractError("train_epoch: example without input");
      labels.push_back(ex.label);
    }
    Tape tape;
    std::vector<Tensor> probs;
    probs.reserve(batch.size());
    for (const auto& ex : batch) probs.push_back(model_.forward(*ex.input));
    const Tensor loss = bce_loss(concat(probs), Tensor::vector(std::move(labels)));
    total += loss.item();
    if (frozen_) continue;
    tape.backward(loss);
    adam_.step(model_.parameters());
  }
  zero_grads(model_.parameters());
  return total / static_cast<double>(batches.size());
}

}  // namespace fnd
