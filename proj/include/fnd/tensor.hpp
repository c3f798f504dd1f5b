#pragma once

// Dense double-precision tensors with tape-based reverse-mode differentiation.
//
// A Tensor is a shared handle: copies alias the same storage. Operations never
// modify their inputs; they return fresh tensors. When a Tape is active on the
// current thread and any input requires a gradient, the operation appends its
// local backward rule to that tape. Tape::backward replays the rules in reverse
// order and then discards them.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fnd {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

namespace detail {
struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first needed
  bool requires_grad = false;

  std::vector<double>& ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    return grad;
  }
};
}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  // Zero-filled tensor of the given shape.
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const;
  // In-place access for optimizers, initializers and checkpoint loading.
  std::span<double> mutable_data();
  double item() const;
  double operator[](std::size_t i) const { return data()[i]; }
  double at(std::size_t r, std::size_t c) const { return data()[r * cols() + c]; }

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool has_grad() const;
  // Gradient buffer, allocated (zero-filled) on first access.
  std::span<double> grad();
  std::span<const double> grad() const;
  void zero_grad();

  const void* identity() const noexcept { return impl_.get(); }
  const std::shared_ptr<detail::TensorImpl>& impl() const noexcept { return impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

struct Parameter {
  std::string name;
  Tensor value;
};

// Records backward rules for one forward pass. Constructing a Tape makes it
// the active tape for the calling thread until it is destroyed.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* active() noexcept;

  void record(std::function<void()> rule);
  std::size_t size() const noexcept { return rules_.size(); }

  // Seeds d(loss)/d(loss) = 1, accumulates gradients into every tensor that
  // requires them, and clears the tape. The loss must be a single element
  // produced by recorded operations.
  void backward(const Tensor& loss);

 private:
  std::vector<std::function<void()>> rules_;
  Tape* previous_;
};

// Runs backward on the tape active on this thread.
void backward(const Tensor& loss);

// ---- operations -----------------------------------------------------------

// [m x k] x [k x n] -> [m x n], or [m x k] x [k] -> [m].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);

// Numerically stable softmax over a rank-1 tensor.
Tensor softmax(const Tensor& x);

// Mean binary cross-entropy; probabilities are clamped to [eps, 1 - eps].
inline constexpr double kBceEpsilon = 1e-7;
Tensor bce_loss(const Tensor& p, const Tensor& y);

Tensor sum(const Tensor& x);
Tensor dot(const Tensor& a, const Tensor& b);

// Flattens and joins tensors into one rank-1 tensor.
Tensor concat(std::span<const Tensor> parts);
// Elements [offset, offset + length) of a rank-1 tensor.
Tensor slice(const Tensor& x, std::size_t offset, std::size_t length);
// Stacks equally sized rank-1 tensors as the rows of a matrix.
Tensor stack(std::span<const Tensor> rows);
// Row `index` of a matrix as a rank-1 tensor (embedding lookup).
Tensor row(const Tensor& table, std::size_t index);
// Matrix made of the listed rows of `m`, in order.
Tensor select_rows(const Tensor& m, std::span<const std::size_t> indices);
// Adds the rank-1 `bias` to every row of the matrix `m`.
Tensor add_rowwise(const Tensor& m, const Tensor& bias);

}  // namespace fnd
