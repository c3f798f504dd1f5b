#include "fnd/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fnd/errors.hpp"

namespace fnd {

namespace {

using Impl = detail::TensorImpl;
using ImplPtr = std::shared_ptr<Impl>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

thread_local Tape* g_active_tape = nullptr;

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

const Impl& checked(const Tensor& t, const char* op) {
  if (!t.defined()) throw DimensionError(std::string(op) + ": undefined (empty) tensor");
  return *t.impl();
}

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (Tape::active() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t->requires_grad(); });
}

// Wraps freshly computed data; marks it as requiring grad when recorded.
Tensor make_output(Shape shape, std::vector<double> data, bool recorded) {
  Tensor out(std::move(shape), std::move(data));
  if (recorded) out.set_requires_grad(true);
  return out;
}

// Only grads of tensors that require them are ever written.
std::vector<double>* grad_sink(const ImplPtr& impl) {
  return impl->requires_grad ? &impl->ensure_grad() : nullptr;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (checked(a, op).shape != checked(b, op).shape) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

template <class Forward, class Derivative>
Tensor unary(const Tensor& x, const char* op, Forward f, Derivative df) {
  const Impl& in = checked(x, op);
  std::vector<double> out(in.data.size());
  std::transform(in.data.begin(), in.data.end(), out.begin(), f);
  const bool rec = tracking({&x});
  Tensor y = make_output(in.shape, std::move(out), rec);
  if (rec) {
    Tape::active()->record([xi = x.impl(), yi = y.impl(), df] {
      if (yi->grad.empty()) return;
      auto& gx = xi->ensure_grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += yi->grad[i] * df(xi->data[i], yi->data[i]);
    });
  }
  return y;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

// ---- Tensor ---------------------------------------------------------------

Tensor::Tensor(Shape shape) : Tensor(shape, std::vector<double>(element_count(shape), 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> data) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape));
  }
  if (element_count(shape) != data.size()) {
    throw DimensionError("shape " + shape_string(shape) + " does not match " +
                         std::to_string(data.size()) + " elements");
  }
  impl_ = std::make_shared<Impl>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

const Shape& Tensor::shape() const { return checked(*this, "shape").shape; }
std::size_t Tensor::size() const { return checked(*this, "size").data.size(); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() of non-matrix " + shape_string(shape()));
  return shape()[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() of non-matrix " + shape_string(shape()));
  return shape()[1];
}

std::span<const double> Tensor::data() const { return checked(*this, "data").data; }
std::span<double> Tensor::mutable_data() {
  checked(*this, "mutable_data");
  return impl_->data;
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() of tensor " + shape_string(shape()));
  return impl_->data[0];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }
void Tensor::set_requires_grad(bool on) {
  checked(*this, "set_requires_grad");
  impl_->requires_grad = on;
}
bool Tensor::has_grad() const { return impl_ && impl_->grad.size() == impl_->data.size(); }

std::span<double> Tensor::grad() {
  checked(*this, "grad");
  return impl_->ensure_grad();
}

std::span<const double> Tensor::grad() const {
  checked(*this, "grad");
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (impl_ && !impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

// ---- Tape -----------------------------------------------------------------

Tape::Tape() : previous_(g_active_tape) { g_active_tape = this; }
Tape::~Tape() { g_active_tape = previous_; }

Tape* Tape::active() noexcept { return g_active_tape; }

void Tape::record(std::function<void()> rule) { rules_.push_back(std::move(rule)); }

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward: loss must be a scalar, got " +
                        (loss.defined() ? shape_string(loss.shape()) : std::string("undefined")));
  }
  if (!loss.requires_grad() || rules_.empty()) {
    throw ContractError("backward: loss was not produced by a recorded computation");
  }
  loss.impl()->ensure_grad()[0] = 1.0;
  for (auto it = rules_.rbegin(); it != rules_.rend(); ++it) (*it)();
  rules_.clear();
}

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (tape == nullptr) throw ContractError("backward: no active tape");
  tape->backward(loss);
}

// ---- operations -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  const Impl& ai = checked(a, "matmul");
  const Impl& bi = checked(b, "matmul");
  const bool b_vec = bi.shape.size() == 1;
  if (ai.shape.size() != 2 || bi.shape.size() > 2 || ai.shape[1] != bi.shape[0]) {
    throw DimensionError("matmul: incompatible shapes " + shape_string(ai.shape) + " and " +
                         shape_string(bi.shape));
  }
  const auto m = static_cast<Eigen::Index>(ai.shape[0]);
  const auto k = static_cast<Eigen::Index>(ai.shape[1]);
  const auto n = static_cast<Eigen::Index>(b_vec ? 1 : bi.shape[1]);

  std::vector<double> out(static_cast<std::size_t>(m * n));
  MatrixMap(out.data(), m, n).noalias() =
      ConstMatrixMap(ai.data.data(), m, k) * ConstMatrixMap(bi.data.data(), k, n);

  const bool rec = tracking({&a, &b});
  Shape shape = b_vec ? Shape{ai.shape[0]} : Shape{ai.shape[0], bi.shape[1]};
  Tensor c = make_output(std::move(shape), std::move(out), rec);
  if (rec) {
    Tape::active()->record([ap = a.impl(), bp = b.impl(), cp = c.impl(), m, k, n] {
      if (cp->grad.empty()) return;
      ConstMatrixMap dc(cp->grad.data(), m, n);
      if (auto* ga = grad_sink(ap)) {
        MatrixMap(ga->data(), m, k).noalias() += dc * ConstMatrixMap(bp->data.data(), k, n).transpose();
      }
      if (auto* gb = grad_sink(bp)) {
        MatrixMap(gb->data(), k, n).noalias() += ConstMatrixMap(ap->data.data(), m, k).transpose() * dc;
      }
    });
  }
  return c;
}

Tensor transpose(const Tensor& a) {
  const Impl& ai = checked(a, "transpose");
  if (ai.shape.size() != 2) throw DimensionError("transpose: expected a matrix, got " + shape_string(ai.shape));
  const std::size_t r = ai.shape[0], c = ai.shape[1];
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = ai.data[i * c + j];
  const bool rec = tracking({&a});
  Tensor t = make_output({c, r}, std::move(out), rec);
  if (rec) {
    Tape::active()->record([ap = a.impl(), tp = t.impl(), r, c] {
      if (tp->grad.empty()) return;
      auto& g = ap->ensure_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += tp->grad[j * r + i];
    });
  }
  return t;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto& x = a.impl()->data;
  const auto& y = b.impl()->data;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  const bool rec = tracking({&a, &b});
  Tensor c = make_output(a.shape(), std::move(out), rec);
  if (rec) {
    Tape::active()->record([ap = a.impl(), bp = b.impl(), cp = c.impl()] {
      if (cp->grad.empty()) return;
      for (auto* g : {grad_sink(ap), grad_sink(bp)}) {
        if (g == nullptr) continue;
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += cp->grad[i];
      }
    });
  }
  return c;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto& x = a.impl()->data;
  const auto& y = b.impl()->data;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  const bool rec = tracking({&a, &b});
  Tensor c = make_output(a.shape(), std::move(out), rec);
  if (rec) {
    Tape::active()->record([ap = a.impl(), bp = b.impl(), cp = c.impl()] {
      if (cp->grad.empty()) return;
      if (auto* ga = grad_sink(ap)) {
        for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += cp->grad[i] * bp->data[i];
      }
      if (auto* gb = grad_sink(bp)) {
        for (std::size_t i = 0; i < gb->size(); ++i) (*gb)[i] += cp->grad[i] * ap->data[i];
      }
    });
  }
  return c;
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, "tanh", [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, "sigmoid", stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor softmax(const Tensor& x) {
  const Impl& in = checked(x, "softmax");
  if (in.shape.size() != 1) throw DimensionError("softmax: expected rank-1 input, got " + shape_string(in.shape));
  const double peak = *std::max_element(in.data.begin(), in.data.end());
  std::vector<double> out(in.data.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(in.data[i] - peak);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  const bool rec = tracking({&x});
  Tensor y = make_output(in.shape, std::move(out), rec);
  if (rec) {
    Tape::active()->record([xp = x.impl(), yp = y.impl()] {
      if (yp->grad.empty()) return;
      const auto& s = yp->data;
      const auto& dy = yp->grad;
      double inner = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) inner += dy[i] * s[i];
      auto& gx = xp->ensure_grad();
      for (std::size_t i = 0; i < s.size(); ++i) gx[i] += s[i] * (dy[i] - inner);
    });
  }
  return y;
}

Tensor bce_loss(const Tensor& p, const Tensor& y) {
  const Impl& pi = checked(p, "bce_loss");
  const Impl& yi = checked(y, "bce_loss");
  if (pi.data.size() != yi.data.size()) {
    throw DimensionError("bce_loss: length mismatch " + shape_string(pi.shape) + " vs " + shape_string(yi.shape));
  }
  for (double label : yi.data) {
    if (label != 0.0 && label != 1.0) throw ContractError("bce_loss: targets must be 0 or 1");
  }
  const std::size_t n = pi.data.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = std::clamp(pi.data[i], kBceEpsilon, 1.0 - kBceEpsilon);
    total -= yi.data[i] * std::log(q) + (1.0 - yi.data[i]) * std::log(1.0 - q);
  }
  const bool rec = tracking({&p});
  Tensor loss = make_output({1}, {total / static_cast<double>(n)}, rec);
  if (rec) {
    Tape::active()->record([pp = p.impl(), yp = y.impl(), lp = loss.impl(), n] {
      if (lp->grad.empty()) return;
      const double scale = lp->grad[0] / static_cast<double>(n);
      auto& gp = pp->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const double raw = pp->data[i];
        // zero slope where the clamp is active
        if (raw < kBceEpsilon || raw > 1.0 - kBceEpsilon) continue;
        const double t = yp->data[i];
        gp[i] += scale * (-t / raw + (1.0 - t) / (1.0 - raw));
      }
    });
  }
  return loss;
}

Tensor sum(const Tensor& x) {
  const Impl& in = checked(x, "sum");
  const double total = std::accumulate(in.data.begin(), in.data.end(), 0.0);
  const bool rec = tracking({&x});
  Tensor s = make_output({1}, {total}, rec);
  if (rec) {
    Tape::active()->record([xp = x.impl(), sp = s.impl()] {
      if (sp->grad.empty()) return;
      for (auto& g : xp->ensure_grad()) g += sp->grad[0];
    });
  }
  return s;
}

Tensor dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  const auto& x = a.impl()->data;
  const auto& y = b.impl()->data;
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += x[i] * y[i];
  const bool rec = tracking({&a, &b});
  Tensor s = make_output({1}, {total}, rec);
  if (rec) {
    Tape::active()->record([ap = a.impl(), bp = b.impl(), sp = s.impl()] {
      if (sp->grad.empty()) return;
      const double g = sp->grad[0];
      if (auto* ga = grad_sink(ap)) {
        for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += g * bp->data[i];
      }
      if (auto* gb = grad_sink(bp)) {
        for (std::size_t i = 0; i < gb->size(); ++i) (*gb)[i] += g * ap->data[i];
      }
    });
  }
  return s;
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  std::vector<double> out;
  bool rec = false;
  for (const auto& part : parts) {
    const Impl& in = checked(part, "concat");
    out.insert(out.end(), in.data.begin(), in.data.end());
    rec = rec || tracking({&part});
  }
  const std::size_t n = out.size();
  Tensor c = make_output({n}, std::move(out), rec);
  if (rec) {
    std::vector<ImplPtr> inputs;
    inputs.reserve(parts.size());
    for (const auto& part : parts) inputs.push_back(part.impl());
    Tape::active()->record([inputs = std::move(inputs), cp = c.impl()] {
      if (cp->grad.empty()) return;
      std::size_t offset = 0;
      for (const auto& in : inputs) {
        if (auto* g = grad_sink(in)) {
          for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += cp->grad[offset + i];
        }
        offset += in->data.size();
      }
    });
  }
  return c;
}

Tensor slice(const Tensor& x, std::size_t offset, std::size_t length) {
  const Impl& in = checked(x, "slice");
  if (in.shape.size() != 1 || length == 0 || offset + length > in.data.size()) {
    throw DimensionError("slice: range [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
                         ") invalid for " + shape_string(in.shape));
  }
  const auto first = in.data.begin() + static_cast<std::ptrdiff_t>(offset);
  std::vector<double> out(first, first + static_cast<std::ptrdiff_t>(length));
  const bool rec = tracking({&x});
  Tensor s = make_output({length}, std::move(out), rec);
  if (rec) {
    Tape::active()->record([xp = x.impl(), sp = s.impl(), offset, length] {
      if (sp->grad.empty()) return;
      auto& g = xp->ensure_grad();
      for (std::size_t i = 0; i < length; ++i) g[offset + i] += sp->grad[i];
    });
  }
  return s;
}

Tensor stack(std::span<const Tensor> rows) {
  if (rows.empty()) throw DimensionError("stack: no rows");
  const Shape& first = checked(rows.front(), "stack").shape;
  if (first.size() != 1) throw DimensionError("stack: rows must be rank-1, got " + shape_string(first));
  const std::size_t width = first[0];
  std::vector<double> out;
  out.reserve(rows.size() * width);
  bool rec = false;
  for (const auto& r : rows) {
    const Impl& in = checked(r, "stack");
    if (in.shape != first) {
      throw DimensionError("stack: row shape " + shape_string(in.shape) + " differs from " + shape_string(first));
    }
    out.insert(out.end(), in.data.begin(), in.data.end());
    rec = rec || tracking({&r});
  }
  Tensor m = make_output({rows.size(), width}, std::move(out), rec);
  if (rec) {
    std::vector<ImplPtr> inputs;
    inputs.reserve(rows.size());
    for (const auto& r : rows) inputs.push_back(r.impl());
    Tape::active()->record([inputs = std::move(inputs), mp = m.impl(), width] {
      if (mp->grad.empty()) return;
      for (std::size_t r = 0; r < inputs.size(); ++r) {
        if (auto* g = grad_sink(inputs[r])) {
          for (std::size_t i = 0; i < width; ++i) (*g)[i] += mp->grad[r * width + i];
        }
      }
    });
  }
  return m;
}

Tensor row(const Tensor& table, std::size_t index) {
  const Impl& in = checked(table, "row");
  if (in.shape.size() != 2) throw DimensionError("row: expected a matrix, got " + shape_string(in.shape));
  if (index >= in.shape[0]) {
    throw DimensionError("row: index " + std::to_string(index) + " out of range for " + shape_string(in.shape));
  }
  const std::size_t width = in.shape[1];
  const auto first = in.data.begin() + static_cast<std::ptrdiff_t>(index * width);
  std::vector<double> out(first, first + static_cast<std::ptrdiff_t>(width));
  const bool rec = tracking({&table});
  Tensor r = make_output({width}, std::move(out), rec);
  if (rec) {
    Tape::active()->record([tp = table.impl(), rp = r.impl(), index, width] {
      if (rp->grad.empty()) return;
      auto& g = tp->ensure_grad();
      for (std::size_t i = 0; i < width; ++i) g[index * width + i] += rp->grad[i];
    });
  }
  return r;
}

Tensor select_rows(const Tensor& m, std::span<const std::size_t> indices) {
  const Impl& in = checked(m, "select_rows");
  if (in.shape.size() != 2) throw DimensionError("select_rows: expected a matrix, got " + shape_string(in.shape));
  if (indices.empty()) throw DimensionError("select_rows: no rows selected");
  const std::size_t width = in.shape[1];
  std::vector<double> out;
  out.reserve(indices.size() * width);
  for (auto r : indices) {
    if (r >= in.shape[0]) {
      throw DimensionError("select_rows: row " + std::to_string(r) + " out of range for " + shape_string(in.shape));
    }
    const auto first = in.data.begin() + static_cast<std::ptrdiff_t>(r * width);
    out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(width));
  }
  const bool rec = tracking({&m});
  Tensor s = make_output({indices.size(), width}, std::move(out), rec);
  if (rec) {
    Tape::active()->record([mp = m.impl(), sp = s.impl(), rows = std::vector<std::size_t>(indices.begin(), indices.end()),
                            width] {
      if (sp->grad.empty()) return;
      auto& g = mp->ensure_grad();
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) g[rows[i] * width + j] += sp->grad[i * width + j];
    });
  }
  return s;
}

Tensor add_rowwise(const Tensor& m, const Tensor& bias) {
  const Impl& mi = checked(m, "add_rowwise");
  const Impl& bi = checked(bias, "add_rowwise");
  if (mi.shape.size() != 2 || bi.shape.size() != 1 || mi.shape[1] != bi.shape[0]) {
    throw DimensionError("add_rowwise: incompatible shapes " + shape_string(mi.shape) + " and " +
                         shape_string(bi.shape));
  }
  const std::size_t rows = mi.shape[0], width = mi.shape[1];
  std::vector<double> out(mi.data);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < width; ++j) out[r * width + j] += bi.data[j];
  const bool rec = tracking({&m, &bias});
  Tensor s = make_output(mi.shape, std::move(out), rec);
  if (rec) {
    Tape::active()->record([mp = m.impl(), bp = bias.impl(), sp = s.impl(), rows, width] {
      if (sp->grad.empty()) return;
      if (auto* gm = grad_sink(mp)) {
        for (std::size_t i = 0; i < gm->size(); ++i) (*gm)[i] += sp->grad[i];
      }
      if (auto* gb = grad_sink(bp)) {
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < width; ++j) (*gb)[j] += sp->grad[r * width + j];
      }
    });
  }
  return s;
}

}  // namespace fnd
