#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tabgraph/rng.hpp"

namespace tabgraph {

// Dense double-precision tensor. A Tensor is a cheap handle onto shared
// storage; ops on a Tape produce new tensors and record how to push
// gradients back to their inputs. Gradients accumulate into `grad` until
// zero_grad() is called, so one parameter set can serve many tapes (one
// tape per example, gradients summed across a mini-batch).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor from_values(std::vector<std::size_t> shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  // When true (default), from_values rejects NaN/Inf payloads.
  static void set_checked(bool on);
  static bool checked();

  bool defined() const { return s_ != nullptr; }
  const std::vector<std::size_t>& shape() const;
  std::size_t size() const;
  std::size_t rows() const;  // 2-D convenience
  std::size_t cols() const;

  std::vector<double>& values();
  const std::vector<double>& values() const;
  std::vector<double>& grad();
  const std::vector<double>& grad() const;

  double value_at(std::size_t i) const { return values()[i]; }
  double at(std::size_t r, std::size_t c) const { return values()[r * cols() + c]; }
  double item() const;  // scalar value; throws unless size() == 1

  bool requires_grad() const;
  bool needs_grad() const;
  void zero_grad();

  // identity of the underlying storage
  bool same_storage(const Tensor& o) const { return s_ == o.s_; }

 private:
  friend class Tape;
  struct Storage {
    std::vector<std::size_t> shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
    bool needs_grad = false;
  };
  std::shared_ptr<Storage> s_;
};

// Reverse-mode tape. Recording order is a topological order of the compute
// graph, so backward() replays the op list once, in reverse.
class Tape {
 public:
  // out[i][j] = sum_k a[i][k] * b[k][j]
  Tensor matmul(const Tensor& a, const Tensor& b);

  // elementwise; b may also be a 1 x n row vector broadcast over a's rows
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor add_n(const std::vector<Tensor>& xs);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& x, double c);

  Tensor relu(const Tensor& x);
  Tensor sigmoid(const Tensor& x);
  Tensor tanh(const Tensor& x);

  Tensor sum(const Tensor& x);                              // -> 1x1
  Tensor concat_cols(const std::vector<Tensor>& xs);        // same rows
  Tensor stack_rows(const std::vector<Tensor>& rows);       // 1xd each -> Kxd
  Tensor select_row(const Tensor& x, std::size_t row);      // -> 1xd
  Tensor mean_pool_rows(const Tensor& x);                   // Kxd -> 1xd
  Tensor mean_pool_rows_subset(const Tensor& x, const std::vector<std::size_t>& rows);

  // Inverted dropout: keeps activations with probability 1-p and scales by
  // 1/(1-p) in training mode; identity in eval mode or at p = 0.
  Tensor dropout(const Tensor& x, double p, bool train_mode, Rng& rng);

  // gather rows of an embedding table; backward scatter-adds
  Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids);

  // Fused bidirectional LSTM over the rows of x (T x d_in). Weights are
  // w_x: d_in x 4H, w_h: H x 4H, b: 1 x 4H with gate order [i f g o].
  // Output row t is [forward h_t ; backward h_t], shape T x 2H.
  Tensor bilstm(const Tensor& x, const Tensor& fwd_wx, const Tensor& fwd_wh,
                const Tensor& fwd_b, const Tensor& bwd_wx, const Tensor& bwd_wh,
                const Tensor& bwd_b);

  // -log softmax(logits)[target]; logits is 1 x V
  Tensor softmax_cross_entropy(const Tensor& logits, std::size_t target);

  // -[label ln y + (1-label) ln(1-y)] with y clamped away from {0,1}
  Tensor binary_cross_entropy(const Tensor& score, int label);

  // Accumulate d loss / d x into every tensor reachable from loss.
  void backward(const Tensor& loss);

  std::size_t num_ops() const { return ops_.size(); }

 private:
  Tensor make_output(std::vector<std::size_t> shape, bool needs_grad);
  void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }

  std::vector<std::function<void()>> ops_;
};

// Max relative error between analytic gradients and central finite
// differences, taken over every coordinate of every tensor in `wrt`.
// f must be deterministic (eval-mode dropout).
double finite_difference_check(const std::function<Tensor(Tape&)>& f,
                               const std::vector<Tensor>& wrt, double h = 1e-6);

// single-input convenience matching f: tensor -> scalar
double finite_difference_check(const std::function<Tensor(Tape&, const Tensor&)>& f,
                               const Tensor& x, double h = 1e-6);

// Named-tensor checkpoint container: shape headers plus little-endian
// doubles; round-trips bit-exactly.
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor>>& named);
std::map<std::string, Tensor> load_checkpoint(const std::string& path);

}  // namespace tabgraph
