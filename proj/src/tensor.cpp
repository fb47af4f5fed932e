#include "tabgraph/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tabgraph/errors.hpp"

namespace tabgraph {

namespace {

bool g_checked = true;

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

[[noreturn]] void shape_error(const std::string& op, const std::vector<std::size_t>& a,
                              const std::vector<std::size_t>& b) {
  throw ShapeError(op + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor

void Tensor::set_checked(bool on) { g_checked = on; }
bool Tensor::checked() { return g_checked; }

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  Tensor t;
  t.s_ = std::make_shared<Storage>();
  t.s_->shape = std::move(shape);
  const std::size_t n = shape_product(t.s_->shape);
  t.s_->values.assign(n, 0.0);
  t.s_->grad.assign(n, 0.0);
  t.s_->requires_grad = requires_grad;
  t.s_->needs_grad = requires_grad;
  return t;
}

Tensor Tensor::from_values(std::vector<std::size_t> shape, std::vector<double> values,
                           bool requires_grad) {
  if (shape_product(shape) != values.size())
    throw ShapeError("from_values: " + shape_str(shape) + " does not hold " +
                     std::to_string(values.size()) + " values");
  if (g_checked) {
    for (double v : values)
      if (!std::isfinite(v)) throw Error("tensor construction: non-finite value");
  }
  Tensor t;
  t.s_ = std::make_shared<Storage>();
  t.s_->shape = std::move(shape);
  t.s_->values = std::move(values);
  t.s_->grad.assign(t.s_->values.size(), 0.0);
  t.s_->requires_grad = requires_grad;
  t.s_->needs_grad = requires_grad;
  return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from_values({1, 1}, {v}, requires_grad);
}

const std::vector<std::size_t>& Tensor::shape() const { return s_->shape; }
std::size_t Tensor::size() const { return s_->values.size(); }

std::size_t Tensor::rows() const {
  return s_->shape.size() == 2 ? s_->shape[0] : (s_->shape.empty() ? 0 : 1);
}

std::size_t Tensor::cols() const {
  if (s_->shape.size() == 2) return s_->shape[1];
  return s_->shape.empty() ? 0 : s_->shape.back();
}

std::vector<double>& Tensor::values() { return s_->values; }
const std::vector<double>& Tensor::values() const { return s_->values; }
std::vector<double>& Tensor::grad() { return s_->grad; }
const std::vector<double>& Tensor::grad() const { return s_->grad; }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item: tensor of shape " + shape_str(shape()) + " is not scalar");
  return s_->values[0];
}

bool Tensor::requires_grad() const { return s_->requires_grad; }
bool Tensor::needs_grad() const { return s_->needs_grad; }

void Tensor::zero_grad() { std::fill(s_->grad.begin(), s_->grad.end(), 0.0); }

// ---------------------------------------------------------------------------
// Tape

Tensor Tape::make_output(std::vector<std::size_t> shape, bool needs_grad) {
  Tensor t = Tensor::zeros(std::move(shape), false);
  t.s_->needs_grad = needs_grad;
  return t;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.cols() != b.rows())
    shape_error("matmul", a.shape(), b.shape());
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = make_output({m, n}, a.needs_grad() || b.needs_grad());
  const double* av = a.values().data();
  const double* bv = b.values().data();
  double* ov = out.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = ov + i * n;
    const double* arow = av + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aik = arow[p];
      if (aik == 0.0) continue;
      const double* brow = bv + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  }
  if (out.needs_grad()) {
    auto as = a.s_, bs = b.s_, os = out.s_;
    record([as, bs, os, m, k, n]() {
      const double* og = os->grad.data();
      // dA = dOut * B^T
      {
        double* ag = as->grad.data();
        const double* bv2 = bs->values.data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double* brow = bv2 + p * n;
            const double* ogrow = og + i * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += ogrow[j] * brow[j];
            ag[i * k + p] += acc;
          }
      }
      // dB = A^T * dOut
      {
        double* bg = bs->grad.data();
        const double* av2 = as->values.data();
        for (std::size_t p = 0; p < k; ++p) {
          double* bgrow = bg + p * n;
          for (std::size_t i = 0; i < m; ++i) {
            const double apk = av2[i * k + p];
            if (apk == 0.0) continue;
            const double* ogrow = og + i * n;
            for (std::size_t j = 0; j < n; ++j) bgrow[j] += apk * ogrow[j];
          }
        }
      }
    });
  }
  return out;
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  const bool broadcast = a.shape() != b.shape();
  if (broadcast) {
    if (!(a.shape().size() == 2 && b.shape().size() == 2 && b.rows() == 1 &&
          b.cols() == a.cols()))
      shape_error("add", a.shape(), b.shape());
  }
  Tensor out = make_output(a.shape(), a.needs_grad() || b.needs_grad());
  const std::size_t n = a.size(), bn = b.size();
  for (std::size_t i = 0; i < n; ++i)
    out.values()[i] = a.values()[i] + b.values()[i % bn];
  if (out.needs_grad()) {
    auto as = a.s_, bs = b.s_, os = out.s_;
    record([as, bs, os, n, bn]() {
      for (std::size_t i = 0; i < n; ++i) {
        as->grad[i] += os->grad[i];
        bs->grad[i % bn] += os->grad[i];
      }
    });
  }
  return out;
}

Tensor Tape::add_n(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw Error("add_n: empty input");
  bool needs = false;
  for (const auto& x : xs) {
    if (x.shape() != xs.front().shape()) shape_error("add_n", xs.front().shape(), x.shape());
    needs = needs || x.needs_grad();
  }
  Tensor out = make_output(xs.front().shape(), needs);
  const std::size_t n = out.size();
  for (const auto& x : xs)
    for (std::size_t i = 0; i < n; ++i) out.values()[i] += x.values()[i];
  if (needs) {
    std::vector<std::shared_ptr<Tensor::Storage>> ins;
    ins.reserve(xs.size());
    for (const auto& x : xs) ins.push_back(x.s_);
    auto os = out.s_;
    record([ins, os, n]() {
      for (const auto& in : ins)
        for (std::size_t i = 0; i < n; ++i) in->grad[i] += os->grad[i];
    });
  }
  return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("mul", a.shape(), b.shape());
  Tensor out = make_output(a.shape(), a.needs_grad() || b.needs_grad());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.values()[i] = a.values()[i] * b.values()[i];
  if (out.needs_grad()) {
    auto as = a.s_, bs = b.s_, os = out.s_;
    record([as, bs, os, n]() {
      for (std::size_t i = 0; i < n; ++i) {
        as->grad[i] += os->grad[i] * bs->values[i];
        bs->grad[i] += os->grad[i] * as->values[i];
      }
    });
  }
  return out;
}

Tensor Tape::scale(const Tensor& x, double c) {
  Tensor out = make_output(x.shape(), x.needs_grad());
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) out.values()[i] = x.values()[i] * c;
  if (out.needs_grad()) {
    auto xs = x.s_, os = out.s_;
    record([xs, os, n, c]() {
      for (std::size_t i = 0; i < n; ++i) xs->grad[i] += os->grad[i] * c;
    });
  }
  return out;
}

Tensor Tape::relu(const Tensor& x) {
  Tensor out = make_output(x.shape(), x.needs_grad());
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) out.values()[i] = x.values()[i] > 0.0 ? x.values()[i] : 0.0;
  if (out.needs_grad()) {
    auto xs = x.s_, os = out.s_;
    record([xs, os, n]() {
      for (std::size_t i = 0; i < n; ++i)
        if (xs->values[i] > 0.0) xs->grad[i] += os->grad[i];
    });
  }
  return out;
}

Tensor Tape::sigmoid(const Tensor& x) {
  Tensor out = make_output(x.shape(), x.needs_grad());
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) out.values()[i] = stable_sigmoid(x.values()[i]);
  if (out.needs_grad()) {
    auto xs = x.s_, os = out.s_;
    record([xs, os, n]() {
      for (std::size_t i = 0; i < n; ++i) {
        const double y = os->values[i];
        xs->grad[i] += os->grad[i] * y * (1.0 - y);
      }
    });
  }
  return out;
}

Tensor Tape::tanh(const Tensor& x) {
  Tensor out = make_output(x.shape(), x.needs_grad());
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) out.values()[i] = std::tanh(x.values()[i]);
  if (out.needs_grad()) {
    auto xs = x.s_, os = out.s_;
    record([xs, os, n]() {
      for (std::size_t i = 0; i < n; ++i) {
        const double y = os->values[i];
        xs->grad[i] += os->grad[i] * (1.0 - y * y);
      }
    });
  }
  return out;
}

Tensor Tape::sum(const Tensor& x) {
  Tensor out = make_output({1, 1}, x.needs_grad());
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  out.values()[0] = acc;
  if (out.needs_grad()) {
    auto xs = x.s_, os = out.s_;
    record([xs, os]() {
      for (double& g : xs->grad) g += os->grad[0];
    });
  }
  return out;
}

Tensor Tape::concat_cols(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw Error("concat_cols: empty input");
  const std::size_t m = xs.front().rows();
  std::size_t total = 0;
  bool needs = false;
  for (const auto& x : xs) {
    if (x.shape().size() != 2 || x.rows() != m)
      shape_error("concat_cols", xs.front().shape(), x.shape());
    total += x.cols();
    needs = needs || x.needs_grad();
  }
  Tensor out = make_output({m, total}, needs);
  std::size_t col0 = 0;
  for (const auto& x : xs) {
    const std::size_t c = x.cols();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(x.values().data() + i * c, c, out.values().data() + i * total + col0);
    col0 += c;
  }
  if (needs) {
    std::vector<std::shared_ptr<Tensor::Storage>> ins;
    for (const auto& x : xs) ins.push_back(x.s_);
    auto os = out.s_;
    record([ins, os, m, total]() {
      std::size_t c0 = 0;
      for (const auto& in : ins) {
        const std::size_t c = in->shape[1];
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < c; ++j)
            in->grad[i * c + j] += os->grad[i * total + c0 + j];
        c0 += c;
      }
    });
  }
  return out;
}

Tensor Tape::stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw Error("stack_rows: empty input");
  const std::size_t d = rows.front().cols();
  bool needs = false;
  for (const auto& r : rows) {
    if (r.shape().size() != 2 || r.rows() != 1 || r.cols() != d)
      shape_error("stack_rows", rows.front().shape(), r.shape());
    needs = needs || r.needs_grad();
  }
  Tensor out = make_output({rows.size(), d}, needs);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy_n(rows[i].values().data(), d, out.values().data() + i * d);
  if (needs) {
    std::vector<std::shared_ptr<Tensor::Storage>> ins;
    for (const auto& r : rows) ins.push_back(r.s_);
    auto os = out.s_;
    record([ins, os, d]() {
      for (std::size_t i = 0; i < ins.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) ins[i]->grad[j] += os->grad[i * d + j];
    });
  }
  return out;
}

Tensor Tape::select_row(const Tensor& x, std::size_t row) {
  if (x.shape().size() != 2 || row >= x.rows())
    throw ShapeError("select_row: row " + std::to_string(row) + " out of bounds for " +
                     std::to_string(x.rows()) + " rows");
  const std::size_t d = x.cols();
  Tensor out = make_output({1, d}, x.needs_grad());
  std::copy_n(x.values().data() + row * d, d, out.values().data());
  if (out.needs_grad()) {
    auto xs = x.s_, os = out.s_;
    record([xs, os, row, d]() {
      for (std::size_t j = 0; j < d; ++j) xs->grad[row * d + j] += os->grad[j];
    });
  }
  return out;
}

Tensor Tape::mean_pool_rows(const Tensor& x) {
  std::vector<std::size_t> all(x.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return mean_pool_rows_subset(x, all);
}

Tensor Tape::mean_pool_rows_subset(const Tensor& x, const std::vector<std::size_t>& rows) {
  if (x.shape().size() != 2) throw ShapeError("mean_pool_rows: tensor is not 2-D");
  if (rows.empty()) throw Error("mean_pool_rows: empty row set");
  const std::size_t d = x.cols();
  Tensor out = make_output({1, d}, x.needs_grad());
  for (std::size_t r : rows) {
    if (r >= x.rows()) throw ShapeError("mean_pool_rows: row index out of bounds");
    for (std::size_t j = 0; j < d; ++j) out.values()[j] += x.values()[r * d + j];
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t j = 0; j < d; ++j) out.values()[j] *= inv;
  if (out.needs_grad()) {
    auto xs = x.s_, os = out.s_;
    auto rows_copy = rows;
    record([xs, os, rows_copy, d, inv]() {
      for (std::size_t r : rows_copy)
        for (std::size_t j = 0; j < d; ++j) xs->grad[r * d + j] += os->grad[j] * inv;
    });
  }
  return out;
}

Tensor Tape::dropout(const Tensor& x, double p, bool train_mode, Rng& rng) {
  if (p < 0.0 || p >= 1.0) {
    if (p != 0.0) throw Error("dropout: rate must be in [0, 1)");
  }
  if (!train_mode || p == 0.0) return x;  // identity, nothing recorded
  const std::size_t n = x.size();
  std::vector<double> mask(n);
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < n; ++i)
    mask[i] = rng.uniform() >= p ? keep_scale : 0.0;
  Tensor out = make_output(x.shape(), x.needs_grad());
  for (std::size_t i = 0; i < n; ++i) out.values()[i] = x.values()[i] * mask[i];
  if (out.needs_grad()) {
    auto xs = x.s_, os = out.s_;
    record([xs, os, mask = std::move(mask), n]() {
      for (std::size_t i = 0; i < n; ++i) xs->grad[i] += os->grad[i] * mask[i];
    });
  }
  return out;
}

Tensor Tape::embedding_rows(const Tensor& table, const std::vector<int>& ids) {
  if (table.shape().size() != 2) throw ShapeError("embedding_rows: table is not 2-D");
  const std::size_t v = table.rows(), d = table.cols();
  for (int id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= v)
      throw Error("embedding_rows: id " + std::to_string(id) + " out of range for V=" +
                  std::to_string(v));
  Tensor out = make_output({ids.size(), d}, table.needs_grad());
  for (std::size_t t = 0; t < ids.size(); ++t)
    std::copy_n(table.values().data() + static_cast<std::size_t>(ids[t]) * d, d,
                out.values().data() + t * d);
  if (out.needs_grad()) {
    auto ts = table.s_, os = out.s_;
    auto ids_copy = ids;
    record([ts, os, ids_copy, d]() {
      for (std::size_t t = 0; t < ids_copy.size(); ++t)
        for (std::size_t j = 0; j < d; ++j)
          ts->grad[static_cast<std::size_t>(ids_copy[t]) * d + j] += os->grad[t * d + j];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// fused BiLSTM

namespace {

// caches for one direction, in processing order s = 0..T-1
struct LstmTrace {
  std::vector<double> gates;   // T x 4H, post-activation [i f g o]
  std::vector<double> cell;    // T x H
  std::vector<double> tanh_c;  // T x H
  std::vector<double> hidden;  // T x H
};

void lstm_direction_forward(const double* x, std::size_t t_len, std::size_t d_in,
                            std::size_t h_dim, const double* wx, const double* wh,
                            const double* b, bool reverse, LstmTrace& trace) {
  const std::size_t g4 = 4 * h_dim;
  trace.gates.assign(t_len * g4, 0.0);
  trace.cell.assign(t_len * h_dim, 0.0);
  trace.tanh_c.assign(t_len * h_dim, 0.0);
  trace.hidden.assign(t_len * h_dim, 0.0);
  std::vector<double> z(g4);
  for (std::size_t s = 0; s < t_len; ++s) {
    const std::size_t pos = reverse ? t_len - 1 - s : s;
    const double* x_row = x + pos * d_in;
    const double* h_prev = s == 0 ? nullptr : trace.hidden.data() + (s - 1) * h_dim;
    const double* c_prev = s == 0 ? nullptr : trace.cell.data() + (s - 1) * h_dim;
    std::copy_n(b, g4, z.data());
    for (std::size_t p = 0; p < d_in; ++p) {
      const double xv = x_row[p];
      if (xv == 0.0) continue;
      const double* wrow = wx + p * g4;
      for (std::size_t j = 0; j < g4; ++j) z[j] += xv * wrow[j];
    }
    if (h_prev) {
      for (std::size_t p = 0; p < h_dim; ++p) {
        const double hv = h_prev[p];
        if (hv == 0.0) continue;
        const double* wrow = wh + p * g4;
        for (std::size_t j = 0; j < g4; ++j) z[j] += hv * wrow[j];
      }
    }
    double* gate = trace.gates.data() + s * g4;
    double* cell = trace.cell.data() + s * h_dim;
    double* tc = trace.tanh_c.data() + s * h_dim;
    double* hid = trace.hidden.data() + s * h_dim;
    for (std::size_t j = 0; j < h_dim; ++j) {
      const double gi = stable_sigmoid(z[j]);
      const double gf = stable_sigmoid(z[h_dim + j]);
      const double gg = std::tanh(z[2 * h_dim + j]);
      const double go = stable_sigmoid(z[3 * h_dim + j]);
      gate[j] = gi;
      gate[h_dim + j] = gf;
      gate[2 * h_dim + j] = gg;
      gate[3 * h_dim + j] = go;
      const double c = (c_prev ? gf * c_prev[j] : 0.0) + gi * gg;
      cell[j] = c;
      tc[j] = std::tanh(c);
      hid[j] = go * tc[j];
    }
  }
}

// d_out is T x H in position order for this direction's half of the output.
void lstm_direction_backward(const double* x, std::size_t t_len, std::size_t d_in,
                             std::size_t h_dim, const double* wx, const double* wh,
                             bool reverse, const LstmTrace& trace, const double* d_out,
                             std::size_t d_out_stride, double* d_x, double* d_wx,
                             double* d_wh, double* d_b) {
  const std::size_t g4 = 4 * h_dim;
  std::vector<double> dh(h_dim, 0.0);   // gradient flowing into h at current step
  std::vector<double> dc(h_dim, 0.0);   // carried cell gradient
  std::vector<double> dz(g4);
  for (std::size_t s_plus = t_len; s_plus > 0; --s_plus) {
    const std::size_t s = s_plus - 1;
    const std::size_t pos = reverse ? t_len - 1 - s : s;
    const double* gate = trace.gates.data() + s * g4;
    const double* tc = trace.tanh_c.data() + s * h_dim;
    const double* c_prev = s == 0 ? nullptr : trace.cell.data() + (s - 1) * h_dim;
    const double* h_prev = s == 0 ? nullptr : trace.hidden.data() + (s - 1) * h_dim;
    for (std::size_t j = 0; j < h_dim; ++j) dh[j] += d_out[pos * d_out_stride + j];
    for (std::size_t j = 0; j < h_dim; ++j) {
      const double gi = gate[j];
      const double gf = gate[h_dim + j];
      const double gg = gate[2 * h_dim + j];
      const double go = gate[3 * h_dim + j];
      const double d_o = dh[j] * tc[j];
      double d_c = dc[j] + dh[j] * go * (1.0 - tc[j] * tc[j]);
      const double d_i = d_c * gg;
      const double d_g = d_c * gi;
      const double d_f = c_prev ? d_c * c_prev[j] : 0.0;
      dz[j] = d_i * gi * (1.0 - gi);
      dz[h_dim + j] = d_f * gf * (1.0 - gf);
      dz[2 * h_dim + j] = d_g * (1.0 - gg * gg);
      dz[3 * h_dim + j] = d_o * go * (1.0 - go);
      dc[j] = d_c * gf;  // carried to the previous step
    }
    const double* x_row = x + pos * d_in;
    for (std::size_t p = 0; p < d_in; ++p) {
      const double xv = x_row[p];
      double* dwx_row = d_wx + p * g4;
      const double* wx_row = wx + p * g4;
      double acc = 0.0;
      for (std::size_t j = 0; j < g4; ++j) {
        dwx_row[j] += xv * dz[j];
        acc += wx_row[j] * dz[j];
      }
      d_x[pos * d_in + p] += acc;
    }
    std::fill(dh.begin(), dh.end(), 0.0);
    if (h_prev) {
      for (std::size_t p = 0; p < h_dim; ++p) {
        const double hv = h_prev[p];
        double* dwh_row = d_wh + p * g4;
        const double* wh_row = wh + p * g4;
        double acc = 0.0;
        for (std::size_t j = 0; j < g4; ++j) {
          dwh_row[j] += hv * dz[j];
          acc += wh_row[j] * dz[j];
        }
        dh[p] = acc;
      }
    }
    for (std::size_t j = 0; j < g4; ++j) d_b[j] += dz[j];
  }
}

}  // namespace

Tensor Tape::bilstm(const Tensor& x, const Tensor& fwd_wx, const Tensor& fwd_wh,
                    const Tensor& fwd_b, const Tensor& bwd_wx, const Tensor& bwd_wh,
                    const Tensor& bwd_b) {
  if (x.shape().size() != 2) throw ShapeError("bilstm: input is not 2-D");
  const std::size_t t_len = x.rows(), d_in = x.cols();
  const std::size_t h_dim = fwd_wh.rows();
  auto check = [&](const Tensor& w, std::size_t r, std::size_t c, const char* name) {
    if (w.shape().size() != 2 || w.rows() != r || w.cols() != c)
      throw ShapeError(std::string("bilstm: bad shape for ") + name);
  };
  check(fwd_wx, d_in, 4 * h_dim, "fwd_wx");
  check(fwd_wh, h_dim, 4 * h_dim, "fwd_wh");
  check(fwd_b, 1, 4 * h_dim, "fwd_b");
  check(bwd_wx, d_in, 4 * h_dim, "bwd_wx");
  check(bwd_wh, h_dim, 4 * h_dim, "bwd_wh");
  check(bwd_b, 1, 4 * h_dim, "bwd_b");

  auto fwd_trace = std::make_shared<LstmTrace>();
  auto bwd_trace = std::make_shared<LstmTrace>();
  lstm_direction_forward(x.values().data(), t_len, d_in, h_dim, fwd_wx.values().data(),
                         fwd_wh.values().data(), fwd_b.values().data(), false, *fwd_trace);
  lstm_direction_forward(x.values().data(), t_len, d_in, h_dim, bwd_wx.values().data(),
                         bwd_wh.values().data(), bwd_b.values().data(), true, *bwd_trace);

  const bool needs = x.needs_grad() || fwd_wx.needs_grad() || fwd_wh.needs_grad() ||
                     fwd_b.needs_grad() || bwd_wx.needs_grad() || bwd_wh.needs_grad() ||
                     bwd_b.needs_grad();
  Tensor out = make_output({t_len, 2 * h_dim}, needs);
  for (std::size_t s = 0; s < t_len; ++s) {
    std::copy_n(fwd_trace->hidden.data() + s * h_dim, h_dim,
                out.values().data() + s * 2 * h_dim);
    const std::size_t pos = t_len - 1 - s;  // bwd processing step s sits at pos
    std::copy_n(bwd_trace->hidden.data() + s * h_dim, h_dim,
                out.values().data() + pos * 2 * h_dim + h_dim);
  }

  if (needs) {
    auto xs = x.s_;
    auto fwx = fwd_wx.s_, fwh = fwd_wh.s_, fb = fwd_b.s_;
    auto bwx = bwd_wx.s_, bwh = bwd_wh.s_, bb = bwd_b.s_;
    auto os = out.s_;
    record([xs, fwx, fwh, fb, bwx, bwh, bb, os, fwd_trace, bwd_trace, t_len, d_in,
            h_dim]() {
      // forward direction reads output columns [0, H)
      lstm_direction_backward(xs->values.data(), t_len, d_in, h_dim, fwx->values.data(),
                              fwh->values.data(), false, *fwd_trace, os->grad.data(),
                              2 * h_dim, xs->grad.data(), fwx->grad.data(),
                              fwh->grad.data(), fb->grad.data());
      // backward direction reads output columns [H, 2H)
      lstm_direction_backward(xs->values.data(), t_len, d_in, h_dim, bwx->values.data(),
                              bwh->values.data(), true, *bwd_trace,
                              os->grad.data() + h_dim, 2 * h_dim, xs->grad.data(),
                              bwx->grad.data(), bwh->grad.data(), bb->grad.data());
    });
  }
  return out;
}

Tensor Tape::softmax_cross_entropy(const Tensor& logits, std::size_t target) {
  if (logits.shape().size() != 2 || logits.rows() != 1)
    throw ShapeError("softmax_cross_entropy: logits must be 1 x V");
  const std::size_t v = logits.cols();
  if (target >= v) throw Error("softmax_cross_entropy: target out of range");
  double mx = logits.values()[0];
  for (double q : logits.values()) mx = std::max(mx, q);
  double sum = 0.0;
  for (double q : logits.values()) sum += std::exp(q - mx);
  const double lse = mx + std::log(sum);
  Tensor out = make_output({1, 1}, logits.needs_grad());
  out.values()[0] = lse - logits.values()[target];
  if (out.needs_grad()) {
    auto ls = logits.s_, os = out.s_;
    record([ls, os, target, v, mx, sum]() {
      const double g = os->grad[0];
      for (std::size_t j = 0; j < v; ++j) {
        const double p = std::exp(ls->values[j] - mx) / sum;
        ls->grad[j] += g * (p - (j == target ? 1.0 : 0.0));
      }
    });
  }
  return out;
}

Tensor Tape::binary_cross_entropy(const Tensor& score, int label) {
  if (score.size() != 1) throw ShapeError("binary_cross_entropy: score must be scalar");
  if (label != 0 && label != 1) throw Error("binary_cross_entropy: label must be 0 or 1");
  constexpr double kEps = 1e-12;
  const double y_raw = score.values()[0];
  const double y = std::min(std::max(y_raw, kEps), 1.0 - kEps);
  Tensor out = make_output({1, 1}, score.needs_grad());
  out.values()[0] = label == 1 ? -std::log(y) : -std::log(1.0 - y);
  if (out.needs_grad()) {
    auto ss = score.s_, os = out.s_;
    const bool clamped = y_raw < kEps || y_raw > 1.0 - kEps;
    record([ss, os, label, y, clamped]() {
      if (clamped) return;
      const double g = os->grad[0];
      ss->grad[0] += g * (label == 1 ? -1.0 / y : 1.0 / (1.0 - y));
    });
  }
  return out;
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw ShapeError("backward: loss must be a scalar tensor");
  loss.s_->grad[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

// ---------------------------------------------------------------------------
// finite differences

double finite_difference_check(const std::function<Tensor(Tape&)>& f,
                               const std::vector<Tensor>& wrt, double h) {
  // analytic pass
  std::vector<std::vector<double>> analytic;
  {
    for (const auto& t : wrt) const_cast<Tensor&>(t).zero_grad();
    Tape tape;
    Tensor loss = f(tape);
    tape.backward(loss);
    for (const auto& t : wrt) analytic.push_back(t.grad());
  }
  double max_err = 0.0;
  for (std::size_t ti = 0; ti < wrt.size(); ++ti) {
    Tensor t = wrt[ti];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t.values()[i];
      t.values()[i] = saved + h;
      double f_plus;
      {
        Tape tape;
        f_plus = f(tape).item();
      }
      t.values()[i] = saved - h;
      double f_minus;
      {
        Tape tape;
        f_minus = f(tape).item();
      }
      t.values()[i] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double a = analytic[ti][i];
      const double err = std::abs(a - numeric) /
                         std::max({1.0, std::abs(a), std::abs(numeric)});
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

double finite_difference_check(const std::function<Tensor(Tape&, const Tensor&)>& f,
                               const Tensor& x, double h) {
  return finite_difference_check([&](Tape& tape) { return f(tape, x); }, {x}, h);
}

// ---------------------------------------------------------------------------
// checkpoints

namespace {

constexpr char kMagic[8] = {'T', 'G', 'C', 'K', '0', '0', '0', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) throw CheckpointError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_double(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  write_u64(os, bits);
}

double read_double(std::istream& is) {
  const std::uint64_t bits = read_u64(is);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor>>& named) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot open " + path + " for writing");
  os.write(kMagic, 8);
  write_u64(os, named.size());
  for (const auto& [name, tensor] : named) {
    write_u64(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(os, tensor.shape().size());
    for (std::size_t d : tensor.shape()) write_u64(os, d);
    for (double v : tensor.values()) write_double(os, v);
  }
  if (!os) throw CheckpointError("write failed for " + path);
}

std::map<std::string, Tensor> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw CheckpointError(path + " is not a checkpoint file");
  const std::uint64_t count = read_u64(is);
  std::map<std::string, Tensor> out;
  const bool was_checked = Tensor::checked();
  Tensor::set_checked(false);  // stored values round-trip verbatim
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t name_len = read_u64(is);
    std::string name(name_len, '\0');
    is.read(name.data(), static_cast<std::streamsize>(name_len));
    const std::uint64_t ndim = read_u64(is);
    std::vector<std::size_t> shape(ndim);
    std::size_t total = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(read_u64(is));
      total *= d;
    }
    std::vector<double> values(total);
    for (auto& v : values) v = read_double(is);
    out.emplace(name, Tensor::from_values(std::move(shape), std::move(values)));
  }
  Tensor::set_checked(was_checked);
  return out;
}

}  // namespace tabgraph
