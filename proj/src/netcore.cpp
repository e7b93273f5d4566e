#include "kennel/netcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "kennel/error.hpp"
#include "kennel/textio.hpp"

namespace kennel::net {

namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require(bool ok, const std::string& what) {
  if (!ok) fail(errc::kShapeMismatch, what);
}

}  // namespace

// ---------------------------------------------------------------------------
// ParamStore

ParamId ParamStore::add(const std::string& name, int rows, int cols, int fan_in) {
  const ParamId id = add_zero(name, rows, cols);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix& v = params_.back().value;
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng_.uniform(-bound, bound);
  return id;
}

ParamId ParamStore::add_zero(const std::string& name, int rows, int cols) {
  if (find(name).index >= 0) fail(errc::kConfig, "duplicate parameter name " + name);
  if (rows <= 0 || cols <= 0) fail(errc::kShapeMismatch, "parameter " + name + " needs positive dims");
  params_.push_back({name, Matrix::Zero(rows, cols), Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)});
  return {static_cast<int>(params_.size()) - 1};
}

ParamId ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return {static_cast<int>(i)};
  }
  return {};
}

std::size_t ParamStore::value_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

void ParamStore::zero_values() {
  for (auto& p : params_) p.value.setZero();
}

std::vector<double> ParamStore::flat_values() const {
  std::vector<double> out;
  out.reserve(value_count());
  for (const auto& p : params_) out.insert(out.end(), p.value.data(), p.value.data() + p.value.size());
  return out;
}

void ParamStore::set_flat_values(std::span<const double> values) {
  if (values.size() != value_count()) {
    fail(errc::kDimMismatch, "expected " + std::to_string(value_count()) + " parameter values, got " +
                                 std::to_string(values.size()));
  }
  std::size_t at = 0;
  for (auto& p : params_) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(at), p.value.size(), p.value.data());
    at += static_cast<std::size_t>(p.value.size());
  }
}

// ---------------------------------------------------------------------------
// Graph

Var Graph::push(Matrix value, bool needs_grad, std::function<void(Graph&)> back) {
  nodes_.push_back({std::move(value), Matrix(), needs_grad, std::move(back)});
  return {static_cast<int>(nodes_.size()) - 1};
}

Matrix& Graph::grad_of(Var v) {
  Node& n = node(v);
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Graph::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Graph::param(ParamId id) {
  if (params_ == nullptr) fail(errc::kConfig, "graph has no parameter store");
  const Parameter& p = (*params_)[id];
  const int self = static_cast<int>(nodes_.size());
  return push(p.value, true, [id, self](Graph& g) {
    if (g.writable_ == nullptr) fail(errc::kConfig, "backward through a read-only parameter store");
    (*g.writable_)[id].grad += g.nodes_[self].grad;
  });
}

Var Graph::matmul_t(Var x, Var w) {
  const Matrix& xv = value(x);
  const Matrix& wv = value(w);
  require(xv.cols() == wv.cols(), "matmul_t: " + shape(xv) + " vs " + shape(wv));
  const int self = static_cast<int>(nodes_.size());
  return push(xv * wv.transpose(), needs(x) || needs(w), [x, w, self](Graph& g) {
    const Matrix& dy = g.nodes_[self].grad;
    if (g.needs(x)) g.grad_of(x).noalias() += dy * g.value(w);
    if (g.needs(w)) g.grad_of(w).noalias() += dy.transpose() * g.value(x);
  });
}

Var Graph::add_row(Var y, Var b) {
  const Matrix& yv = value(y);
  const Matrix& bv = value(b);
  require(bv.rows() == 1 && bv.cols() == yv.cols(), "add_row: " + shape(yv) + " vs " + shape(bv));
  const int self = static_cast<int>(nodes_.size());
  Matrix out = yv.rowwise() + bv.row(0);
  return push(std::move(out), needs(y) || needs(b), [y, b, self](Graph& g) {
    const Matrix& dy = g.nodes_[self].grad;
    if (g.needs(y)) g.grad_of(y) += dy;
    if (g.needs(b)) g.grad_of(b) += dy.colwise().sum();
  });
}

Var Graph::add(Var a, Var b) {
  require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(),
          "add: " + shape(value(a)) + " vs " + shape(value(b)));
  const int self = static_cast<int>(nodes_.size());
  return push(value(a) + value(b), needs(a) || needs(b), [a, b, self](Graph& g) {
    const Matrix& dy = g.nodes_[self].grad;
    if (g.needs(a)) g.grad_of(a) += dy;
    if (g.needs(b)) g.grad_of(b) += dy;
  });
}

Var Graph::mul(Var a, Var b) {
  require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(),
          "mul: " + shape(value(a)) + " vs " + shape(value(b)));
  const int self = static_cast<int>(nodes_.size());
  return push(value(a).cwiseProduct(value(b)), needs(a) || needs(b), [a, b, self](Graph& g) {
    const Matrix& dy = g.nodes_[self].grad;
    if (g.needs(a)) g.grad_of(a) += dy.cwiseProduct(g.value(b));
    if (g.needs(b)) g.grad_of(b) += dy.cwiseProduct(g.value(a));
  });
}

Var Graph::scale(Var a, double s) {
  const int self = static_cast<int>(nodes_.size());
  return push(value(a) * s, needs(a), [a, s, self](Graph& g) { g.grad_of(a) += g.nodes_[self].grad * s; });
}

Var Graph::sigmoid(Var a) {
  const int self = static_cast<int>(nodes_.size());
  Matrix out = value(a).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return push(std::move(out), needs(a), [a, self](Graph& g) {
    const Matrix& y = g.nodes_[self].value;
    g.grad_of(a).array() += g.nodes_[self].grad.array() * y.array() * (1.0 - y.array());
  });
}

Var Graph::tanh(Var a) {
  const int self = static_cast<int>(nodes_.size());
  Matrix out = value(a).array().tanh().matrix();
  return push(std::move(out), needs(a), [a, self](Graph& g) {
    const Matrix& y = g.nodes_[self].value;
    g.grad_of(a).array() += g.nodes_[self].grad.array() * (1.0 - y.array().square());
  });
}

Var Graph::slice_cols(Var a, int start, int count) {
  require(start >= 0 && count > 0 && start + count <= value(a).cols(), "slice_cols out of range");
  const int self = static_cast<int>(nodes_.size());
  Matrix out = value(a).middleCols(start, count);
  return push(std::move(out), needs(a), [a, start, count, self](Graph& g) {
    g.grad_of(a).middleCols(start, count) += g.nodes_[self].grad;
  });
}

Var Graph::concat_cols(Var a, Var b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  require(av.rows() == bv.rows(), "concat_cols: " + shape(av) + " vs " + shape(bv));
  Matrix out(av.rows(), av.cols() + bv.cols());
  out << av, bv;
  const auto split = av.cols();
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a) || needs(b), [a, b, split, self](Graph& g) {
    const Matrix& dy = g.nodes_[self].grad;
    if (g.needs(a)) g.grad_of(a) += dy.leftCols(split);
    if (g.needs(b)) g.grad_of(b) += dy.rightCols(dy.cols() - split);
  });
}

namespace {

void softmax_rows_inplace(Matrix& m, int groups) {
  const auto k = m.cols() / groups;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (int j = 0; j < groups; ++j) {
      auto block = m.row(r).segment(j * k, k);
      block.array() -= block.maxCoeff();
      block = block.array().exp().matrix();
      block /= block.sum();
    }
  }
}

}  // namespace

Var Graph::softmax_groups(Var logits, int groups) {
  const Matrix& lv = value(logits);
  require(groups > 0 && lv.cols() % groups == 0, "softmax_groups: width not divisible");
  Matrix out = lv;
  softmax_rows_inplace(out, groups);
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(logits), [logits, groups, self](Graph& g) {
    const Matrix& p = g.nodes_[self].value;
    const Matrix& dy = g.nodes_[self].grad;
    Matrix& dx = g.grad_of(logits);
    const auto k = p.cols() / groups;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      for (int j = 0; j < groups; ++j) {
        const auto pj = p.row(r).segment(j * k, k);
        const auto dj = dy.row(r).segment(j * k, k);
        const double inner = pj.dot(dj);
        dx.row(r).segment(j * k, k).array() += pj.array() * (dj.array() - inner);
      }
    }
  });
}

Var Graph::weighted_nll(Var logits, int groups, std::vector<int> labels, std::vector<double> weights) {
  const Matrix& lv = value(logits);
  require(groups > 0 && lv.cols() % groups == 0, "weighted_nll: width not divisible");
  const auto n = static_cast<std::size_t>(lv.rows() * groups);
  require(labels.size() == n && weights.size() == n, "weighted_nll: label count mismatch");
  const auto k = lv.cols() / groups;
  Matrix probs = lv;
  softmax_rows_inplace(probs, groups);
  double total = 0.0;
  for (Eigen::Index r = 0; r < lv.rows(); ++r) {
    for (int j = 0; j < groups; ++j) {
      const auto idx = static_cast<std::size_t>(r * groups + j);
      const int c = labels[idx];
      if (c < 0 || c >= k) fail(errc::kIndexOutOfRange, "label " + std::to_string(c) + " outside [0, K)");
      // log-sum-exp form keeps very confident logits finite.
      const auto block = lv.row(r).segment(j * k, k);
      const double m = block.maxCoeff();
      const double lse = m + std::log((block.array() - m).exp().sum());
      total += weights[idx] * (lse - block(c));
    }
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(logits),
              [logits, groups, k, self, probs = std::move(probs), labels = std::move(labels),
               weights = std::move(weights)](Graph& g) {
                const double up = g.nodes_[self].grad(0, 0);
                Matrix& dx = g.grad_of(logits);
                for (Eigen::Index r = 0; r < probs.rows(); ++r) {
                  for (int j = 0; j < groups; ++j) {
                    const auto idx = static_cast<std::size_t>(r * groups + j);
                    const double w = up * weights[idx];
                    dx.row(r).segment(j * k, k) += w * probs.row(r).segment(j * k, k);
                    dx(r, j * k + labels[idx]) -= w;
                  }
                }
              });
}

Var Graph::sum(std::span<const Var> terms) {
  require(!terms.empty(), "sum of no terms");
  Matrix out = value(terms[0]);
  bool any = needs(terms[0]);
  for (std::size_t i = 1; i < terms.size(); ++i) {
    require(value(terms[i]).rows() == out.rows() && value(terms[i]).cols() == out.cols(), "sum: shape mismatch");
    out += value(terms[i]);
    any = any || needs(terms[i]);
  }
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), any, [ts = std::vector<Var>(terms.begin(), terms.end()), self](Graph& g) {
    for (Var t : ts) {
      if (g.needs(t)) g.grad_of(t) += g.nodes_[self].grad;
    }
  });
}

void Graph::backward(Var out) {
  require(value(out).size() == 1, "backward needs a scalar output");
  grad_of(out)(0, 0) += 1.0;
  for (int i = out.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.needs_grad || n.grad.size() == 0 || !n.back) continue;
    n.back(*this);
  }
}

// ---------------------------------------------------------------------------
// Layers

Eigen::VectorXd linear(const Eigen::VectorXd& x, const Matrix& w, const Eigen::VectorXd& b) {
  require(w.cols() == x.size() && w.rows() == b.size(),
          "linear: W " + shape(w) + ", x " + std::to_string(x.size()) + ", b " + std::to_string(b.size()));
  return w * x + b;
}

LstmCell::LstmCell(ParamStore& store, const std::string& prefix, int input, int hidden)
    : input_(input), hidden_(hidden) {
  w_ = store.add(prefix + ".W", 4 * hidden, input, input);
  u_ = store.add(prefix + ".U", 4 * hidden, hidden, hidden);
  b_ = store.add(prefix + ".b", 1, 4 * hidden, hidden);
}

std::pair<Var, Var> LstmCell::step(Graph& g, Var x, Var h, Var c) const {
  const Var pre = g.add_row(g.add(g.matmul_t(x, g.param(w_)), g.matmul_t(h, g.param(u_))), g.param(b_));
  const int n = hidden_;
  const Var i = g.sigmoid(g.slice_cols(pre, 0, n));
  const Var f = g.sigmoid(g.slice_cols(pre, n, n));
  const Var cand = g.tanh(g.slice_cols(pre, 2 * n, n));
  const Var o = g.sigmoid(g.slice_cols(pre, 3 * n, n));
  const Var c2 = g.add(g.mul(f, c), g.mul(i, cand));
  const Var h2 = g.mul(o, g.tanh(c2));
  return {h2, c2};
}

RecurrentState recurrent_step(const Eigen::VectorXd& x, const RecurrentState& s, const LstmCell& cell,
                              const ParamStore& store) {
  const int n = cell.hidden_size();
  require(x.size() == cell.input_size() && s.hidden.size() == n && s.cell.size() == n,
          "recurrent_step: input " + std::to_string(x.size()) + ", state " + std::to_string(s.hidden.size()) + "/" +
              std::to_string(s.cell.size()));
  const Eigen::VectorXd pre =
      store[cell.w()].value * x + store[cell.u()].value * s.hidden + store[cell.b()].value.row(0).transpose();
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const Eigen::ArrayXd i = pre.segment(0, n).unaryExpr(sig).array();
  const Eigen::ArrayXd f = pre.segment(n, n).unaryExpr(sig).array();
  const Eigen::ArrayXd g = pre.segment(2 * n, n).array().tanh();
  const Eigen::ArrayXd o = pre.segment(3 * n, n).unaryExpr(sig).array();
  RecurrentState out;
  out.cell = (f * s.cell.array() + i * g).matrix();
  out.hidden = (o * out.cell.array().tanh()).matrix();
  return out;
}

Linear::Linear(ParamStore& store, const std::string& prefix, int input, int output) : input_(input), output_(output) {
  w_ = store.add(prefix + ".W", output, input, input);
  b_ = store.add(prefix + ".b", 1, output, input);
}

Var Linear::operator()(Graph& g, Var x) const { return g.add_row(g.matmul_t(x, g.param(w_)), g.param(b_)); }

// ---------------------------------------------------------------------------
// Loss

Var weighted_ce_loss(Graph& g, std::span<const Var> step_logits, std::span<const StepLabels> targets,
                     const std::vector<std::vector<std::int64_t>>& freqs, int k) {
  require(!step_logits.empty() && step_logits.size() == targets.size(), "weighted_ce_loss: step count mismatch");
  require(freqs.size() == kJoints, "weighted_ce_loss: expected per-joint frequencies");
  const auto batch = g.value(step_logits[0]).rows();
  std::vector<Var> terms;
  for (std::size_t t = 0; t < step_logits.size(); ++t) {
    const Matrix& lv = g.value(step_logits[t]);
    require(lv.cols() == kJoints * k && lv.rows() == batch &&
                targets[t].size() == static_cast<std::size_t>(batch),
            "weighted_ce_loss: logits " + shape(lv) + " for " + std::to_string(targets[t].size()) + " labels");
    std::vector<int> labels;
    std::vector<double> weights;
    for (const auto& row : targets[t]) {
      for (std::size_t j = 0; j < kJoints; ++j) {
        const int c = row[j];
        if (c < 0 || c >= k || static_cast<std::size_t>(c) >= freqs[j].size()) {
          fail(errc::kIndexOutOfRange, "label " + std::to_string(c) + " outside [0, K)");
        }
        const auto f = freqs[j][static_cast<std::size_t>(c)];
        if (f <= 0) {
          fail(errc::kZeroFrequency,
               "class " + std::to_string(c) + " of joint " + std::to_string(j) + " has zero training frequency");
        }
        labels.push_back(c);
        weights.push_back(1.0 / static_cast<double>(f));
      }
    }
    terms.push_back(g.weighted_nll(step_logits[t], kJoints, std::move(labels), std::move(weights)));
  }
  const double norm = static_cast<double>(step_logits.size()) * kJoints * static_cast<double>(batch);
  return g.scale(g.sum(terms), 1.0 / norm);
}

double weighted_ce_loss(std::span<const Matrix> step_logits, std::span<const StepLabels> targets,
                        const std::vector<std::vector<std::int64_t>>& freqs, int k) {
  Graph g;
  std::vector<Var> vars;
  for (const auto& m : step_logits) vars.push_back(g.constant(m));
  return g.value(weighted_ce_loss(g, vars, targets, freqs, k))(0, 0);
}

// ---------------------------------------------------------------------------
// Optimization

void sgd_step(ParamStore& params, double lr, double momentum) {
  for (auto& p : params.all()) {
    p.velocity = momentum * p.velocity + p.grad;
    p.value -= lr * p.velocity;
    p.grad.setZero();
  }
}

double clip_grad_norm(ParamStore& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params.all()) sq += p.grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) fail(errc::kNonFinite, "gradient norm is not finite");
  if (norm > max_norm && max_norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& p : params.all()) p.grad *= s;
  }
  return norm;
}

ActionLabel argmax_groups(const Eigen::Ref<const Eigen::RowVectorXd>& row, int k) {
  require(row.size() == kJoints * k, "argmax_groups: expected " + std::to_string(kJoints * k) + " values");
  ActionLabel out{};
  for (int j = 0; j < kJoints; ++j) {
    int best = 0;
    for (int c = 1; c < k; ++c) {
      if (row(j * k + c) > row(j * k + best)) best = c;
    }
    out[static_cast<std::size_t>(j)] = best;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckReport gradient_check(ParamStore& params, const std::function<Var(Graph&)>& build, double step,
                               double floor) {
  params.zero_grad();
  {
    Graph g(&params);
    g.backward(build(g));
  }
  std::vector<Matrix> analytic;
  for (const auto& p : params.all()) analytic.push_back(p.grad);
  params.zero_grad();

  auto loss_at = [&] {
    Graph g(&params);
    return g.value(build(g))(0, 0);
  };

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.all().size(); ++pi) {
    Parameter& p = params.all()[pi];
    GradCheckEntry entry{p.name, 0.0, 0.0, 0};
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      double& v = p.value.data()[i];
      const double saved = v;
      v = saved + step;
      const double up = loss_at();
      v = saved - step;
      const double down = loss_at();
      v = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[pi].data()[i];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), floor});
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
      ++entry.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kMagic = "MK01";

template <typename T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

void put_string(std::string& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    char buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + at_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    at_ += sizeof(T);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(bytes_.substr(at_, n));
    at_ += n;
    return s;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(at_, n);
    at_ += n;
    return s;
  }

  bool done() const { return at_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - at_ < n) fail(errc::kFormat, "checkpoint truncated");
  }

  std::string_view bytes_;
  std::size_t at_ = 0;
};

}  // namespace

std::int64_t Checkpoint::dim(const std::string& key) const {
  for (const auto& [k, v] : dims) {
    if (k == key) return v;
  }
  fail(errc::kFormat, "checkpoint has no dimension '" + key + "'");
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic);
  put_string(out, ckpt.tag);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.dims.size()));
  for (const auto& [k, v] : ckpt.dims) {
    put_string(out, k);
    put<std::int64_t>(out, v);
  }
  put<std::uint64_t>(out, ckpt.seed);
  put<std::uint64_t>(out, ckpt.codebook_hash);
  put<std::uint64_t>(out, ckpt.values.size());
  for (double v : ckpt.values) put<double>(out, v);
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(kMagic.size()) != kMagic) fail(errc::kFormat, "not a model checkpoint (bad magic)");
  Checkpoint c;
  c.tag = r.get_string();
  const auto n_dims = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_dims; ++i) {
    auto key = r.get_string();
    c.dims.emplace_back(std::move(key), r.get<std::int64_t>());
  }
  c.seed = r.get<std::uint64_t>();
  c.codebook_hash = r.get<std::uint64_t>();
  const auto n = r.get<std::uint64_t>();
  if (n > bytes.size() / sizeof(double)) fail(errc::kFormat, "checkpoint value count exceeds file size");
  c.values.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double v = r.get<double>();
    if (!std::isfinite(v)) fail(errc::kFormat, "checkpoint holds a non-finite parameter");
    c.values.push_back(v);
  }
  if (!r.done()) fail(errc::kFormat, "trailing bytes after checkpoint");
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  textio::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(textio::read_file(path)); }

}  // namespace kennel::net
