#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kennel/rng.hpp"
#include "kennel/types.hpp"

namespace kennel::net {

/// Row-major dense matrix; a batch of vectors is one row per item.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix velocity;
};

struct ParamId {
  int index = -1;
};

/// Named parameters in declaration order, each with a same-shape gradient
/// and momentum slot. Initialization draws from a generator seeded once at
/// construction, so declaration order fully determines the initial values.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed), rng_(seed) {}

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  ParamId add(const std::string& name, int rows, int cols, int fan_in);
  ParamId add_zero(const std::string& name, int rows, int cols);

  Parameter& operator[](ParamId id) { return params_.at(static_cast<std::size_t>(id.index)); }
  const Parameter& operator[](ParamId id) const { return params_.at(static_cast<std::size_t>(id.index)); }
  std::span<Parameter> all() { return params_; }
  std::span<const Parameter> all() const { return params_; }
  ParamId find(const std::string& name) const;

  std::uint64_t seed() const { return seed_; }
  std::size_t value_count() const;
  void zero_grad();
  void zero_values();

  /// All values concatenated in declaration order, row-major.
  std::vector<double> flat_values() const;
  void set_flat_values(std::span<const double> values);

 private:
  std::uint64_t seed_;
  Rng rng_;
  std::vector<Parameter> params_;
};

struct Var {
  int id = -1;
};

/// Reverse-mode tape. Every op appends a node holding its value and a
/// closure that pushes the node's gradient to its inputs; `backward` runs
/// the closures in reverse order and accumulates into ParamStore gradients.
/// Throws `numeric.shape_mismatch` when operand shapes do not conform.
class Graph {
 public:
  explicit Graph(ParamStore* params = nullptr) : params_(params), writable_(params) {}
  /// Inference-only graph; backward() through a parameter throws.
  explicit Graph(const ParamStore& params) : params_(&params), writable_(nullptr) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Matrix value);
  Var param(ParamId id);

  const Matrix& value(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).value; }
  std::size_t size() const { return nodes_.size(); }

  /// x * w^T for x (B x in), w (out x in).
  Var matmul_t(Var x, Var w);
  /// y + b with b a single row broadcast over y's rows.
  Var add_row(Var y, Var b);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var slice_cols(Var a, int start, int count);
  Var concat_cols(Var a, Var b);
  /// Softmax over each of `groups` equal-width column blocks of every row.
  Var softmax_groups(Var logits, int groups);
  /// sum_b sum_j weights(b,j) * -log softmax_j(logits_b)[labels(b,j)], a 1x1 value.
  Var weighted_nll(Var logits, int groups, std::vector<int> labels, std::vector<double> weights);
  Var sum(std::span<const Var> terms);

  /// Seeds d(out)/d(out) = 1 for a 1x1 node and accumulates parameter gradients.
  void backward(Var out);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    std::function<void(Graph&)> back;
  };

  Var push(Matrix value, bool needs_grad, std::function<void(Graph&)> back);
  Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.id)]; }
  bool needs(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].needs_grad; }
  Matrix& grad_of(Var v);

  const ParamStore* params_;
  ParamStore* writable_;
  std::vector<Node> nodes_;
};

/// W x + b for a single vector. Throws `numeric.shape_mismatch`.
Eigen::VectorXd linear(const Eigen::VectorXd& x, const Matrix& w, const Eigen::VectorXd& b);

struct RecurrentState {
  Eigen::VectorXd hidden;
  Eigen::VectorXd cell;
};

/// Gated recurrent cell with separate hidden and cell state. Gate blocks of
/// the stacked weights are ordered input, forget, candidate, output:
///   i,f,o = sigmoid(W x + U h + b), g = tanh(...), c' = f*c + i*g, h' = o*tanh(c').
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(ParamStore& store, const std::string& prefix, int input, int hidden);

  int input_size() const { return input_; }
  int hidden_size() const { return hidden_; }
  ParamId w() const { return w_; }
  ParamId u() const { return u_; }
  ParamId b() const { return b_; }

  /// One step on a batch: x (B x input), h and c (B x hidden).
  std::pair<Var, Var> step(Graph& g, Var x, Var h, Var c) const;

 private:
  int input_ = 0;
  int hidden_ = 0;
  ParamId w_, u_, b_;
};

/// Single-vector forward step through `cell` with parameters from `store`.
RecurrentState recurrent_step(const Eigen::VectorXd& x, const RecurrentState& s, const LstmCell& cell,
                              const ParamStore& store);

/// Dense layer y = x W^T + b.
class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& prefix, int input, int output);
  Var operator()(Graph& g, Var x) const;
  int input_size() const { return input_; }
  int output_size() const { return output_; }
  ParamId w() const { return w_; }
  ParamId b() const { return b_; }

 private:
  int input_ = 0;
  int output_ = 0;
  ParamId w_, b_;
};

/// Ground-truth labels for one decoder step, one entry per batch row.
using StepLabels = std::vector<ActionLabel>;

/// Averaged weighted class-entropy loss over N steps x 6 joints x B items:
///   L = -(1/(N*J*B)) sum_t sum_b sum_j (1/f^j_g) log softmax(logits_t,b,j)[g]
/// with logits_t of shape B x 6K and `freqs[j][c]` the training count of
/// class c for joint j. Throws `numeric.zero_frequency` when a ground-truth
/// class has zero count.
Var weighted_ce_loss(Graph& g, std::span<const Var> step_logits, std::span<const StepLabels> targets,
                     const std::vector<std::vector<std::int64_t>>& freqs, int k);

/// Plain-value form of weighted_ce_loss.
double weighted_ce_loss(std::span<const Matrix> step_logits, std::span<const StepLabels> targets,
                        const std::vector<std::vector<std::int64_t>>& freqs, int k);

/// v <- momentum v + grad; p <- p - lr v; gradients zeroed.
void sgd_step(ParamStore& params, double lr, double momentum);

/// Rescales all gradients so their global L2 norm is at most max_norm;
/// returns the norm before clipping.
double clip_grad_norm(ParamStore& params, double max_norm);

/// Index of the largest entry in each K-wide group of `row`; ties go low.
ActionLabel argmax_groups(const Eigen::Ref<const Eigen::RowVectorXd>& row, int k);

// ---------------------------------------------------------------------------
// Finite-difference gradient checking

struct GradCheckEntry {
  std::string param;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed(double tol) const { return max_rel_error < tol; }
};

/// Compares backward() against central differences for every scalar of
/// every parameter. `build` must construct the loss on the given graph.
/// Relative error is |a - n| / max(|a|, |n|, floor). The floor keeps
/// gradients below the roundoff of the difference quotient (about 1e-11 at
/// step 1e-5) from being compared on their noise alone.
GradCheckReport gradient_check(ParamStore& params, const std::function<Var(Graph&)>& build, double step = 1e-5,
                               double floor = 1e-6);

// ---------------------------------------------------------------------------
// Checkpoints: "MK01", tag, named integer dims, seed, codebook hash, then every
// parameter value as a little-endian float64 in declaration order.

struct Checkpoint {
  std::string tag;
  std::vector<std::pair<std::string, std::int64_t>> dims;
  std::uint64_t seed = 0;
  std::uint64_t codebook_hash = 0;
  std::vector<double> values;

  std::int64_t dim(const std::string& key) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kennel::net
