#include "kennel/netcore.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "kennel/error.hpp"
#include "kennel/textio.hpp"

namespace kennel::net {
namespace {

std::string error_class_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.error_class();
  }
  return "none";
}

Matrix random_matrix(Rng& rng, int r, int c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

TEST(Linear, IdentityAndZeroInput) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(3, 1.0, 3.0);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(3, 0.5);
  EXPECT_EQ(linear(x, Matrix::Identity(3, 3), Eigen::VectorXd::Zero(3)), x);
  EXPECT_EQ(linear(Eigen::VectorXd::Zero(3), Matrix::Ones(3, 3), b), b);
}

TEST(Linear, HandComputed) {
  Matrix w(3, 2);
  w << 1.5, -2.0, 0.25, 4.0, -1.0, 0.5;
  Eigen::VectorXd x(2), b(3);
  x << 2.0, -1.0;
  b << 0.1, 0.2, 0.3;
  const auto y = linear(x, w, b);
  EXPECT_DOUBLE_EQ(y(0), 1.5 * 2.0 + 2.0 + 0.1);
  EXPECT_DOUBLE_EQ(y(1), 0.5 - 4.0 + 0.2);
  EXPECT_DOUBLE_EQ(y(2), -2.0 - 0.5 + 0.3);
  EXPECT_EQ(error_class_of([&] { linear(Eigen::VectorXd::Zero(3), w, b); }), "numeric.shape_mismatch");
}

TEST(Recurrent, ZeroEverythingGivesZeroState) {
  ParamStore store(1);
  LstmCell cell(store, "cell", 4, 3);
  store.zero_values();
  const auto s = recurrent_step(Eigen::VectorXd::Zero(4), {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)}, cell,
                                store);
  EXPECT_EQ(s.hidden, Eigen::VectorXd::Zero(3));
  EXPECT_EQ(s.cell, Eigen::VectorXd::Zero(3));
}

TEST(Recurrent, SaturatedForgetGateKeepsCell) {
  ParamStore store(2);
  LstmCell cell(store, "cell", 4, 3);
  store.zero_values();
  Matrix& b = store[cell.b()].value;
  b.setConstant(-50.0);
  b.middleCols(3, 3).setConstant(50.0);
  Rng rng(5);
  RecurrentState s{random_matrix(rng, 3, 1).col(0), random_matrix(rng, 3, 1).col(0)};
  const auto next = recurrent_step(random_matrix(rng, 4, 1).col(0), s, cell, store);
  EXPECT_LT((next.cell - s.cell).cwiseAbs().maxCoeff(), 1e-9);
}

/// Scalar, loop-by-loop evaluation of the four-gate cell.
RecurrentState scalar_step(const std::vector<double>& x, const std::vector<double>& h, const std::vector<double>& c,
                           const Matrix& w, const Matrix& u, const Matrix& b) {
  const std::size_t n = h.size();
  auto pre = [&](std::size_t row) {
    double acc = b(0, static_cast<Eigen::Index>(row));
    for (std::size_t k = 0; k < x.size(); ++k) acc += w(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) * x[k];
    for (std::size_t k = 0; k < n; ++k) acc += u(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) * h[k];
    return acc;
  };
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  RecurrentState out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (std::size_t q = 0; q < n; ++q) {
    const double i = sig(pre(q));
    const double f = sig(pre(n + q));
    const double g = std::tanh(pre(2 * n + q));
    const double o = sig(pre(3 * n + q));
    const double cell = f * c[q] + i * g;
    out.cell(static_cast<Eigen::Index>(q)) = cell;
    out.hidden(static_cast<Eigen::Index>(q)) = o * std::tanh(cell);
  }
  return out;
}

TEST(Recurrent, MatchesScalarOracleAndGraphStep) {
  ParamStore store(3);
  LstmCell cell(store, "cell", 5, 4);
  Rng rng(9);
  const Matrix xm = random_matrix(rng, 1, 5), hm = random_matrix(rng, 1, 4), cm = random_matrix(rng, 1, 4);
  const RecurrentState s{hm.row(0).transpose(), cm.row(0).transpose()};
  const auto got = recurrent_step(xm.row(0).transpose(), s, cell, store);
  const auto want = scalar_step({xm.data(), xm.data() + 5}, {hm.data(), hm.data() + 4}, {cm.data(), cm.data() + 4},
                                store[cell.w()].value, store[cell.u()].value, store[cell.b()].value);
  EXPECT_LT((got.hidden - want.hidden).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((got.cell - want.cell).cwiseAbs().maxCoeff(), 1e-14);

  Graph g(&store);
  const auto [h2, c2] = cell.step(g, g.constant(xm), g.constant(hm), g.constant(cm));
  EXPECT_LT((g.value(h2).row(0).transpose() - want.hidden).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((g.value(c2).row(0).transpose() - want.cell).cwiseAbs().maxCoeff(), 1e-14);
}

std::vector<std::vector<std::int64_t>> unit_freqs(int k) {
  return std::vector<std::vector<std::int64_t>>(kJoints, std::vector<std::int64_t>(static_cast<std::size_t>(k), 1));
}

TEST(WeightedLoss, UniformLogitsSingleJoint) {
  Graph g;
  const Var logits = g.constant(Matrix::Zero(1, 8));
  const Var l = g.weighted_nll(logits, 1, {3}, {1.0});
  EXPECT_NEAR(g.value(l)(0, 0), std::log(8.0), 1e-12);
  EXPECT_NEAR(g.value(l)(0, 0), 2.0794, 1e-4);
}

TEST(WeightedLoss, UniformLogitsAllJoints) {
  const std::vector<Matrix> logits{Matrix::Zero(1, 48)};
  const std::vector<StepLabels> labels{{ActionLabel{0, 1, 2, 3, 4, 5}}};
  EXPECT_NEAR(weighted_ce_loss(logits, labels, unit_freqs(8), 8), std::log(8.0), 1e-12);
}

TEST(WeightedLoss, QuarterProbabilityWithFrequencyTwo) {
  // K=4 with uniform logits: every class has probability 0.25.
  const std::vector<Matrix> logits{Matrix::Zero(1, 24)};
  const std::vector<StepLabels> labels{{ActionLabel{1, 1, 1, 1, 1, 1}}};
  auto freqs = unit_freqs(4);
  for (auto& f : freqs) f[1] = 2;
  EXPECT_NEAR(weighted_ce_loss(logits, labels, freqs, 4), 0.5 * std::log(4.0), 1e-12);
  EXPECT_NEAR(weighted_ce_loss(logits, labels, freqs, 4), 0.6931, 1e-4);
}

TEST(WeightedLoss, ConfidentCorrectPredictionApproachesZero) {
  Matrix m = Matrix::Zero(2, 48);
  const std::vector<StepLabels> labels{{ActionLabel{0, 1, 2, 3, 4, 5}, ActionLabel{7, 7, 7, 7, 7, 7}}};
  for (int j = 0; j < kJoints; ++j) {
    m(0, j * 8 + labels[0][0][static_cast<std::size_t>(j)]) = 60.0;
    m(1, j * 8 + 7) = 60.0;
  }
  const double loss = weighted_ce_loss(std::vector<Matrix>{m}, labels, unit_freqs(8), 8);
  EXPECT_GE(loss, 0.0);
  EXPECT_LT(loss, 1e-20);
}

TEST(WeightedLoss, ZeroFrequencyAndRange) {
  const std::vector<Matrix> logits{Matrix::Zero(1, 48)};
  auto freqs = unit_freqs(8);
  freqs[4][2] = 0;
  EXPECT_EQ(error_class_of([&] {
              weighted_ce_loss(logits, std::vector<StepLabels>{{ActionLabel{0, 0, 0, 0, 2, 0}}}, freqs, 8);
            }),
            "numeric.zero_frequency");
  // A zero-count class that never occurs as ground truth is fine.
  EXPECT_NO_THROW(weighted_ce_loss(logits, std::vector<StepLabels>{{ActionLabel{0, 0, 0, 0, 1, 0}}}, freqs, 8));
  EXPECT_EQ(error_class_of([&] {
              weighted_ce_loss(logits, std::vector<StepLabels>{{ActionLabel{0, 0, 0, 0, 8, 0}}}, unit_freqs(8), 8);
            }),
            "data.index_out_of_range");
}

TEST(WeightedLoss, ShiftInvariantPerJointStep) {
  Rng rng(17);
  std::vector<Matrix> logits{random_matrix(rng, 3, 48) * 4.0, random_matrix(rng, 3, 48) * 4.0};
  std::vector<StepLabels> labels(2);
  for (auto& step : labels) {
    for (int b = 0; b < 3; ++b) {
      ActionLabel a{};
      for (auto& c : a) c = static_cast<int>(rng.index(8));
      step.push_back(a);
    }
  }
  auto freqs = unit_freqs(8);
  for (auto& f : freqs)
    for (auto& c : f) c = 1 + static_cast<std::int64_t>(rng.index(20));
  const double base = weighted_ce_loss(logits, labels, freqs, 8);
  for (int trial = 0; trial < 20; ++trial) {
    auto shifted = logits;
    const auto t = rng.index(2);
    const auto b = static_cast<Eigen::Index>(rng.index(3));
    const auto j = static_cast<Eigen::Index>(rng.index(6));
    shifted[t].row(b).segment(j * 8, 8).array() += rng.uniform(-100.0, 100.0);
    EXPECT_NEAR(weighted_ce_loss(shifted, labels, freqs, 8), base, 1e-9);
  }
}

TEST(Softmax, GroupsSumToOne) {
  Rng rng(4);
  Graph g;
  const Var p = g.softmax_groups(g.constant(random_matrix(rng, 5, 48) * 30.0), 6);
  for (Eigen::Index r = 0; r < 5; ++r) {
    for (int j = 0; j < 6; ++j) {
      EXPECT_NEAR(g.value(p).row(r).segment(j * 8, 8).sum(), 1.0, 1e-12);
      EXPECT_GE(g.value(p).row(r).segment(j * 8, 8).minCoeff(), 0.0);
    }
  }
}

TEST(Backward, LinearSumGradientIsOuterProduct) {
  ParamStore store(6);
  const ParamId w = store.add("W", 3, 4, 4);
  Rng rng(8);
  const Matrix x = random_matrix(rng, 1, 4);
  Graph g(&store);
  const Var y = g.matmul_t(g.constant(x), g.param(w));
  g.backward(g.matmul_t(y, g.constant(Matrix::Ones(1, 3))));
  // dL/dW_rc = x_c for every row r.
  for (Eigen::Index r = 0; r < 3; ++r) EXPECT_EQ(store[w].grad.row(r), x.row(0));
}

TEST(Backward, ZeroLossGivesZeroGradients) {
  ParamStore store(6);
  LstmCell cell(store, "cell", 3, 2);
  Graph g(&store);
  const auto [h, c] = cell.step(g, g.constant(Matrix::Ones(1, 3)), g.constant(Matrix::Zero(1, 2)),
                                g.constant(Matrix::Zero(1, 2)));
  const Var total = g.matmul_t(g.add(h, c), g.constant(Matrix::Ones(1, 2)));
  g.backward(g.scale(total, 0.0));
  for (const auto& p : store.all()) EXPECT_EQ(p.grad.cwiseAbs().maxCoeff(), 0.0) << p.name;
}

TEST(Backward, ShapeMismatchThrows) {
  Graph g;
  EXPECT_EQ(error_class_of([&] { g.matmul_t(g.constant(Matrix::Zero(2, 3)), g.constant(Matrix::Zero(4, 2))); }),
            "numeric.shape_mismatch");
  EXPECT_EQ(error_class_of([&] { g.add(g.constant(Matrix::Zero(2, 3)), g.constant(Matrix::Zero(3, 2))); }),
            "numeric.shape_mismatch");
  EXPECT_EQ(error_class_of([&] { g.backward(g.constant(Matrix::Zero(2, 2))); }), "numeric.shape_mismatch");
}

TEST(GradCheck, SmallRecurrentNetwork) {
  // D=6 features, H=8 hidden, N=3 steps, batch of 2, every op on the tape.
  const int d = 6, h = 8, n = 3, k = 8;
  ParamStore store(21);
  Linear embed(store, "embed", 2 * d, h);
  LstmCell cell(store, "cell", h, h);
  Linear head(store, "head", h, kJoints * k);
  Linear feedback(store, "feedback", kJoints * k, h);
  Rng rng(22);
  std::vector<Matrix> frames;
  for (int t = 0; t <= n; ++t) frames.push_back(random_matrix(rng, 2, d));
  std::vector<StepLabels> labels(n);
  for (auto& step : labels) {
    for (int b = 0; b < 2; ++b) {
      ActionLabel a{};
      for (auto& c : a) c = static_cast<int>(rng.index(k));
      step.push_back(a);
    }
  }
  auto freqs = unit_freqs(k);
  for (auto& f : freqs)
    for (auto& c : f) c = 1 + static_cast<std::int64_t>(rng.index(5));

  auto build = [&](Graph& g) {
    Var hs = g.constant(Matrix::Zero(2, h));
    Var cs = g.constant(Matrix::Zero(2, h));
    Var x = embed(g, g.concat_cols(g.constant(frames[0]), g.constant(frames[n])));
    std::vector<Var> logits;
    for (int t = 0; t < n; ++t) {
      std::tie(hs, cs) = cell.step(g, x, hs, cs);
      logits.push_back(head(g, hs));
      x = g.tanh(feedback(g, g.softmax_groups(logits.back(), kJoints)));
    }
    return weighted_ce_loss(g, logits, labels, freqs, k);
  };
  const auto report = gradient_check(store, build);
  for (const auto& e : report.entries) EXPECT_LT(e.max_rel_error, 1e-4) << e.param;
  EXPECT_EQ(report.entries.size(), store.all().size());
}

TEST(Sgd, ZeroGradientLeavesParameters) {
  ParamStore store(3);
  store.add("a", 2, 2, 2);
  const auto before = store.flat_values();
  sgd_step(store, 0.5, 0.9);
  EXPECT_EQ(store.flat_values(), before);
}

TEST(Sgd, QuadraticBowlDecay) {
  ParamStore store(0);
  const ParamId p = store.add_zero("p", 1, 1);
  store[p].value(0, 0) = 1.0;
  for (int i = 1; i <= 200; ++i) {
    store[p].grad(0, 0) = store[p].value(0, 0);  // d/dp of p^2/2
    sgd_step(store, 0.1, 0.0);
    if (i <= 5) EXPECT_NEAR(store[p].value(0, 0), std::pow(0.9, i), 1e-15);
    EXPECT_EQ(store[p].grad(0, 0), 0.0);
  }
  EXPECT_LT(std::abs(store[p].value(0, 0)), 1e-8);
}

TEST(Sgd, MomentumAccumulates) {
  ParamStore store(0);
  const ParamId p = store.add_zero("p", 1, 1);
  store[p].grad(0, 0) = 1.0;
  sgd_step(store, 0.1, 0.9);
  store[p].grad(0, 0) = 1.0;
  sgd_step(store, 0.1, 0.9);
  EXPECT_NEAR(store[p].value(0, 0), -(0.1 + 0.1 * 1.9), 1e-15);
}

TEST(Sgd, ClipGradNorm) {
  ParamStore store(0);
  const ParamId a = store.add_zero("a", 1, 2);
  store[a].grad << 3.0, 4.0;
  EXPECT_DOUBLE_EQ(clip_grad_norm(store, 1.0), 5.0);
  EXPECT_NEAR(store[a].grad.norm(), 1.0, 1e-15);
}

TEST(Determinism, SameSeedSameParametersAfterTraining) {
  auto run = [] {
    ParamStore store(77);
    LstmCell cell(store, "c", 3, 4);
    Linear head(store, "h", 4, 48);
    Rng rng(1);
    const Matrix x = random_matrix(rng, 4, 3);
    for (int it = 0; it < 10; ++it) {
      Graph g(&store);
      const auto [h, c] = cell.step(g, g.constant(x), g.constant(Matrix::Zero(4, 4)), g.constant(Matrix::Zero(4, 4)));
      const std::vector<Var> logits{head(g, h)};
      const std::vector<StepLabels> labels{StepLabels(4, ActionLabel{1, 2, 3, 4, 5, 6})};
      g.backward(weighted_ce_loss(g, logits, labels, unit_freqs(8), 8));
      sgd_step(store, 0.1, 0.9);
    }
    return store.flat_values();
  };
  EXPECT_EQ(run(), run());
}

TEST(Argmax, TiesGoLow) {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(48);
  row(8 + 3) = 1.0;
  row(8 + 5) = 1.0;
  row(40 + 7) = 2.0;
  EXPECT_EQ(argmax_groups(row, 8), (ActionLabel{0, 3, 0, 0, 0, 7}));
}

TEST(Checkpoint, RoundTripAndCorruption) {
  ParamStore store(5);
  store.add("a", 3, 4, 4);
  store.add("b", 1, 7, 4);
  Checkpoint c{"act1", {{"D", 6}, {"H", 8}}, 0xfeedfacecafebeefULL, 1234567890123ULL, store.flat_values()};
  const auto bytes = encode_checkpoint(c);
  EXPECT_EQ(bytes.substr(0, 4), "MK01");
  const auto back = decode_checkpoint(bytes);
  EXPECT_EQ(back.tag, "act1");
  EXPECT_EQ(back.dims, c.dims);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.codebook_hash, c.codebook_hash);
  EXPECT_EQ(back.values, c.values);
  EXPECT_EQ(back.dim("H"), 8);
  EXPECT_EQ(encode_checkpoint(back), bytes);

  // Values are stored as little-endian float64 at the tail.
  double last;
  std::memcpy(&last, bytes.data() + bytes.size() - 8, 8);
  EXPECT_EQ(last, c.values.back());

  EXPECT_EQ(error_class_of([&] { decode_checkpoint("MK02" + bytes.substr(4)); }), "format.error");
  EXPECT_EQ(error_class_of([&] { decode_checkpoint(bytes.substr(0, bytes.size() - 3)); }), "format.error");
  EXPECT_EQ(error_class_of([&] { decode_checkpoint(bytes + "x"); }), "format.error");
  EXPECT_EQ(error_class_of([&] { back.dim("K"); }), "format.error");

  ParamStore other(9);
  other.add("a", 3, 4, 4);
  EXPECT_EQ(error_class_of([&] { other.set_flat_values(back.values); }), "format.dim_mismatch");

  const auto path = std::filesystem::temp_directory_path() / "kennel_netcore_test" / "m.ckpt";
  save_checkpoint(c, path);
  EXPECT_EQ(load_checkpoint(path).values, c.values);
  std::filesystem::remove_all(path.parent_path());
  EXPECT_EQ(error_class_of([&] { load_checkpoint(path); }), "io.missing");
}

}  // namespace
}  // namespace kennel::net
