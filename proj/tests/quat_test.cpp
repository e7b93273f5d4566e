#include "kennel/quat.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kennel/error.hpp"
#include "oracles.hpp"

namespace kennel::quat {
namespace {

using oracle::deg;
using oracle::z_rot_deg;

constexpr double kTol = 1e-9;

void expect_quat_near(const UnitQuaternion& a, const UnitQuaternion& b, double tol = kTol) {
  EXPECT_NEAR(a.w(), b.w(), tol);
  EXPECT_NEAR(a.x(), b.x(), tol);
  EXPECT_NEAR(a.y(), b.y(), tol);
  EXPECT_NEAR(a.z(), b.z(), tol);
}

double norm(const UnitQuaternion& q) { return std::sqrt(dot(q, q)); }

bool is_canonical(const UnitQuaternion& q) {
  if (q.w() > 0) return true;
  if (q.w() < 0) return false;
  const double lead = q.x() != 0 ? q.x() : (q.y() != 0 ? q.y() : q.z());
  return lead > 0;
}

TEST(Canonicalize, Examples) {
  EXPECT_EQ(canonicalize(-1, 0, 0, 0), UnitQuaternion::identity());
  expect_quat_near(canonicalize(0, 0, 0, 2), canonicalize(0, 0, 0, 1));
  EXPECT_EQ(canonicalize(0, 0, 0, 2).z(), 1.0);
  const auto h = canonicalize(0.5, 0.5, 0.5, 0.5);
  EXPECT_EQ(h.components(), (std::array<double, 4>{0.5, 0.5, 0.5, 0.5}));
}

TEST(Canonicalize, ZeroWSignRule) {
  const auto q = canonicalize(0, 0, -3, 4);
  EXPECT_EQ(q.w(), 0.0);
  EXPECT_GT(q.y(), 0.0);
  EXPECT_NEAR(q.z(), -0.8, 1e-15);
}

TEST(Canonicalize, DegenerateThrows) {
  try {
    canonicalize(0, 0, 0, 1e-13);
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.error_class(), "quat.degenerate");
  }
}

TEST(Canonicalize, RandomInvariantsAndIdempotence) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto q = canonicalize(rng.normal() * 5, rng.normal(), rng.normal(), rng.normal());
    EXPECT_NEAR(norm(q), 1.0, 1e-12);
    EXPECT_TRUE(is_canonical(q));
    EXPECT_EQ(canonicalize(q.components()), q);
  }
}

TEST(Multiply, IdentityAndInverseLaws) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto q = oracle::random_unit(rng);
    expect_quat_near(multiply(UnitQuaternion::identity(), q), q);
    expect_quat_near(multiply(q, inverse(q)), UnitQuaternion::identity());
  }
}

TEST(Multiply, QuarterTurnsComposeLikeMatrices) {
  const auto q90 = z_rot_deg(90);
  const auto product = multiply(q90, q90);
  const auto expected = oracle::matmul(oracle::rotation_matrix({0, 0, 1}, deg(90)), oracle::rotation_matrix({0, 0, 1}, deg(90)));
  EXPECT_LT(oracle::max_abs_diff(oracle::matrix_of(product), expected), 1e-12);
  expect_quat_near(product, canonicalize(0, 0, 0, 1));
}

TEST(Multiply, MatchesMatrixCompositionOnRandomPairs) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto a = oracle::random_unit(rng);
    const auto b = oracle::random_unit(rng);
    const auto m = oracle::matmul(oracle::matrix_of(a), oracle::matrix_of(b));
    EXPECT_LT(oracle::max_abs_diff(oracle::matrix_of(multiply(a, b)), m), 1e-12);
  }
}

TEST(Relative, Examples) {
  Rng rng(3);
  const auto q = oracle::random_unit(rng);
  expect_quat_near(relative(q, q), UnitQuaternion::identity());
  expect_quat_near(relative(UnitQuaternion::identity(), q), q);
  expect_quat_near(relative(z_rot_deg(90), z_rot_deg(92)), z_rot_deg(2));
  EXPECT_NEAR(rotation_angle(relative(z_rot_deg(90), z_rot_deg(92))), deg(2), 1e-12);
}

TEST(GeodesicDistance, Examples) {
  Rng rng(4);
  const auto q = oracle::random_unit(rng);
  EXPECT_NEAR(geodesic_distance(q, q), 0.0, kTol);
  EXPECT_NEAR(geodesic_distance(UnitQuaternion::identity(), z_rot_deg(90)), std::numbers::pi / 2, 1e-12);
  // -q is not representable as a canonical value; the raw dot flips sign.
  const auto neg = canonicalize(-q.w(), -q.x(), -q.y(), -q.z());
  EXPECT_NEAR(geodesic_distance(q, neg), 0.0, kTol);
}

TEST(GeodesicDistance, EqualsMatrixRotationAngle) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto a = oracle::random_unit(rng);
    const auto b = oracle::random_unit(rng);
    auto ma = oracle::matrix_of(a);
    // R_a^T R_b is the relative rotation.
    oracle::Mat3 at{};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) at[r][c] = ma[c][r];
    EXPECT_NEAR(geodesic_distance(a, b), oracle::matrix_angle(oracle::matmul(at, oracle::matrix_of(b))), 1e-7);
  }
}

TEST(AngularError, Examples) {
  Rng rng(6);
  const auto q = oracle::random_unit(rng);
  EXPECT_NEAR(angular_error(q, q), 0.0, 1e-7);
  EXPECT_NEAR(angular_error(UnitQuaternion::identity(), z_rot_deg(90)), std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(angular_error(UnitQuaternion::identity(), z_rot_deg(90)) * 180 / std::numbers::pi, 90.0, 1e-9);
}

TEST(Mean, Examples) {
  Rng rng(7);
  const auto q = oracle::random_unit(rng);
  const std::vector<UnitQuaternion> one{q};
  EXPECT_EQ(mean(one), q);
  const std::vector<UnitQuaternion> three{q, q, q};
  expect_quat_near(mean(three), q);
  const std::vector<UnitQuaternion> planar{z_rot_deg(0), z_rot_deg(10)};
  expect_quat_near(mean(planar), z_rot_deg(5));
  const std::vector<UnitQuaternion> triple{z_rot_deg(0), z_rot_deg(6), z_rot_deg(12)};
  EXPECT_NEAR(rotation_angle(mean(triple)), deg(6), 1e-12);
}

TEST(Mean, SignAlignmentAcrossTheDoubleCover) {
  // 179 deg and 181 deg about z straddle the w = 0 plane; the canonical forms
  // sit on opposite hemispheres but the mean is still the 180 deg rotation.
  const std::vector<UnitQuaternion> qs{z_rot_deg(179), z_rot_deg(181)};
  EXPECT_NEAR(geodesic_distance(mean(qs), z_rot_deg(180)), 0.0, 1e-9);
}

TEST(Mean, EmptyListThrows) {
  try {
    mean(std::vector<UnitQuaternion>{});
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.error_class(), "data.empty");
  }
}

TEST(Mean, AlignedSumNeverCollapses) {
  // After alignment every element has a non-negative dot with the first, so
  // the averaged vector keeps norm >= 1/n; an orthogonal spread stays defined.
  const std::vector<UnitQuaternion> orthogonal{canonicalize(1, 0, 0, 0), canonicalize(0, 1, 0, 0),
                                               canonicalize(0, 0, 1, 0), canonicalize(0, 0, 0, 1)};
  const auto m = mean(orthogonal);
  EXPECT_NEAR(m.w(), 0.5, 1e-12);
  EXPECT_NEAR(m.z(), 0.5, 1e-12);
}

TEST(Slerp, EndpointsAndMidpoint) {
  Rng rng(8);
  const auto a = oracle::random_unit(rng);
  const auto b = oracle::random_unit(rng);
  EXPECT_EQ(slerp(a, b, 0.0), a);
  EXPECT_EQ(slerp(a, b, 1.0), b);
  expect_quat_near(slerp(UnitQuaternion::identity(), z_rot_deg(90), 0.5), z_rot_deg(45));
  EXPECT_EQ(slerp(a, a, 0.3), a);
}

TEST(Slerp, TakesTheShorterArc) {
  const auto r = slerp(z_rot_deg(170), z_rot_deg(-170), 0.5);
  EXPECT_NEAR(geodesic_distance(r, z_rot_deg(180)), 0.0, 1e-9);
}

TEST(Properties, RandomSuite) {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const auto a = oracle::random_unit(rng);
    const auto b = oracle::random_unit(rng);
    const auto r = oracle::random_unit(rng);
    const double t = rng.uniform();
    const double d = geodesic_distance(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, std::numbers::pi);
    EXPECT_NEAR(d, geodesic_distance(b, a), kTol);
    EXPECT_NEAR(d, geodesic_distance(multiply(r, a), multiply(r, b)), kTol);
    EXPECT_NEAR(d, angular_error(a, b), kTol);
    EXPECT_NEAR(d, rotation_angle(relative(a, b)), kTol);
    EXPECT_NEAR(geodesic_distance(multiply(a, relative(a, b)), b), 0.0, 1e-7);
    EXPECT_NEAR(geodesic_distance(a, slerp(a, b, t)), t * d, kTol);
  }
}

}  // namespace
}  // namespace kennel::quat
