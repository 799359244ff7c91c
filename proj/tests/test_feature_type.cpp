#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gemesh/errors.hpp"
#include "gemesh/feature_type.hpp"

using namespace gemesh;

TEST_CASE("irrep matrices rotate at n times the angle") {
  CHECK(irrep_matrix(0, 1.234).rows() == 1);
  CHECK(irrep_matrix(0, 1.234)(0, 0) == 1.0);

  double g = 0.7;
  for (int n : {1, 2, 5}) {
    Eigen::MatrixXd m = irrep_matrix(n, g);
    CHECK(m(0, 0) == doctest::Approx(std::cos(n * g)).epsilon(1e-15));
    CHECK(m(1, 0) == doctest::Approx(std::sin(n * g)).epsilon(1e-15));
    CHECK(m(0, 1) == doctest::Approx(-std::sin(n * g)).epsilon(1e-15));
    // group law: rho(a) rho(b) = rho(a+b)
    Eigen::MatrixXd prod = irrep_matrix(n, 0.3) * irrep_matrix(n, 0.4);
    CHECK((prod - irrep_matrix(n, 0.7)).norm() < 1e-14);
  }
}

TEST_CASE("regular type layout interleaves fields") {
  FeatureType t = FeatureType::regular(2, 3);
  CHECK(t.dim() == 15);
  CHECK(t.slots() == 9);
  // field f starts at column f*5
  CHECK(t.offset(0) == 0);
  CHECK(t.offset(3) == 5);
  CHECK(t.freq(4) == 1);
  int mf = 0, fields = 0;
  CHECK(t.is_regular(&mf, &fields));
  CHECK(mf == 2);
  CHECK(fields == 3);

  CHECK(FeatureType::scalars(5).is_regular(&mf, &fields));
  CHECK(mf == 0);
  CHECK(fields == 5);

  CHECK_FALSE(FeatureType({0, 1, 1}).is_regular());
  CHECK_FALSE(FeatureType({1, 0}).is_regular());
}

TEST_CASE("blocks group copies by frequency in ascending order") {
  FeatureType t({2, 0, 1, 0, 2});
  CHECK(t.dim() == 8);
  auto blocks = t.blocks();
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0].freq == 0);
  CHECK(blocks[0].copies == 2);
  CHECK(blocks[0].offset == 0);
  CHECK(blocks[1].freq == 1);
  CHECK(blocks[1].copies == 1);
  CHECK(blocks[1].offset == 2);
  CHECK(blocks[2].freq == 2);
  CHECK(blocks[2].copies == 2);
  CHECK(blocks[2].offset == 4);
  CHECK(t.multiplicity(2) == 2);
  CHECK(t.multiplicity(3) == 0);
  CHECK(t.max_freq() == 2);
}

TEST_CASE("layout permutations are inverse bijections") {
  FeatureType t({2, 0, 1, 0, 2});
  const auto& to_im = t.cols_to_irrep_major();
  const auto& from_im = t.cols_from_irrep_major();
  REQUIRE((int)to_im.size() == t.dim());

  // canonical layout: [2a 2b | 0 | 1a 1b | 0 | 2a 2b] -> irrep major [0 0 | 1a 1b | 2.. 2..]
  Eigen::RowVectorXd x(8);
  x << 10, 11, 1, 20, 21, 2, 30, 31;
  Eigen::RowVectorXd im(8);
  for (int j = 0; j < 8; ++j) im[j] = x[to_im[j]];
  Eigen::RowVectorXd expected(8);
  expected << 1, 2, 20, 21, 10, 11, 30, 31;
  CHECK((im - expected).norm() == 0.0);

  Eigen::RowVectorXd back(8);
  for (int j = 0; j < 8; ++j) back[j] = im[from_im[j]];
  CHECK((back - x).norm() == 0.0);
}

TEST_CASE("rep_apply matches blockwise irrep rotation and composes") {
  FeatureType t({0, 1, 3});
  Eigen::RowVectorXd x(5);
  x << 2.0, 1.0, 0.5, -1.0, 0.25;
  double g = 0.9;
  Eigen::RowVectorXd y = rep_apply(t, g, x);
  CHECK(y[0] == 2.0);
  Eigen::Vector2d v1 = irrep_matrix(1, g) * Eigen::Vector2d(1.0, 0.5);
  Eigen::Vector2d v3 = irrep_matrix(3, g) * Eigen::Vector2d(-1.0, 0.25);
  CHECK(std::abs(y[1] - v1[0]) < 1e-15);
  CHECK(std::abs(y[2] - v1[1]) < 1e-15);
  CHECK(std::abs(y[3] - v3[0]) < 1e-15);
  CHECK(std::abs(y[4] - v3[1]) < 1e-15);

  Eigen::RowVectorXd via_two = rep_apply(t, 0.4, rep_apply(t, 0.5, x));
  CHECK((via_two - y).norm() < 1e-14);
  // identity at full turns
  CHECK((rep_apply(t, 2 * std::numbers::pi, x) - x).norm() < 1e-13);
}

TEST_CASE("concat preserves slot order and run-length roundtrip") {
  FeatureType a = FeatureType::regular(1, 2);  // [0 1 0 1]
  FeatureType b = FeatureType::scalars(2);     // [0 0]
  FeatureType c = a.concat(b);
  CHECK(c.slots() == 6);
  CHECK(c.freq(4) == 0);
  CHECK(c.dim() == a.dim() + b.dim());

  auto runs = c.run_lengths();
  FeatureType back = FeatureType::from_run_lengths(runs);
  CHECK(back == c);
  CHECK(back.describe() == c.describe());
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(FeatureType({-1}), Error);
  CHECK_THROWS_AS(FeatureType::regular(-1, 2), Error);
  CHECK_THROWS_AS(FeatureType::regular(2, 0), Error);
  FeatureType t({0, 1});
  Eigen::RowVectorXd wrong(2);
  wrong << 1, 2;
  CHECK_THROWS_AS(rep_apply(t, 0.1, wrong), Error);
}
