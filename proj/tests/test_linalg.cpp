#include <doctest.h>

#include "helpers.hpp"
#include "scte/scte.hpp"

using namespace scte;

TEST_CASE("svd: identity and diagonal cases") {
  SVDFactors f = svd(Matrix::Identity(2, 2));
  CHECK(f.rank == 2);
  CHECK(f.singular_values(0) == doctest::Approx(1.0));
  CHECK(f.singular_values(1) == doctest::Approx(1.0));

  Matrix x(2, 2);
  x << 3, 0, 0, 0;
  f = svd(x);
  CHECK(f.rank == 1);
  CHECK(f.singular_values(0) == doctest::Approx(3.0));
  CHECK(f.singular_values(1) == doctest::Approx(0.0));
}

TEST_CASE("svd: reconstruction and orthonormality on random input") {
  Rng rng = make_rng(11);
  const Matrix x = test::random_matrix(6, 3, rng);
  SVDFactors f = svd(x);
  const Matrix recomposed = f.U * f.singular_values.asDiagonal() * f.V.transpose();
  CHECK((recomposed - x).norm() < 1e-10);
  CHECK((f.U.transpose() * f.U - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((f.V.transpose() * f.V - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  for (Index i = 1; i < f.singular_values.size(); ++i)
    CHECK(f.singular_values(i) <= f.singular_values(i - 1));
}

TEST_CASE("svd: rejects non-finite input") {
  Matrix x = Matrix::Ones(2, 2);
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd(x), NonFiniteInput);
  x(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(leverage_scores(x), NonFiniteInput);
}

TEST_CASE("leverage_scores: identity, hand-computed and zero-row cases") {
  LeverageProfile p = leverage_scores(Matrix::Identity(3, 3));
  for (Index j = 0; j < 3; ++j) CHECK(p.scores(j) == doctest::Approx(1.0));

  // Gram matrix diag(2, 1): scores (0.5, 0.5, 1).
  Matrix x(3, 2);
  x << 1, 0, 1, 0, 0, 1;
  p = leverage_scores(x);
  CHECK(p.scores(0) == doctest::Approx(0.5));
  CHECK(p.scores(1) == doctest::Approx(0.5));
  CHECK(p.scores(2) == doctest::Approx(1.0));

  x.row(1).setZero();
  p = leverage_scores(x);
  CHECK(p.scores(1) == doctest::Approx(0.0));
}

TEST_CASE("leverage_scores: mass equals numerical rank, scale invariance") {
  Rng rng = make_rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 4 + static_cast<Index>(trial % 9);
    const Index d = 2 + static_cast<Index>(trial % 4);
    const Matrix x = (trial % 3 == 0) ? test::random_low_rank(n, d, std::max<Index>(1, d - 1), rng)
                                      : test::random_matrix(n, d, rng);
    LeverageProfile p = leverage_scores(x);
    CHECK(std::abs(p.scores.sum() - static_cast<double>(p.source_rank)) <= 1e-8);
    for (Index j = 0; j < n; ++j) {
      CHECK(p.scores(j) >= -1e-10);
      CHECK(p.scores(j) <= 1.0 + 1e-10);
    }
    LeverageProfile scaled = leverage_scores(Matrix(x * 7.25));
    CHECK((p.scores - scaled.scores).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("smoothed_matrix: gamma zero keeps X bit-identical") {
  Rng rng = make_rng(33);
  const Matrix x = test::random_matrix(5, 3, rng);
  SmoothedMatrix s = smoothed_matrix(x, 0.0);
  CHECK(s.matrix == x);
  CHECK(s.d_prime == 3);
}

TEST_CASE("smoothed_matrix: threshold between singular values") {
  Matrix x = Matrix::Zero(2, 2);
  x(0, 0) = 2.0;
  x(1, 1) = 0.5;
  SmoothedMatrix s = smoothed_matrix(x, 1.0);
  CHECK(s.d_prime == 1);
  CHECK(s.matrix(0, 0) == doctest::Approx(2.0));
  CHECK(s.matrix(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("smoothed_matrix: spectral error equals largest discarded value") {
  Rng rng = make_rng(44);
  const Matrix x = test::random_matrix(10, 3, rng);
  SVDFactors f = svd(x);
  const double s2 = f.singular_values(1), s3 = f.singular_values(2);
  const double gamma = 0.5 * (s2 * s2 + s3 * s3);
  SmoothedMatrix s = smoothed_matrix(x, gamma);
  CHECK(s.d_prime == 2);
  CHECK(svd(s.matrix).rank == 2);
  Eigen::BDCSVD<Matrix> diff(x - s.matrix);
  CHECK(std::abs(diff.singularValues()(0) - s3) < 1e-8);
  // Row norms cannot grow under the projection.
  for (Index i = 0; i < x.rows(); ++i)
    CHECK(s.matrix.row(i).norm() <= x.row(i).norm() + 1e-10);
}

TEST_CASE("smoothed_matrix: empty spectrum is an error") {
  Matrix x = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(smoothed_matrix(x, 1.0 + 1e-6), EmptySpectrum);
  // Exactly sqrt(gamma) == sigma_1 is retained (ties kept).
  SmoothedMatrix s = smoothed_matrix(x, 1.0);
  CHECK(s.d_prime == 3);
}

TEST_CASE("leverage cap 1/gamma on smoothed row-normalized matrices") {
  Rng rng = make_rng(55);
  for (double gamma : {0.05, 0.1, 0.5}) {
    for (int trial = 0; trial < 10; ++trial) {
      CovariateMatrix x = row_normalize(test::random_matrix(12, 4, rng));
      SmoothedMatrix s = [&] {
        try {
          return smoothed_matrix(x.data, gamma);
        } catch (const EmptySpectrum&) {
          return smoothed_matrix(x.data, 0.0);
        }
      }();
      Vector lev = s.U.rowwise().squaredNorm();
      if (s.gamma > 0.0) CHECK(lev.maxCoeff() <= 1.0 / s.gamma + 1e-10);
    }
  }
}

TEST_CASE("smoothing error bound ||X* b - X b|| <= sqrt(gamma) ||b||") {
  Rng rng = make_rng(66);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = test::random_matrix(8, 4, rng);
    const Vector beta = test::random_vector(4, rng);
    const double s1 = svd(x).singular_values(0);
    const double gamma = std::pow(s1 * 0.9, 2.0) * (0.1 + 0.8 * (trial / 50.0));
    SmoothedMatrix s = smoothed_matrix(x, gamma);
    CHECK(((s.matrix - x) * beta).norm() <= std::sqrt(gamma) * beta.norm() + 1e-8);
  }
}

TEST_CASE("min_norm_least_squares: identity, mean, and pseudo-inverse oracle") {
  Rng rng = make_rng(77);
  const Vector b3 = test::random_vector(3, rng);
  CHECK((min_norm_least_squares(Matrix::Identity(3, 3), b3) - b3).norm() < 1e-12);

  Matrix ones(2, 1);
  ones << 1, 1;
  Vector b(2);
  b << 0, 2;
  CHECK(min_norm_least_squares(ones, b)(0) == doctest::Approx(1.0));

  // Rank-deficient system vs. an independent pseudo-inverse route.
  const Matrix a = test::random_low_rank(8, 4, 2, rng);
  const Vector y = test::random_vector(8, rng);
  const Vector beta = min_norm_least_squares(a, y);
  const Vector expected = test::pinv_oracle(a) * y;
  CHECK((beta - expected).norm() < 1e-8);
  // Residual orthogonal to the column space.
  CHECK((a.transpose() * (a * beta - y)).norm() < 1e-8 * y.norm());
}

TEST_CASE("min_norm_least_squares: zero rows and dimension mismatch") {
  CHECK(min_norm_least_squares(Matrix(0, 4), Vector(0)) == Vector::Zero(4));
  CHECK_THROWS_AS(min_norm_least_squares(Matrix::Identity(3, 3), Vector(2)),
                  DimensionMismatch);
}

TEST_CASE("min_norm_least_squares: consistent systems are solved exactly") {
  Rng rng = make_rng(88);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = test::random_matrix(6, 3, rng);
    const Vector truth = test::random_vector(3, rng);
    const Vector b = a * truth;
    const Vector beta = min_norm_least_squares(a, b);
    CHECK((a * beta - b).norm() <= 1e-10 * (1.0 + b.norm()));
  }
}

TEST_CASE("ridge_loss: zero target, zero matrix, and normal-equations oracle") {
  Rng rng = make_rng(99);
  const Matrix x = test::random_matrix(6, 3, rng);
  CHECK(ridge_loss(x, Vector::Zero(6), Vector::Zero(6)) == doctest::Approx(0.0));

  const Vector v = test::random_vector(6, rng);
  CHECK(ridge_loss(Matrix::Zero(6, 3), v, v) ==
        doctest::Approx(2.0 * v.squaredNorm() / 6.0));

  const Vector y1 = test::random_vector(6, rng);
  const Vector y0 = test::random_vector(6, rng);
  const Vector target = 0.5 * (y1 + y0);
  const Matrix normal = x.transpose() * x + Matrix::Identity(3, 3);
  const Vector bstar = normal.fullPivLu().solve(x.transpose() * target);
  const double expected =
      2.0 / 6.0 * ((target - x * bstar).squaredNorm() + bstar.squaredNorm());
  CHECK(ridge_loss(x, y1, y0) == doctest::Approx(expected).epsilon(1e-8));

  CHECK_THROWS_AS(ridge_loss(x, Vector(5), y0), DimensionMismatch);
}

TEST_CASE("row_normalize: single row, idempotence, leverage preservation") {
  Matrix one_row(1, 2);
  one_row << 3, 4;
  CovariateMatrix c = row_normalize(one_row);
  CHECK(c.data(0, 0) == doctest::Approx(0.6));
  CHECK(c.data(0, 1) == doctest::Approx(0.8));
  CHECK(c.normalized);

  CHECK(row_normalize(Matrix::Identity(3, 3)).data == Matrix::Identity(3, 3));
  CHECK_THROWS_AS(row_normalize(Matrix::Zero(2, 2)), ZeroMatrix);

  Rng rng = make_rng(123);
  const Matrix x = test::random_matrix(7, 3, rng, 4.0);
  CovariateMatrix normed = row_normalize(x);
  CHECK(normed.data.rowwise().norm().maxCoeff() == doctest::Approx(1.0));
  CHECK((leverage_scores(x).scores - leverage_scores(normed).scores)
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  // Idempotent.
  CHECK((row_normalize(normed.data).data - normed.data).cwiseAbs().maxCoeff() < 1e-14);
}
