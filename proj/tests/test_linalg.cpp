#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "accmd/linalg.hpp"
#include "accmd/rng.hpp"
#include "oracles.hpp"

using namespace accmd;

TEST_CASE("vector kernels", "[linalg]") {
  const Vector a{1.0, -2.0, 3.0};
  const Vector b{0.5, 4.0, -1.0};

  CHECK(dot(a, b) == Catch::Approx(1.0 * 0.5 - 2.0 * 4.0 - 3.0));
  CHECK(norm_l1(a) == 6.0);
  CHECK(norm_linf(a) == 3.0);
  CHECK(norm_l2(Vector{3.0, 4.0}) == Catch::Approx(5.0));
  CHECK(norm_l4(Vector{1.0, 1.0, 1.0, 1.0}) ==
        Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));

  Vector y = b;
  axpy(2.0, a, y);
  CHECK(y[0] == 2.5);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == 5.0);

  CHECK_THROWS_AS(dot(a, Vector{1.0}), usage_error);
  CHECK_THROWS_AS(add(a, Vector{1.0, 2.0}), usage_error);
}

TEST_CASE("matvec is linear", "[linalg]") {
  Rng rng(101);
  DenseMatrix m(8, 5);
  for (auto& t : m.a) t = rng.gaussian();
  const Vector v = rng.gaussian_vector(5);
  const Vector w = rng.gaussian_vector(5);
  const double av = 0.37;
  const double bw = -1.91;

  Vector combo(5);
  for (std::size_t i = 0; i < 5; ++i) combo[i] = av * v[i] + bw * w[i];
  const Vector lhs = matvec(m, combo);
  Vector rhs = scaled(av, matvec(m, v));
  axpy(bw, matvec(m, w), rhs);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    CHECK(lhs[i] == Catch::Approx(rhs[i]).epsilon(1e-12).margin(1e-12));

  CHECK_THROWS_AS(matvec(m, Vector(4, 1.0)), usage_error);
}

TEST_CASE("transpose and products agree", "[linalg]") {
  Rng rng(7);
  DenseMatrix m(6, 9);
  for (auto& t : m.a) t = rng.gaussian();

  const DenseMatrix g1 = gram_outer(m);
  const DenseMatrix g2 = matmul(m, transpose(m));
  REQUIRE(g1.rows == g2.rows);
  for (std::size_t i = 0; i < g1.a.size(); ++i)
    CHECK(g1.a[i] == Catch::Approx(g2.a[i]).margin(1e-12));

  const Vector v = rng.gaussian_vector(6);
  const Vector t1 = matvec_transposed(m, v);
  const Vector t2 = matvec(transpose(m), v);
  for (std::size_t i = 0; i < t1.size(); ++i)
    CHECK(t1[i] == Catch::Approx(t2[i]).margin(1e-13));
}

TEST_CASE("power method on known spectra", "[linalg]") {
  const DiagonalMatrix d{{1.0, 2.0, 3.0}};
  auto apply = [&](const Vector& v) { return matvec(d, v); };
  const PowerResult r = power_method(apply, 3, 1e-12, 20000, 5);
  CHECK(r.converged);
  CHECK(r.value == Catch::Approx(3.0).epsilon(1e-8));

  auto ident = [](const Vector& v) { return v; };
  const PowerResult ri = power_method(ident, 5, 1e-12, 1000, 5);
  CHECK(ri.converged);
  CHECK(ri.value == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power method matches dense eigensolver on a Gram operator",
          "[linalg]") {
  Rng rng(42);
  DenseMatrix a(10, 20);
  for (auto& t : a.a) t = rng.gaussian();

  // Normalized Gram operator D^{-1/2} A^T A D^{-1/2}, D = diag(A^T A).
  const DenseMatrix ata = matmul(transpose(a), a);
  Vector dinv_sqrt(20);
  for (std::size_t i = 0; i < 20; ++i)
    dinv_sqrt[i] = 1.0 / std::sqrt(ata(i, i));
  DenseMatrix s(20, 20);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j)
      s(i, j) = dinv_sqrt[i] * ata(i, j) * dinv_sqrt[j];

  auto apply = [&](const Vector& v) { return matvec(s, v); };
  const PowerResult r = power_method(apply, 20, 1e-12, 50000, 3);
  const double truth = oracle::jacobi_max_eigenvalue(s);
  CHECK(r.converged);
  CHECK(std::fabs(r.value - truth) <= 1e-6 * truth);

  // Rayleigh-quotient consistency of the returned pair.
  const Vector av = apply(r.eigenvector);
  const double rayleigh =
      dot(r.eigenvector, av) / dot(r.eigenvector, r.eigenvector);
  CHECK(std::fabs(r.value - rayleigh) <= 1e-10 * std::max(1.0, rayleigh));
}

TEST_CASE("cholesky factors and solves", "[linalg]") {
  Rng rng(9);
  DenseMatrix m(6, 8);
  for (auto& t : m.a) t = rng.gaussian();
  DenseMatrix spd = gram_outer(m);
  for (std::size_t i = 0; i < 6; ++i) spd(i, i) += 1.0;

  const auto l = cholesky(spd);
  REQUIRE(l.has_value());
  const DenseMatrix rebuilt = matmul(*l, transpose(*l));
  for (std::size_t i = 0; i < spd.a.size(); ++i)
    CHECK(rebuilt.a[i] == Catch::Approx(spd.a[i]).margin(1e-10));

  const Vector x = rng.gaussian_vector(6);
  const Vector b = matvec(spd, x);
  const Vector solved = cholesky_solve(*l, b);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(solved[i] == Catch::Approx(x[i]).margin(1e-10));

  DenseMatrix indef = DenseMatrix::identity(2);
  indef(1, 1) = -1.0;
  CHECK_FALSE(cholesky(indef).has_value());
}

TEST_CASE("inverse power iteration finds the smallest eigenvalue",
          "[linalg]") {
  DenseMatrix d3(3, 3);
  d3(0, 0) = 0.5;
  d3(1, 1) = 2.0;
  d3(2, 2) = 3.0;
  const PowerResult r = inverse_power_method(d3, 1e-12, 10000, 1);
  CHECK(r.value == Catch::Approx(0.5).epsilon(1e-6));

  Rng rng(31);
  DenseMatrix m(5, 7);
  for (auto& t : m.a) t = rng.gaussian();
  DenseMatrix spd = gram_outer(m);
  for (std::size_t i = 0; i < 5; ++i) spd(i, i) += 0.3;
  const PowerResult rs = inverse_power_method(spd, 1e-12, 20000, 2);
  const double truth = oracle::jacobi_min_eigenvalue(spd);
  CHECK(std::fabs(rs.value - truth) <= 1e-6 * std::max(1.0, truth));

  DenseMatrix indef = DenseMatrix::identity(2);
  indef(1, 1) = -1.0;
  CHECK_THROWS_AS(inverse_power_method(indef, 1e-10, 100, 0), config_error);
}

TEST_CASE("rng streams are deterministic and named draws reproduce",
          "[linalg]") {
  Rng a(1234);
  Rng b(1234);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

  Rng g1(derive_seed(7, 3));
  Rng g2(derive_seed(7, 3));
  const Vector v1 = g1.gaussian_vector(16);
  const Vector v2 = g2.gaussian_vector(16);
  for (std::size_t i = 0; i < 16; ++i) CHECK(v1[i] == v2[i]);
  CHECK(derive_seed(7, 3) != derive_seed(7, 4));

  Rng u(99);
  for (int i = 0; i < 1000; ++i) {
    const double t = u.uniform();
    CHECK(t >= 0.0);
    CHECK(t < 1.0);
  }
}
