#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "accmd/mirror.hpp"
#include "accmd/rng.hpp"
#include "oracles.hpp"

using namespace accmd;

namespace {

Vector sample_simplex(Rng& rng, std::size_t n) {
  return stable_softmax(rng.gaussian_vector(n));
}

Vector sample_orthant(Rng& rng, std::size_t n) {
  Vector x = rng.gaussian_vector(n);
  for (auto& t : x) t = std::exp(0.7 * t);
  return x;
}

Vector sample_point(const MirrorFunction& phi, Rng& rng, std::size_t n) {
  switch (phi.domain()) {
    case Domain::simplex:
      return sample_simplex(rng, n);
    case Domain::positive_orthant:
      return sample_orthant(rng, n);
    case Domain::full_space:
      break;
  }
  return rng.gaussian_vector(n);
}

QuadraticMirror identity_quadratic(std::size_t n) {
  return QuadraticMirror(DiagonalMatrix{Vector(n, 1.0)});
}

}  // namespace

TEST_CASE("bregman values on pinned inputs", "[mirror]") {
  const auto quad = identity_quadratic(2);
  CHECK(quad.bregman({1.0, 0.0}, {0.0, 0.0}) == Catch::Approx(0.5));
  CHECK(quad.bregman({0.3, -0.7}, {0.3, -0.7}) == 0.0);

  const EntropyMirror ent(2, EntropyMirror::Mode::simplex_restricted);
  const double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  CHECK(ent.bregman({0.5, 0.5}, {0.25, 0.75}) ==
        Catch::Approx(expected).epsilon(1e-12));

  const QuarticMirror quartic(3);
  Rng rng(11);
  const Vector x = rng.gaussian_vector(3);
  CHECK(quartic.bregman(x, x) == 0.0);
}

TEST_CASE("bregman is strictly positive off the diagonal", "[mirror]") {
  const auto quad = identity_quadratic(4);
  const EntropyMirror ent(4, EntropyMirror::Mode::positive_orthant);
  const QuarticMirror quartic(4);
  Rng rng(21);
  for (int s = 0; s < 200; ++s) {
    const Vector x = sample_orthant(rng, 4);
    const Vector y = sample_orthant(rng, 4);
    CHECK(quad.bregman(x, y) > 0.0);
    CHECK(ent.bregman(x, y) > 0.0);
    CHECK(quartic.bregman(x, y) > 0.0);
  }
}

TEST_CASE("entropy rejects points outside the domain", "[mirror]") {
  const EntropyMirror ent(2, EntropyMirror::Mode::positive_orthant);
  CHECK_THROWS_AS(ent.grad({0.0, 1.0}), domain_error);
  CHECK_THROWS_AS(ent.value({-0.1, 1.0}), domain_error);
  CHECK_THROWS_AS(ent.bregman({-0.5, 1.0}, {1.0, 1.0}), domain_error);
  // value() extends continuously to the boundary.
  CHECK(ent.value({0.0, 1.0}) == 0.0);
}

TEST_CASE("quartic inverse map", "[mirror]") {
  const QuarticMirror quartic(3);

  // chi = 2 e1: the radial cubic r^3 + r = 2 has root r = 1.
  Vector x = quartic.grad_conjugate({2.0, 0.0, 0.0});
  CHECK(x[0] == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(x[1] == 0.0);

  // chi = 10 e1: r^3 + r = 10 has root r = 2.
  x = quartic.grad_conjugate({10.0, 0.0, 0.0});
  CHECK(x[0] == Catch::Approx(2.0).epsilon(1e-12));

  Rng rng(33);
  double worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const Vector p = rng.gaussian_vector(3);
    const Vector back = quartic.grad_conjugate(quartic.grad(p));
    worst = std::max(worst, norm_l2(sub(back, p)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("mirror maps invert on the domain interior", "[mirror]") {
  Rng rng(55);
  const auto quad = identity_quadratic(6);
  const EntropyMirror ent(6, EntropyMirror::Mode::positive_orthant);
  const QuarticMirror quartic(6);
  for (const MirrorFunction* phi :
       {static_cast<const MirrorFunction*>(&quad),
        static_cast<const MirrorFunction*>(&ent),
        static_cast<const MirrorFunction*>(&quartic)}) {
    for (int s = 0; s < 200; ++s) {
      const Vector p = sample_point(*phi, rng, 6);
      const Vector back = phi->grad_conjugate(phi->grad(p));
      REQUIRE(norm_l2(sub(back, p)) <= 1e-10 * std::max(1.0, norm_l2(p)));
    }
  }
}

TEST_CASE("mirror_prox closed forms", "[mirror]") {
  const auto quad = identity_quadratic(2);
  const Vector h{2.0, 4.0};

  Vector y = mirror_prox(quad, 0.0, h);
  CHECK(y[0] == 2.0);
  CHECK(y[1] == 4.0);

  y = mirror_prox(quad, 1.0, h);
  CHECK(y[0] == Catch::Approx(1.0));
  CHECK(y[1] == Catch::Approx(2.0));

  const EntropyMirror ent(3, EntropyMirror::Mode::positive_orthant);
  Rng rng(3);
  const Vector z = sample_orthant(rng, 3);
  const double alpha = 0.4;
  const Vector yz = mirror_prox(ent, alpha, scaled(1.0 + alpha, ent.grad(z)));
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(yz[i] == Catch::Approx(z[i]).epsilon(1e-12));

  CHECK_THROWS_AS(mirror_prox(quad, -1.0, h), config_error);
}

TEST_CASE("composite_prox closed forms and guards", "[mirror]") {
  const auto quad = identity_quadratic(1);

  // Soft threshold: zero input stays zero.
  Vector y = composite_prox(quad, 0.0, 1.0, {0.0}, NonsmoothTerm::l1(2.0));
  CHECK(y[0] == 0.0);

  // h = 5, beta*lambda = 2, D = 1, alpha = 1: (5 - 2) / 2.
  y = composite_prox(quad, 1.0, 1.0, {5.0}, NonsmoothTerm::l1(2.0));
  CHECK(y[0] == Catch::Approx(1.5));

  const EntropyMirror ent(3, EntropyMirror::Mode::simplex_restricted);
  y = composite_prox(ent, 0.7, 1.0, {4.2, 4.2, 4.2}, NonsmoothTerm::simplex());
  for (double t : y) CHECK(t == Catch::Approx(1.0 / 3.0).epsilon(1e-14));

  // Unsupported pairs are configuration errors.
  const QuarticMirror quartic(2);
  CHECK_THROWS_AS(
      composite_prox(quartic, 0.0, 1.0, {1.0, 1.0}, NonsmoothTerm::l1(1.0)),
      config_error);
  CHECK_THROWS_AS(
      composite_prox(quad, 0.0, 1.0, {1.0}, NonsmoothTerm::simplex()),
      config_error);
  CHECK_THROWS_AS(NonsmoothTerm::l1(0.0), config_error);
}

TEST_CASE("composite_prox matches the iterative subproblem oracle",
          "[mirror]") {
  Rng rng(77);
  const std::size_t n = 20;

  Vector diag(n);
  for (auto& t : diag) t = 0.5 + rng.uniform() * 3.0;
  const QuadraticMirror quad{DiagonalMatrix{diag}};
  const EntropyMirror ent_simplex(n, EntropyMirror::Mode::simplex_restricted);
  const EntropyMirror ent_orthant(n, EntropyMirror::Mode::positive_orthant);
  const QuarticMirror quartic(n);

  struct Case {
    const MirrorFunction* phi;
    NonsmoothTerm g;
  };
  const Case cases[] = {
      {&quad, NonsmoothTerm::l1(0.35)},
      {&ent_simplex, NonsmoothTerm::simplex()},
      {&quad, NonsmoothTerm::zero()},
      {&ent_orthant, NonsmoothTerm::zero()},
      {&quartic, NonsmoothTerm::zero()},
  };
  for (const auto& c : cases) {
    for (int s = 0; s < 20; ++s) {
      const double alpha = rng.uniform() * 2.0;
      const double beta = 0.1 + rng.uniform();
      const Vector h = rng.gaussian_vector(n);
      const Vector lib = composite_prox(*c.phi, alpha, beta, h, c.g);
      const Vector ref =
          oracle::prox_subproblem_oracle(*c.phi, alpha, beta, h, c.g);
      REQUIRE(norm_linf(sub(lib, ref)) <= 1e-8);
    }
  }
}

TEST_CASE("composite_prox satisfies the subgradient inclusion", "[mirror]") {
  Rng rng(78);
  const std::size_t n = 12;
  Vector diag(n);
  for (auto& t : diag) t = 0.5 + rng.uniform() * 2.0;
  const QuadraticMirror quad{DiagonalMatrix{diag}};

  for (int s = 0; s < 50; ++s) {
    const double alpha = rng.uniform();
    const double beta = 0.2 + rng.uniform();
    const double lambda = 0.4;
    const Vector h = rng.gaussian_vector(n);
    const Vector y =
        composite_prox(quad, alpha, beta, h, NonsmoothTerm::l1(lambda));
    for (std::size_t i = 0; i < n; ++i) {
      const double smooth = (1.0 + alpha) * diag[i] * y[i] - h[i];
      if (y[i] != 0.0) {
        // 0 = (1+a) D y + beta*lambda*sign(y) - h exactly at the kink-free
        // coordinates.
        CHECK(std::fabs(smooth + beta * lambda * std::copysign(1.0, y[i])) <=
              1e-9);
      } else {
        // Zero is optimal iff h lands inside the subgradient interval.
        CHECK(std::fabs(h[i]) <= beta * lambda + 1e-9);
      }
    }
  }

  const EntropyMirror ent(n, EntropyMirror::Mode::simplex_restricted);
  for (int s = 0; s < 50; ++s) {
    const double alpha = rng.uniform();
    const Vector h = rng.gaussian_vector(n);
    const Vector y =
        composite_prox(ent, alpha, 1.0, h, NonsmoothTerm::simplex());
    double sum = 0.0;
    for (double t : y) {
      CHECK(t > 0.0);
      sum += t;
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-12);
    // Stationarity with the simplex multiplier: (1+a)(log y_i + 1) - h_i is
    // the same constant across coordinates.
    const double nu = (1.0 + alpha) * (std::log(y[0]) + 1.0) - h[0];
    for (std::size_t i = 1; i < n; ++i)
      CHECK(std::fabs((1.0 + alpha) * (std::log(y[i]) + 1.0) - h[i] - nu) <=
            1e-9);
  }
}

TEST_CASE("conjugate divergences mirror primal ones", "[mirror]") {
  Rng rng(91);
  const std::size_t n = 8;
  Vector diag(n);
  for (auto& t : diag) t = 0.5 + rng.uniform() * 2.0;
  const QuadraticMirror quad{DiagonalMatrix{diag}};
  const EntropyMirror ent(n, EntropyMirror::Mode::positive_orthant);
  const QuarticMirror quartic(n);

  for (const MirrorFunction* phi :
       {static_cast<const MirrorFunction*>(&quad),
        static_cast<const MirrorFunction*>(&ent),
        static_cast<const MirrorFunction*>(&quartic)}) {
    double worst = 0.0;
    for (int s = 0; s < 1000; ++s) {
      const Vector x = sample_point(*phi, rng, n);
      const Vector y = sample_point(*phi, rng, n);
      // D_phi(x, y) = D_{phi*}(grad phi(y), grad phi(x)).
      const double primal = phi->bregman(x, y);
      const double dual = phi->bregman_conjugate(phi->grad(y), phi->grad(x));
      worst = std::max(worst, std::fabs(primal - dual) /
                                  std::max({1.0, primal, dual}));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("three-point identity on seeded triples", "[mirror]") {
  Rng rng(92);
  const std::size_t n = 8;
  const auto quad = identity_quadratic(n);
  const EntropyMirror ent(n, EntropyMirror::Mode::simplex_restricted);
  const QuarticMirror quartic(n);

  for (const MirrorFunction* phi :
       {static_cast<const MirrorFunction*>(&quad),
        static_cast<const MirrorFunction*>(&ent),
        static_cast<const MirrorFunction*>(&quartic)}) {
    double worst = 0.0;
    for (int s = 0; s < 1000; ++s) {
      const Vector x = sample_point(*phi, rng, n);
      const Vector y = sample_point(*phi, rng, n);
      const Vector z = sample_point(*phi, rng, n);
      const double lhs = dot(sub(phi->grad(y), phi->grad(x)), sub(y, z));
      const double rhs =
          phi->bregman(y, x) + phi->bregman(z, y) - phi->bregman(z, x);
      worst =
          std::max(worst, std::fabs(lhs - rhs) /
                              std::max({1.0, std::fabs(lhs), std::fabs(rhs)}));
    }
    CHECK(worst <= 1e-10);
  }

  // Degenerate triple: both sides vanish identically.
  const Vector p{0.25, 0.25, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0};
  const Vector q = stable_softmax(Vector(n, 0.0));
  const double lhs = dot(sub(ent.grad(q), ent.grad(q)), sub(q, q));
  CHECK(lhs == 0.0);
  CHECK(ent.bregman(q, q) + ent.bregman(q, q) - ent.bregman(q, q) == 0.0);
}

TEST_CASE("pinsker inequality for the entropy geometry", "[mirror]") {
  Rng rng(93);
  const EntropyMirror ent(10, EntropyMirror::Mode::simplex_restricted);
  for (int s = 0; s < 1000; ++s) {
    const Vector y = sample_simplex(rng, 10);
    const Vector yh = sample_simplex(rng, 10);
    const double l1 = norm_l1(sub(y, yh));
    const double kl = ent.bregman(yh, y);
    CHECK(l1 * l1 <= 2.0 * kl + 1e-12);
  }
}

TEST_CASE("softmax and log-sum-exp are stable", "[mirror]") {
  const Vector z{1000.0, 0.0, -1000.0};
  const Vector y = stable_softmax(z);
  CHECK(std::isfinite(y[0]));
  CHECK(y[0] == Catch::Approx(1.0));
  double sum = 0.0;
  for (double t : y) sum += t;
  CHECK(sum == Catch::Approx(1.0).epsilon(1e-15));

  CHECK(stable_log_sum_exp(z) == Catch::Approx(1000.0));
  const Vector small{0.1, -0.3, 0.2};
  double naive = 0.0;
  for (double t : small) naive += std::exp(t);
  CHECK(stable_log_sum_exp(small) ==
        Catch::Approx(std::log(naive)).epsilon(1e-14));
}

TEST_CASE("quadratic mirror requires an SPD metric", "[mirror]") {
  CHECK_THROWS_AS(QuadraticMirror(DiagonalMatrix{{1.0, 0.0}}), config_error);
  DenseMatrix indef = DenseMatrix::identity(2);
  indef(1, 1) = -2.0;
  CHECK_THROWS_AS(QuadraticMirror(indef), config_error);

  // Dense SPD metric: gradient and inverse agree with the diagonal case on a
  // diagonal matrix.
  DenseMatrix diag2 = DenseMatrix::identity(2);
  diag2(0, 0) = 2.0;
  diag2(1, 1) = 5.0;
  const QuadraticMirror dense(diag2);
  const QuadraticMirror sparse{DiagonalMatrix{{2.0, 5.0}}};
  const Vector chi{1.0, 2.0};
  const Vector xd = dense.grad_conjugate(chi);
  const Vector xs = sparse.grad_conjugate(chi);
  CHECK(xd[0] == Catch::Approx(xs[0]).epsilon(1e-14));
  CHECK(xd[1] == Catch::Approx(xs[1]).epsilon(1e-14));
}
