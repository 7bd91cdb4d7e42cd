#include "support/random_models.hpp"
#include "tirs/convergence.hpp"
#include "tirs/examples.hpp"
#include "tirs/operators.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tirs;

TEST_CASE("example 1 rate at (z, x, u) = (3, 1, 1) is 1") {
  const ModelSpec m = build_named_example("example1");
  const Index x = m.states.index_of(1);
  const Index u = m.action_index(x, "1");
  CHECK(rate_at(m, 1, x, u)(m.states.index_of(3)) == 1.0);
  CHECK(rate_at(m, 1, x, u)(m.states.index_of(2)) == 0.0);
}

TEST_CASE("example 1 limit operator equals a direct scan of the folded walk") {
  Example1Config cfg;
  cfg.window = 5;
  const ModelSpec m = build_example1(cfg);
  std::mt19937_64 rng(23);
  const long W = cfg.window;
  for (int k = 0; k < 50; ++k) {
    const Vector h = testing::random_vector(rng, m.num_states(), 10.0);
    for (Index x = 0; x < m.num_states(); ++x) {
      const long xl = m.states.labels[static_cast<std::size_t>(x)];
      for (Index u = 0; u < 2; ++u) {
        const long ul = u == 0 ? -1 : 1;
        const long target = xl + ul;
        // any integer landing point y folds to clamp(y)
        double folded = -kInf;
        for (long y = -4 * W; y <= 4 * W; ++y) {
          const long z = std::clamp(y, -W, W);
          const double d = static_cast<double>(y - target);
          folded = std::max(folded, h(m.states.index_of(z)) - d * d);
        }
        CHECK(lambda_limit(m, 1, x, u, h) == folded);
        if (std::abs(target) <= W) {
          // drift target inside the window: plain scan over the window
          double direct = -kInf;
          for (long z = -W; z <= W; ++z) {
            const double d = static_cast<double>(z - target);
            direct = std::max(direct, h(m.states.index_of(z)) - d * d);
          }
          CHECK(lambda_limit(m, 1, x, u, h) == direct);
        }
      }
    }
  }
}

TEST_CASE("example 1 drift target carries zero rate") {
  const ModelSpec m = build_named_example("example1");
  for (Index x = 0; x < m.num_states(); ++x) {
    for (Index u = 0; u < 2; ++u) {
      const long target = std::clamp(m.states.labels[static_cast<std::size_t>(x)] + (u == 0 ? -1L : 1L), -5L, 5L);
      CHECK(rate_at(m, 1, x, u)(m.states.index_of(target)) == 0.0);
    }
  }
}

TEST_CASE("example 1 lyapunov weight is x^2 + 1") {
  const ModelSpec m = build_named_example("example1");
  for (Index x = 0; x < m.num_states(); ++x) {
    const double l = static_cast<double>(m.states.labels[static_cast<std::size_t>(x)]);
    CHECK(m.states.lyapunov(x) == l * l + 1.0);
  }
}

TEST_CASE("example 1 with a large kappa fails to build") {
  Example1Config cfg;
  cfg.kappa = 5.0;
  CHECK_THROWS_AS(build_example1(cfg), ModelError);
}

TEST_CASE("example 2 limit operator equals the closed form") {
  const ModelSpec m = build_named_example("example2");
  Example2Config cfg;
  std::mt19937_64 rng(29);
  for (int k = 0; k < 100; ++k) {
    const Vector h = testing::random_vector(rng, 3, 5.0);
    for (Index x = 0; x < 3; ++x) {
      for (Index u = 0; u < 2; ++u) {
        const double lambda = cfg.lambda_rates[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)];
        CHECK(lambda_limit(m, 1, x, u, h) == std::max({h(0), h(1), h(2) - lambda}));
      }
    }
  }
}

TEST_CASE("example 2 with zero rates has an action-independent limit operator") {
  Example2Config cfg;
  for (auto& row : cfg.lambda_rates) row = {0.0, 0.0};
  cfg.eps_max = 0.0;
  const ModelSpec m = build_example2(cfg);
  Vector h(3);
  h << 0.5, -1.0, 2.0;
  for (Index x = 0; x < 3; ++x) {
    CHECK(lambda_limit(m, 1, x, 0, h) == 2.0);
    CHECK(lambda_limit(m, 1, x, 1, h) == 2.0);
  }
  CHECK_THROWS_AS(kernel_at(m, 0.1, 1, 0, 0), KernelError);
}

TEST_CASE("example 2 crisis row sums to one") {
  const ModelSpec m = build_named_example("example2");
  for (double eps : geometric_grid(0.5, 12)) {
    const Vector q = kernel_at(m, eps, 1, 2, 0);
    const double e = std::exp(-1.0 / eps);
    CHECK(q(0) == doctest::Approx(1.0 - 0.3 - e).epsilon(1e-14));
    CHECK(q(1) == doctest::Approx(0.3 - e).epsilon(1e-14));
    CHECK(q(2) == doctest::Approx(2.0 * e).epsilon(1e-14));
    CHECK(std::abs(q.sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("example 2 rejects invalid probabilities and an eps_max above its threshold") {
  Example2Config cfg;
  cfg.p[0][0] = 1.2;
  CHECK_THROWS_AS(build_example2(cfg), ModelError);
  Example2Config wide;
  wide.eps_max = 1.0;
  CHECK_THROWS_AS(build_example2(wide), ModelError);
}

TEST_CASE("discounted costs") {
  std::vector<Vector> base(2, Vector::Ones(3));
  const CostTables c = build_discounted_costs(base, Vector::Ones(2), 0.5);
  // running[(tau-1) * T + (t-1)]
  CHECK(c.running[1](0) == 0.5);  // f_{1,2}
  CHECK(c.running[0](0) == 1.0);  // tau = t
  CHECK(c.running[3](0) == 1.0);
  CHECK(c.terminal[0](0) == 0.25);
  CHECK(c.terminal[1](0) == 0.5);
  CHECK_THROWS(build_discounted_costs(base, Vector::Ones(2), 1.0));
  CHECK_THROWS(build_discounted_costs(base, Vector::Ones(2), 0.0));
  CHECK_NOTHROW(build_discounted_costs(base, Vector::Ones(2), 1.0 - 1e-12));
}

TEST_CASE("discounted cost ratios across anchors are powers of lambda") {
  const ModelSpec m = build_named_example("example1-small");
  const int T = m.horizon;
  for (int t = 1; t <= T; ++t) {
    for (int tau = 1; tau <= t; ++tau) {
      for (int tau2 = 1; tau2 <= t; ++tau2) {
        for (Index x = 0; x < m.num_states(); ++x) {
          const double a = m.running_cost(tau, t, x, 0);
          const double b = m.running_cost(tau2, t, x, 0);
          if (b != 0.0) CHECK(a / b == doctest::Approx(std::pow(0.5, tau2 - tau)).epsilon(1e-15));
        }
      }
    }
  }
}

TEST_CASE("every built-in example builds and validates on its default grid") {
  for (const auto& name : example_names()) {
    const ModelSpec m = build_named_example(name);
    CHECK(m.name == name);
    CHECK(validate_assumptions(m, default_grid(m)).passed());
  }
  CHECK_THROWS_AS(build_named_example("nope"), ModelError);
}
