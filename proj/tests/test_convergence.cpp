#include "support/random_models.hpp"
#include "tirs/convergence.hpp"
#include "tirs/examples.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tirs;

namespace {

/// Same model with the state order reversed.
ModelSpec reverse_states(const ModelSpec& m) {
  const Index n = m.num_states();
  auto flip = [n](Index x) { return n - 1 - x; };
  StateSpace states;
  states.labels.assign(m.states.labels.rbegin(), m.states.labels.rend());
  states.lyapunov = m.states.lyapunov.reverse();
  std::vector<std::vector<Action>> actions(m.actions.rbegin(), m.actions.rend());
  ModelSpec r = make_model_shell(m.horizon, states, actions, m.mode);
  r.tolerances = m.tolerances;
  for (int t = 1; t <= m.horizon; ++t) {
    for (Index x = 0; x < n; ++x) {
      for (Index u = 0; u < m.num_actions(x); ++u) {
        KernelEntry e = m.entry(t, x, u);
        for (auto& term : e.terms) term.z = flip(term.z);
        if (e.remainder >= 0) e.remainder = flip(e.remainder);
        for (auto& row : e.rows) row.q = row.q.reverse().eval();
        if (e.rate.size()) e.rate = e.rate.reverse().eval();
        r.entry(t, flip(x), u) = e;
      }
    }
  }
  for (int tau = 1; tau <= m.horizon; ++tau) {
    for (int t = 1; t <= m.horizon; ++t) {
      Vector& f = r.running[static_cast<std::size_t>((tau - 1) * m.horizon + (t - 1))];
      for (Index x = 0; x < n; ++x) {
        for (Index u = 0; u < m.num_actions(x); ++u) f(r.slot(flip(x), u)) = m.running_cost(tau, t, x, u);
      }
    }
    r.terminal[static_cast<std::size_t>(tau - 1)] = m.terminal_cost(tau).reverse();
  }
  finalize_model(r);
  return r;
}

}  // namespace

TEST_CASE("w metric examples") {
  Vector a(2), b(2), v(2);
  a << 0, 4;
  b << 1, 1;
  v << 1, 2;
  CHECK(w_metric(a, b, v) == 1.5);
  CHECK(w_metric(a, a, v) == 0.0);
  CHECK(w_metric((a.array() + 2.5).matrix(), a, Vector::Ones(2)) == 2.5);
}

TEST_CASE("w metric axioms on random triples") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(0.5, 4.0);
  for (int k = 0; k < 200; ++k) {
    const Index n = 1 + static_cast<Index>(rng() % 6);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = pos(rng);
    const Vector a = testing::random_vector(rng, n), b = testing::random_vector(rng, n), c = testing::random_vector(rng, n);
    CHECK(w_metric(a, b, v) == w_metric(b, a, v));
    CHECK(w_metric(a, b, v) >= 0.0);
    CHECK((w_metric(a, b, v) == 0.0) == (a == b));
    CHECK(w_metric(a, c, v) <= w_metric(a, b, v) + w_metric(b, c, v) + 1e-15);
  }
}

TEST_CASE("geometric grid halves from eps_max") {
  const auto g = geometric_grid(1.0, 12);
  REQUIRE(g.size() == 12);
  CHECK(g.front() == 1.0);
  CHECK(g.back() == std::ldexp(1.0, -11));
  CHECK_THROWS(geometric_grid(0.0, 3));
  CHECK_THROWS(geometric_grid(1.0, 0));
}

TEST_CASE("eventually non-increasing uses a trailing moving minimum after the first third") {
  const std::vector<double> clean{5, 4, 3, 2, 1, 0.5};
  const std::vector<double> early_bump{1, 3, 2, 2.5, 1, 0.8, 0.7, 0.3, 0.2};
  const std::vector<double> late_rise{5, 4, 3, 2, 1, 2, 3, 4, 5};
  const std::vector<double> blip{5, 4, 3, 2, 2.2, 1, 0.5, 0.4, 0.3};
  CHECK(eventually_nonincreasing(clean));
  CHECK(eventually_nonincreasing(early_bump));
  CHECK_FALSE(eventually_nonincreasing(late_rise));
  CHECK(eventually_nonincreasing(blip));
  CHECK(eventually_nonincreasing(std::vector<double>{1.0, 2.0}));
}

TEST_CASE("default grid starts at the kernel validity threshold") {
  CHECK(kernel_validity_threshold(build_named_example("example2")) == 0.5);
  CHECK(default_grid(build_named_example("example2")).front() == 0.5);
  CHECK(default_grid(build_named_example("two-state")).size() == 12);
}

TEST_CASE("fixed-kernel sweep converges and stays monotone") {
  const ModelSpec m = build_named_example("two-state");
  const SweepResult r = sweep(m, geometric_grid(1.0, 11));
  CHECK(r.passed());
  CHECK(r.limit_all_singleton());
  CHECK(r.points.back().policy_agreement == 1.0);
  for (int tau = 1; tau <= m.horizon; ++tau) {
    for (int t = 1; t <= m.horizon; ++t) {
      const auto s = r.series(tau, t);
      for (std::size_t k = 1; k < s.size(); ++k) CHECK(s[k] <= s[k - 1] + 1e-15);
      // anchor-free costs: the distance is the same for every anchor
      CHECK(s == r.series(1, t));
    }
  }
}

TEST_CASE("example 2 sweep at T = 2 meets its tolerance") {
  const ModelSpec m = build_named_example("example2-short");
  const SweepResult r = sweep(m, default_grid(m));
  CHECK(r.distances_converged());
  CHECK(r.policy_converged());
  CHECK(r.final_distance.maxCoeff() < 0.05);
  const SweepResult at = sweep(m, {0.5, 0.1, 0.05, 0.02, 0.01});
  CHECK(at.final_distance.maxCoeff() < 0.05);
}

TEST_CASE("single-state model has zero distance at every eps") {
  StateSpace states{{0}, Vector::Ones(1)};
  std::vector<std::vector<Action>> actions(1, {Action{"a", {}}, Action{"b", {}}});
  ModelSpec m = make_model_shell(2, states, actions, KernelMode::Tabulated);
  for (int t = 1; t <= 2; ++t) {
    for (Index u = 0; u < 2; ++u) m.entry(t, 0, u).rows.push_back({std::nullopt, Vector::Ones(1)});
  }
  for (auto& f : m.running) f << 1.0, 2.0;
  for (auto& g : m.terminal) g << 3.0;
  finalize_model(m);
  const SweepResult r = sweep(m, geometric_grid(1.0, 6));
  for (const auto& p : r.points) CHECK(p.distance.maxCoeff() == 0.0);
  CHECK(r.passed());
}

TEST_CASE("sweep distances do not depend on the state order") {
  for (std::uint64_t seed = 3; seed <= 5; ++seed) {
    const ModelSpec m = testing::random_model(seed);
    const ModelSpec r = reverse_states(m);
    const auto grid = geometric_grid(1.0, 8);
    const SweepResult a = sweep(m, grid);
    const SweepResult b = sweep(r, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK((a.points[k].distance - b.points[k].distance).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("anchor-free costs give identical distances across anchors") {
  const ModelSpec m = testing::random_model(12, {4, 3, 3, KernelMode::RateParameterized, false});
  const SweepResult r = sweep(m, geometric_grid(1.0, 8));
  for (const auto& p : r.points) {
    for (int tau = 1; tau < m.horizon; ++tau) CHECK(p.distance.row(tau) == p.distance.row(0));
  }
}

TEST_CASE("sweep rejects bad grids and invalid kernels") {
  const ModelSpec m = build_named_example("example2-short");
  CHECK_THROWS_AS(sweep(m, {}), ModelError);
  CHECK_THROWS_AS(sweep(m, {0.1, 0.2}), ModelError);
  CHECK_THROWS_AS(sweep(m, {0.1, -0.1}), ModelError);
  CHECK_THROWS_AS(sweep(m, geometric_grid(1.0, 4)), KernelError);
}

TEST_CASE("operator limit discrepancy decreases for example 2") {
  const ModelSpec m = build_named_example("example2");
  Vector h(3);
  h << 0.0, 1.0, 3.0;
  const auto d = operator_limit_discrepancy(m, geometric_grid(0.5, 12), h);
  CHECK(eventually_nonincreasing(d));
  CHECK(d.back() < 0.05);
}
