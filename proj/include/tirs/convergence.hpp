#pragma once

// Vanishing-epsilon study: weighted sup-distance between the eps-equilibrium
// tables and the limit tables along a decreasing grid of epsilons.

#include "tirs/equilibrium.hpp"
#include "tirs/model.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace tirs {

/// sup_x |h1(x) - h2(x)| / V(x)
template <class D1, class D2, class DV>
double w_metric(const Eigen::MatrixBase<D1>& h1, const Eigen::MatrixBase<D2>& h2, const Eigen::MatrixBase<DV>& lyapunov) {
  eigen_assert(h1.size() == h2.size() && h1.size() == lyapunov.size());
  if (h1.size() == 0) return 0.0;
  return ((h1 - h2).array().abs() / lyapunov.array()).maxCoeff();
}

/// eps_k = eps_max * 2^-k, k = 0..points-1
std::vector<double> geometric_grid(double eps_max, int points);

/// Largest eps in {1, 1/2, 1/4, ...} at which every kernel row assembles.
/// Throws KernelError if none does down to 2^-60.
double kernel_validity_threshold(const ModelSpec& model);

/// Geometric grid from the validity threshold; for tabulated kernels without
/// an eps-independent row, the tabulated eps values in decreasing order.
std::vector<double> default_grid(const ModelSpec& model, int points = 12);

/// True when the trailing 3-point moving minimum of `seq` never increases
/// after the first third of the sequence. Sequences shorter than 3 pass.
bool eventually_nonincreasing(std::span<const double> seq);

struct SweepPoint {
  double eps = 0.0;
  Eigen::MatrixXd distance;  // (tau-1, t-1), t = 1..T
  double policy_agreement = 0.0;
  int tie_count = 0;
};

struct SweepOptions {
  double tie_tol = kTieTolerance;
  int threads = 1;
  double tolerance = -1.0;  // < 0: take the model's declared sweep tolerance
};

struct SweepResult {
  int horizon = 0;
  double tolerance = 0.0;
  std::vector<SweepPoint> points;
  int limit_tie_count = 0;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> monotone;  // per (tau, t)
  Eigen::MatrixXd final_distance;

  bool limit_all_singleton() const { return limit_tie_count == 0; }
  bool distances_converged() const;
  /// Only required when the limit problem has no ties.
  bool policy_converged() const;
  bool passed() const { return distances_converged() && policy_converged(); }

  /// distance(tau, t) along the grid
  std::vector<double> series(int tau, int t) const;
};

SweepResult sweep(const ModelSpec& model, const std::vector<double>& grid, const SweepOptions& options = {});

/// max over (t, x, u) of |Lambda^eps(x,u;h) - Lambda(x,u;h)| for each grid eps.
std::vector<double> operator_limit_discrepancy(const ModelSpec& model, const std::vector<double>& grid,
                                               const Vector& h);

}  // namespace tirs
