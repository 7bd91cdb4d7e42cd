#pragma once

// Risk-sensitive one-step operators. The eps-form is a log-sum-exp
// certainty equivalent under q^eps; the limit form is the max-plus
// expectation sup_z [h(z) - I(z)].

#include "tirs/model.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tirs {

/// Either a positive epsilon or the eps -> 0 limit.
class Regime {
 public:
  static Regime at(double eps);
  static Regime limit() { return Regime{}; }

  bool is_limit() const { return eps_ <= 0.0; }
  /// Only meaningful when !is_limit().
  double eps() const { return eps_; }
  std::string describe() const;

  friend bool operator==(const Regime&, const Regime&) = default;

 private:
  double eps_ = 0.0;
};

/// eps * log sum_z exp((h(z) + eps * log_q(z)) / eps), shifted by the
/// largest exponent. Entries with log_q(z) == -inf are dropped.
template <class DerivedLogQ, class DerivedH>
typename DerivedH::Scalar risk_expectation_log(typename DerivedH::Scalar eps, const Eigen::MatrixBase<DerivedLogQ>& log_q,
                                               const Eigen::MatrixBase<DerivedH>& h) {
  using Scalar = typename DerivedH::Scalar;
  using std::exp;
  using std::log;
  eigen_assert(log_q.size() == h.size());
  Scalar shift = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index z = 0; z < log_q.size(); ++z) {
    if (std::isfinite(log_q(z))) shift = std::max<Scalar>(shift, h(z) + eps * Scalar(log_q(z)));
  }
  Scalar sum = 0;
  for (Eigen::Index z = 0; z < log_q.size(); ++z) {
    if (std::isfinite(log_q(z))) sum += exp((h(z) + eps * Scalar(log_q(z)) - shift) / eps);
  }
  return shift + eps * log(sum);
}

/// eps * log sum_z q(z) exp(h(z) / eps) for a probability row q.
template <class DerivedQ, class DerivedH>
typename DerivedH::Scalar risk_expectation(typename DerivedH::Scalar eps, const Eigen::MatrixBase<DerivedQ>& q,
                                           const Eigen::MatrixBase<DerivedH>& h) {
  return risk_expectation_log(eps, q.array().log().matrix(), h);
}

/// max_z [h(z) - rate(z)] over states with finite rate. Returns -inf when
/// every rate is infinite; callers decide whether that is an error.
template <class DerivedR, class DerivedH>
typename DerivedH::Scalar maxplus_expectation(const Eigen::MatrixBase<DerivedR>& rate,
                                              const Eigen::MatrixBase<DerivedH>& h) {
  using Scalar = typename DerivedH::Scalar;
  eigen_assert(rate.size() == h.size());
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index z = 0; z < rate.size(); ++z) {
    if (std::isinf(rate(z))) continue;
    best = std::max<Scalar>(best, h(z) - rate(z));
  }
  return best;
}

/// Value of the Gibbs-variational right-hand side at its maximizer
/// nu(z) ~ exp(h(z)/eps) q(z):  sum h nu - eps * sum nu log(nu / q),
/// with q given through log_q.
template <class DerivedLogQ, class DerivedH>
typename DerivedH::Scalar gibbs_dual_value_log(typename DerivedH::Scalar eps, const Eigen::MatrixBase<DerivedLogQ>& log_q,
                                               const Eigen::MatrixBase<DerivedH>& h) {
  using Scalar = typename DerivedH::Scalar;
  using std::exp;
  using std::log;
  // log nu(z) = (h(z) + eps log q(z) - shift) / eps - log Z
  Scalar shift = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index z = 0; z < log_q.size(); ++z) {
    if (std::isfinite(log_q(z))) shift = std::max<Scalar>(shift, h(z) + eps * Scalar(log_q(z)));
  }
  Scalar partition = 0;
  for (Eigen::Index z = 0; z < log_q.size(); ++z) {
    if (std::isfinite(log_q(z))) partition += exp((h(z) + eps * Scalar(log_q(z)) - shift) / eps);
  }
  const Scalar log_partition = log(partition);
  Scalar mean = 0;
  Scalar entropy = 0;
  for (Eigen::Index z = 0; z < log_q.size(); ++z) {
    if (!std::isfinite(log_q(z))) continue;
    const Scalar log_nu = (h(z) + eps * Scalar(log_q(z)) - shift) / eps - log_partition;
    const Scalar nu = exp(log_nu);
    if (nu == 0) continue;  // 0 log 0 = 0
    mean += h(z) * nu;
    entropy += nu * (log_nu - Scalar(log_q(z)));
  }
  return mean - eps * entropy;
}

template <class DerivedQ, class DerivedH>
typename DerivedH::Scalar gibbs_dual_value(typename DerivedH::Scalar eps, const Eigen::MatrixBase<DerivedQ>& q,
                                           const Eigen::MatrixBase<DerivedH>& h) {
  return gibbs_dual_value_log(eps, q.array().log().matrix(), h);
}

/// Kernel data for one (t, x, u) under a regime: log-probabilities for
/// eps > 0, the rate row in the limit.
struct StepOperator {
  Regime regime;
  Vector row;

  double apply(const Vector& h) const;
};

StepOperator step_operator(const ModelSpec& model, Regime regime, int t, Index x, Index u);

double lambda_eps(const ModelSpec& model, double eps, int t, Index x, Index u, const Vector& h);
double lambda_limit(const ModelSpec& model, int t, Index x, Index u, const Vector& h);
double lambda(const ModelSpec& model, Regime regime, int t, Index x, Index u, const Vector& h);

double hamiltonian_eps(const ModelSpec& model, double eps, int tau, int t, Index x, Index u, const Vector& h);
double hamiltonian_limit(const ModelSpec& model, int tau, int t, Index x, Index u, const Vector& h);
double hamiltonian(const ModelSpec& model, Regime regime, int tau, int t, Index x, Index u, const Vector& h);

inline constexpr double kTieTolerance = 1e-9;

struct ArgminSet {
  std::vector<Index> minimizers;
  Index chosen = 0;
  double gap = kInf;  // best vs best value outside the tie band; kInf if none
};

/// Minimizers of `values` within tie_tol of the minimum, in index order.
ArgminSet select_argmin(std::span<const double> values, double tie_tol = kTieTolerance);

struct BellmanResult {
  double value = 0.0;
  ArgminSet argmin;
};

/// inf_u [f_{t,t}(x,u) + Lambda_t(x,u;h)] over the finite action grid.
BellmanResult bellman_argmin(const ModelSpec& model, Regime regime, int t, Index x, const Vector& h,
                             double tie_tol = kTieTolerance);

/// |Lambda^eps - Gibbs dual value|. Exact duality makes this round-off.
double varadhan_check(const ModelSpec& model, double eps, int t, Index x, Index u, const Vector& h);

/// One evaluated Hamiltonian, emitted when operator tracing is on.
struct OpTrace {
  Regime regime;
  int tau = 0;
  int t = 0;
  Index x = 0;
  Index u = 0;
  double value = 0.0;
};

using TraceSink = std::function<void(const OpTrace&)>;

}  // namespace tirs
