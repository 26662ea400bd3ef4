#pragma once

#include "bootagg/errors.hpp"

namespace bootagg {

/// Shape parameters of a Beta distribution. Both must be strictly positive.
struct BetaParams {
  double a;
  double b;

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0)) {
      throw DomainError("BetaParams: shapes must be positive, got a=" + std::to_string(a) +
                        " b=" + std::to_string(b));
    }
  }
};

/// Regularized incomplete beta function I_x(a,b), the CDF of Beta(a,b) at x.
///
/// Evaluated with a modified-Lentz continued fraction; for x above the
/// stability split (a+1)/(a+b+2) the reflection I_x(a,b) = 1 - I_{1-x}(b,a)
/// is applied. The Beta-function prefactor is computed in log space, so
/// large shapes (a in the thousands) do not overflow.
double reg_inc_beta(double x, const BetaParams& params);

/// Density of Beta(a,b) at x, prefactor in log space. Used by the quantile
/// Newton steps; exposed for reuse.
double beta_density(double x, const BetaParams& params);

/// Quantile of Beta(a,b): the x with reg_inc_beta(x) = p, found by bracketed
/// bisection refined with Newton steps. Throws ConvergenceError if the
/// iteration cap (200) is exhausted.
double beta_quantile(double p, const BetaParams& params);

}  // namespace bootagg
