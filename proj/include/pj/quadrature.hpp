#ifndef PJ_QUADRATURE_HPP
#define PJ_QUADRATURE_HPP

#include <functional>
#include <vector>

// Shared 1-D quadrature kernels used by the solution and regularity
// machinery.  Integrands with integrable endpoint or near-endpoint
// power-law behaviour are handled by dyadic pre-splitting plus a
// double-exponential rule on the panels that touch the singular point.

namespace pj::quad {

using Integrand = std::function<double(double)>;

struct Result {
  double value = 0.0;
  double error = 0.0;   // absolute error estimate
  long evaluations = 0;
  bool converged = true;
};

// 15-point Gauss-Kronrod rule on [a,b]; error estimate from the
// embedded 7-point Gauss rule.
Result gauss_kronrod_15(const Integrand& f, double a, double b);

// Adaptive bisection on gauss_kronrod_15 until the summed error
// estimate meets tol_rel*|I| + tol_abs (or max_depth is exhausted,
// in which case converged=false).
Result integrate_adaptive(const Integrand& f, double a, double b,
                          double tol_rel = 1e-12, double tol_abs = 1e-300,
                          int max_depth = 48);

// tanh-sinh rule on [a,b]; tolerates integrable algebraic endpoint
// singularities.  The integrand is queried at points whose distance
// to the endpoints is computed in exact arithmetic, never below
// ~1e-15*(b-a).
Result integrate_tanh_sinh(const Integrand& f, double a, double b,
                           double tol_rel = 1e-12, int max_level = 12);

// Description of one near-singular location inside the domain:
// the integrand is sharply peaked (or has a derivative singularity)
// at `location`, with resolvable scale `width` (> 0).  `hard` marks
// a genuine endpoint-type singularity at the location itself
// (integrand unbounded or with unbounded derivative arbitrarily
// close), which routes the touching panels to the tanh-sinh rule.
struct SingularPoint {
  double location;
  double width;
  bool hard = false;
};

// Integral of f over [a,b] split at `splits` (ordinary breakpoints)
// with dyadic refinement toward each singular point.  Singular
// points must lie in [a,b]; splits and singular points may coincide.
Result integrate_singular(const Integrand& f, double a, double b,
                          const std::vector<double>& splits,
                          const std::vector<SingularPoint>& singular,
                          double tol_rel = 1e-11, double tol_abs = 1e-300);

// Composite trapezoid with doubling refinement; `periodic` skips the
// duplicated endpoint.  Used as a brute-force reference integrator.
struct TrapezoidResult {
  double value = 0.0;
  double error = 0.0;
  long points = 0;
  bool converged = true;
};
TrapezoidResult trapezoid_refine(const Integrand& f, double a, double b,
                                 double tol_rel, long max_points,
                                 bool periodic = false);

}  // namespace pj::quad

#endif
