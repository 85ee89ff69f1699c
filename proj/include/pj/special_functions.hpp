#ifndef PJ_SPECIAL_FUNCTIONS_HPP
#define PJ_SPECIAL_FUNCTIONS_HPP

// Gamma-function and real Gauss hypergeometric engine.  2F1 is evaluated
// for arguments z <= 1 by switching between the defining series, the
// Pfaff transformation, a 1-z connection formula near z = 1, and the
// z < -1 analytic continuation in terms of 1/z.  All routines are pure
// functions and safe to call concurrently.

namespace pj::sf {

struct Hyp2F1Params {
  double a;
  double b;
  double c;
  double z;  // argument, z <= 1
};

// Natural log of Gamma(x) for x > 0.  Relative error below 1e-12.
// Throws std::domain_error for x <= 0.
double log_gamma(double x);

// log|Gamma(x)| and the sign of Gamma(x) for real non-pole x;
// returns sign 0 at poles (x a non-positive integer).
struct LogGammaSigned {
  double log_abs;
  int sign;
};
LogGammaSigned log_gamma_signed(double x);

// Gauss hypergeometric function 2F1[a,b;c;z] for real parameters and
// real z <= 1.  Preconditions:
//   - c is not zero or a negative integer,
//   - z < -1 requires a-b not an integer (continuation hypothesis),
//   - z in [1/2,1) requires c-a-b not an integer,
//   - z = 1 requires c-a-b > 0.
// Violations and divergent parameter combinations throw
// std::domain_error; failure of the series to converge within 10000
// terms throws std::runtime_error.
double hyp2f1(const Hyp2F1Params& p);
double hyp2f1(double a, double b, double c, double z);

// Antiderivative, in beta, of (eps + C0*(beta-beta0)^2)^(-b), normalized
// to vanish at beta0:
//   eps^(-b) * (beta-beta0) * 2F1[1/2, b; 3/2; -C0*(beta-beta0)^2/eps].
// Hypotheses: b in (-inf,2) excluding 1/2, C0 > 0, eps >= C0,
// |beta-beta0| <= 1.  Violations throw std::domain_error.
double lemma_primitive(double b, double C0, double eps, double beta,
                       double beta0);

// Internal variant without the eps >= C0 / |beta-beta0| <= 1 box: valid
// whenever the hypergeometric argument -C0*w^2/eps is handled by the
// evaluation plan (always true for |arg| <= 1; for larger |arg| it
// requires b - 1/2 not an integer).  Used by the singular quadrature.
double power_quadratic_antiderivative(double b, double C0, double eps,
                                      double w);

}  // namespace pj::sf

#endif
