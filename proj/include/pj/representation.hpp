#ifndef PJ_REPRESENTATION_HPP
#define PJ_REPRESENTATION_HPP

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "pj/initial_data.hpp"

// Exact solution machinery along characteristics: the jacobian factor
// J(a,eta) = 1 - lambda*eta*u0'(a), the moments Kbar_i, the eta <-> t
// maps, u_x, u_xx, gamma_a, the flow map gamma, the nonlocal term, and
// the blow-up time t*.
//
// For lambda != 0, eta is the rescaled time with dt = Kbar_0^(2*lambda)
// d(eta); evaluation is permitted on [0, eta_star*(1-guard)].  For
// lambda = 0 there is no rescaled time: eta coincides with t and
// eta_star = +infinity.

namespace pj::rep {

struct SetupOptions {
  double guard_fraction = 1e-6;  // keep away from eta_star by this fraction
  double quad_tol = 1e-11;       // relative tolerance of inner quadratures
  int extrema_grid = 4096;       // scan grid for locating slope extrema
};

struct ProblemSetup {
  double lambda = 0.0;
  data::InitialData data;
  data::SlopeExtrema extrema;
  double eta_star = 0.0;  // 1/(lambda*M0) or 1/(lambda*m0); +inf for lambda=0
  SetupOptions options;

  static ProblemSetup make(double lambda, data::InitialData data,
                           SetupOptions options = {});
};

class Solution {
 public:
  explicit Solution(ProblemSetup setup);

  const ProblemSetup& setup() const { return setup_; }
  double lambda() const { return setup_.lambda; }
  const data::InitialData& initial() const { return setup_.data; }
  const data::SlopeExtrema& extrema() const { return setup_.extrema; }
  double eta_star() const { return setup_.eta_star; }
  double eta_max() const;  // guard-banded upper evaluation limit

  // J(a,eta) = 1 - lambda*eta*u0'(a) > 0 for eta < eta_star.
  double jacobian_factor(double alpha, double eta) const;

  // Moments of the jacobian factor: j_moment(b,eta) = int_0^1 J^(-b) da.
  // kbar(i,.) is the special case b = i + 1/lambda (lambda != 0).
  double j_moment(double b, double eta) const;
  double slope_moment(double b, double eta) const;  // int u0' J^(-b) da
  double kbar(int i, double eta) const;
  double kbar_limit(int i) const;          // lim as eta -> eta_star
  double j_moment_limit(double b) const;
  double phi1(double eta) const;           // Kbar_0^lambda

  double time_of_eta(double eta) const;
  double eta_of_time(double t) const;
  double blowup_time() const;              // t*, possibly +infinity
  double time_max() const;                 // t at eta_max (guard edge)

  struct UxForms {
    double main;  // grouped form with the 1/(lambda*eta) prefactor
    double alt;   // ungrouped form with the slope moment
  };
  UxForms ux_forms(double alpha, double eta) const;
  double ux(double alpha, double eta) const;
  double gamma_alpha(double alpha, double eta) const;
  double uxx(double alpha, double eta) const;
  double nonlocal_term(double eta) const;  // I = -(lambda+1)*||u_x||_2^2
  std::pair<double, double> extrema_track(double eta) const;  // (M, m)

  // Flow map and velocity along characteristics (parametrized by t).
  double characteristic(double alpha, double t) const;
  double u_along(double alpha, double t) const;
  double gamma0(double t) const;           // gamma(0,t)
  double gamma0_dot(double eta) const;

  // Integral over one alpha-period of an arbitrary field, split-aware
  // around the extremum locations and near-singular as eta -> eta_star.
  double integrate_alpha(const std::function<double(double)>& field,
                         double eta, double tol_rel = 0.0) const;

  // data odd about a center alpha0 pins gamma(alpha0,t) = alpha0
  bool odd_symmetric() const { return odd_center_.has_value(); }
  std::optional<double> odd_center() const { return odd_center_; }

  // Tail structure of Kbar_0 as eta -> eta_star: Kbar_0 ~ C*(eta*-eta)^q,
  // possibly with a logarithmic factor (q from the local shape of u0'
  // at the critical extremum).
  struct TailExponent {
    double q = 0.0;
    bool log_factor = false;
    bool degenerate = false;
  };
  TailExponent kbar_tail_exponent() const;

  // exponent of J(critical,eta) in eta:  J = 1 - eta/eta_star at the
  // critical locations, so log-log trends can be taken against it
  double critical_jacobian(double eta) const;

 private:
  struct TimeMap;

  double require_eta(double eta) const;  // validates, returns eta
  double moment_impl(double b, double eta, bool slope_weighted) const;
  double cached_moment(double b, double eta, bool slope_weighted) const;
  void build_time_map() const;
  double time_integrand(double eta) const;       // Kbar_0^(2*lambda)
  double time_of_eta_unguarded(double eta) const;
  double exp_moment(int order, double t) const;  // lambda = 0 machinery
  double compute_blowup_time() const;
  double dgamma0_deta(double eta) const;
  double integrate_range(const std::function<double(double)>& field,
                         double lo, double hi, double eta,
                         double tol_rel) const;

  ProblemSetup setup_;
  std::optional<double> odd_center_;
  std::vector<double> critical_locations_;   // where J -> 0 first
  std::vector<double> all_extrema_;          // split points
  double slope_sq_integral_ = 0.0;           // int (u0')^2

  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<double, double>, double> moment_cache_;
  mutable std::map<std::pair<double, double>, double> slope_moment_cache_;
  mutable std::map<std::pair<int, double>, double> exp_moment_cache_;
  mutable std::map<double, double> gamma0_cache_;
  mutable std::shared_ptr<const TimeMap> time_map_;
  mutable std::optional<double> t_star_;
};

// Ratio of the two extremum-asymptotics constants (the Gamma-function
// law): equals 1 - lambda/2 for lambda in (0,2).
double gamma_ratio(double lambda);

}  // namespace pj::rep

#endif
