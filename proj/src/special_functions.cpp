#include "pj/special_functions.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pj::sf {

namespace {

constexpr double kSeriesTolerance = 1e-16;
constexpr int kMaxSeriesTerms = 10000;

// Godfrey/Pugh Lanczos coefficients, g = 607/128, n = 15.
constexpr double kLanczosG = 607.0 / 128.0;
constexpr double kLanczosCoeff[15] = {
    0.99999999999999709182,     57.156235665862923517,
    -59.597960355475491248,     14.136097974741747174,
    -0.49191381609762019978,    3.3994649984811888699e-5,
    4.6523628927048575665e-5,   -9.8374475304879564677e-5,
    1.5808870322491248884e-4,   -2.1026444172410488319e-4,
    2.1743961811521264320e-4,   -1.6431810653676389022e-4,
    8.4418223983852743293e-5,   -2.6190838401581408670e-5,
    3.6899182659531622704e-6};

double lanczos_log_gamma(double x) {
  // valid for x > 0
  double acc = kLanczosCoeff[0];
  for (int k = 1; k < 15; ++k) acc += kLanczosCoeff[k] / (x - 1.0 + k);
  const double t = x + kLanczosG - 0.5;
  return 0.5 * std::log(2.0 * M_PI) + (x - 0.5) * std::log(t) - t +
         std::log(acc);
}

bool is_integer(double x, double tol = 1e-12) {
  return std::abs(x - std::round(x)) <= tol * std::max(1.0, std::abs(x));
}

bool is_nonpositive_integer(double x) { return x <= 0.5 && is_integer(x); }

[[noreturn]] void domain_fail(const std::string& what) {
  throw std::domain_error("hyp2f1: " + what);
}

// Plain power series sum(k) (a)_k (b)_k / ((c)_k k!) z^k for |z| < 1.
double series_2f1(double a, double b, double c, double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (std::abs(term) < kSeriesTolerance * std::abs(sum)) return sum;
  }
  throw std::runtime_error("hyp2f1: series failed to converge in 10000 terms");
}

double dispatch(double a, double b, double c, double z);

// Pfaff: 2F1[a,b;c;z] = (1-z)^(-a) 2F1[a, c-b; c; z/(z-1)]
double via_pfaff(double a, double b, double c, double z) {
  return std::pow(1.0 - z, -a) * series_2f1(a, c - b, c, z / (z - 1.0));
}

// Connection formula at z -> 1 (c-a-b not an integer):
//   F = G(c)G(c-a-b)/(G(c-a)G(c-b)) F[a,b;a+b-c+1;1-z]
//     + G(c)G(a+b-c)/(G(a)G(b)) (1-z)^(c-a-b) F[c-a,c-b;c-a-b+1;1-z]
double via_one_minus_z(double a, double b, double c, double z) {
  const double s = c - a - b;
  if (is_integer(s))
    domain_fail("degenerate 1-z connection (c-a-b integer) not supported");
  const double w = 1.0 - z;
  const auto gc = log_gamma_signed(c);
  const auto gs = log_gamma_signed(s);
  const auto gca = log_gamma_signed(c - a);
  const auto gcb = log_gamma_signed(c - b);
  const auto gms = log_gamma_signed(-s);
  const auto ga = log_gamma_signed(a);
  const auto gb = log_gamma_signed(b);

  double first = 0.0;
  if (gca.sign != 0 && gcb.sign != 0) {
    const double lg = gc.log_abs + gs.log_abs - gca.log_abs - gcb.log_abs;
    const int sg = gc.sign * gs.sign * gca.sign * gcb.sign;
    first = sg * std::exp(lg) * dispatch(a, b, a + b - c + 1.0, w);
  }
  double second = 0.0;
  if (ga.sign != 0 && gb.sign != 0) {
    const double lg = gc.log_abs + gms.log_abs - ga.log_abs - gb.log_abs;
    const int sg = gc.sign * gms.sign * ga.sign * gb.sign;
    second = sg * std::exp(lg + s * std::log(w)) *
             dispatch(c - a, c - b, s + 1.0, w);
  }
  return first + second;
}

// Analytic continuation for z < -1 (a-b not an integer):
//   F = G(c)G(a-b)/(G(a)G(c-b)) (-z)^(-b) F[b,1+b-c;1+b-a;1/z]
//     + G(c)G(b-a)/(G(b)G(c-a)) (-z)^(-a) F[a,1+a-c;1+a-b;1/z]
double via_continuation(double a, double b, double c, double z) {
  if (is_integer(a - b))
    domain_fail("continuation for z < -1 requires a-b not an integer");
  const double zi = 1.0 / z;
  const auto gc = log_gamma_signed(c);
  const auto gab = log_gamma_signed(a - b);
  const auto gba = log_gamma_signed(b - a);
  const auto ga = log_gamma_signed(a);
  const auto gb = log_gamma_signed(b);
  const auto gca = log_gamma_signed(c - a);
  const auto gcb = log_gamma_signed(c - b);

  double first = 0.0;
  if (ga.sign != 0 && gcb.sign != 0) {
    const double lg = gc.log_abs + gab.log_abs - ga.log_abs - gcb.log_abs;
    const int sg = gc.sign * gab.sign * ga.sign * gcb.sign;
    first = sg * std::exp(lg - b * std::log(-z)) *
            dispatch(b, 1.0 + b - c, 1.0 + b - a, zi);
  }
  double second = 0.0;
  if (gb.sign != 0 && gca.sign != 0) {
    const double lg = gc.log_abs + gba.log_abs - gb.log_abs - gca.log_abs;
    const int sg = gc.sign * gba.sign * gb.sign * gca.sign;
    second = sg * std::exp(lg - a * std::log(-z)) *
             dispatch(a, 1.0 + a - c, 1.0 + a - b, zi);
  }
  return first + second;
}

double dispatch(double a, double b, double c, double z) {
  if (is_nonpositive_integer(c))
    domain_fail("c must not be zero or a negative integer");
  if (z > 1.0) domain_fail("argument z > 1");
  if (a == c) return std::pow(1.0 - z, -b);  // F[a,b;a;z] = (1-z)^(-b)
  if (b == c) return std::pow(1.0 - z, -a);
  if (z == 1.0) {
    // Gauss summation; requires c-a-b > 0 for convergence
    const double s = c - a - b;
    if (s <= 0.0)
      domain_fail("series diverges at z = 1 (requires c-a-b > 0)");
    const auto gc = log_gamma_signed(c);
    const auto gs = log_gamma_signed(s);
    const auto gca = log_gamma_signed(c - a);
    const auto gcb = log_gamma_signed(c - b);
    if (gca.sign == 0 || gcb.sign == 0) return 0.0;
    const double lg = gc.log_abs + gs.log_abs - gca.log_abs - gcb.log_abs;
    return gc.sign * gs.sign * gca.sign * gcb.sign * std::exp(lg);
  }
  if (z < -1.0) return via_continuation(a, b, c, z);
  if (z < -0.5) return via_pfaff(a, b, c, z);
  if (z <= 0.5) return series_2f1(a, b, c, z);
  return via_one_minus_z(a, b, c, z);
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) {
    std::ostringstream msg;
    msg << "log_gamma: argument must be positive, got " << x;
    throw std::domain_error(msg.str());
  }
  return lanczos_log_gamma(x);
}

LogGammaSigned log_gamma_signed(double x) {
  if (x > 0.0) return {lanczos_log_gamma(x), 1};
  if (is_integer(x)) return {std::numeric_limits<double>::infinity(), 0};
  // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
  const double s = std::sin(M_PI * x);
  const double log_abs =
      std::log(M_PI / std::abs(s)) - lanczos_log_gamma(1.0 - x);
  return {log_abs, s > 0.0 ? 1 : -1};
}

double hyp2f1(const Hyp2F1Params& p) { return dispatch(p.a, p.b, p.c, p.z); }

double hyp2f1(double a, double b, double c, double z) {
  return dispatch(a, b, c, z);
}

double power_quadratic_antiderivative(double b, double C0, double eps,
                                      double w) {
  if (!(C0 > 0.0) || !(eps > 0.0))
    throw std::domain_error(
        "power_quadratic_antiderivative: C0 and eps must be positive");
  if (w == 0.0) return 0.0;
  const double z = -C0 * w * w / eps;
  return std::pow(eps, -b) * w * dispatch(0.5, b, 1.5, z);
}

double lemma_primitive(double b, double C0, double eps, double beta,
                       double beta0) {
  if (!(b < 2.0) || b == 0.5)
    throw std::domain_error(
        "lemma_primitive: exponent b must lie in (-inf,2) excluding 1/2");
  if (!(C0 > 0.0)) throw std::domain_error("lemma_primitive: C0 must be > 0");
  if (!(eps >= C0))
    throw std::domain_error("lemma_primitive: requires eps >= C0");
  const double w = beta - beta0;
  if (std::abs(w) > 1.0)
    throw std::domain_error("lemma_primitive: requires |beta-beta0| <= 1");
  return power_quadratic_antiderivative(b, C0, eps, w);
}

}  // namespace pj::sf
