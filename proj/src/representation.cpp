#include "pj/representation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pj/quadrature.hpp"
#include "pj/special_functions.hpp"

namespace pj::rep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEtaTiny = 1e-12;        // moments are first-order exact below this
constexpr double kInitialFloor = 1e-8;    // pointwise fields fall back to initial data
constexpr double kConsistencyWindow = 1e-6;
constexpr double kJFloor = 1e-290;        // roundoff guard in limit-mode integrands
constexpr double kHardEps = 1e-13;        // below: treat the site as a true singularity

double wrap_unit(double a) {
  double w = a - std::floor(a);
  if (w == 1.0) w = 0.0;
  return w;
}

// int_0^L (A + B s)^(-b) ds given the endpoint values J_l = A,
// J_r = A + B L.  Both endpoints nonnegative; a vanishing endpoint is
// only admissible when the integral converges (1 - b > 0).
double power_linear_integral(double j_l, double j_r, double b, double length) {
  if (length == 0.0) return 0.0;
  const double diff = j_r - j_l;
  const double big = std::max(std::abs(j_l), std::abs(j_r));
  if (std::abs(diff) <= 1e-9 * big) {
    const double mid = 0.5 * (j_l + j_r);
    return length * std::pow(mid, -b);
  }
  if (j_l <= 0.0 || j_r <= 0.0) {
    if (std::min(j_l, j_r) < 0.0)
      throw std::runtime_error("power_linear_integral: negative jacobian");
    if (1.0 - b <= 0.0 || std::abs(b - 1.0) < 1e-14)
      throw std::runtime_error(
          "moment diverges: jacobian vanishes on a segment endpoint");
    return (std::pow(j_r, 1.0 - b) - std::pow(j_l, 1.0 - b)) * length /
           (diff * (1.0 - b));
  }
  if (std::abs(b - 1.0) < 1e-14) {
    return std::log(j_r / j_l) * length / diff;
  }
  // j_l^(1-b) * expm1((1-b) log(j_r/j_l)) / ((1-b)) * L / diff
  const double e = std::expm1((1.0 - b) * std::log(j_r / j_l));
  return std::pow(j_l, 1.0 - b) * e * length / (diff * (1.0 - b));
}

}  // namespace

ProblemSetup ProblemSetup::make(double lambda, data::InitialData d,
                                SetupOptions options) {
  if (!std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite");
  auto extrema = data::slope_extrema(d, options.extrema_grid);
  double eta_star = kInf;
  if (lambda > 0.0)
    eta_star = 1.0 / (lambda * extrema.M0);
  else if (lambda < 0.0)
    eta_star = 1.0 / (lambda * extrema.m0);
  return ProblemSetup{lambda, std::move(d), std::move(extrema), eta_star,
                      options};
}

struct Solution::TimeMap {
  std::vector<double> eta_nodes;
  std::vector<double> t_nodes;  // cumulative time at eta_nodes
};

namespace {

std::optional<double> detect_odd_center(const data::InitialData& d) {
  // an odd center must be a root of u0; locate roots, then test
  const int n = 2048;
  std::vector<double> roots;
  double prev = d.u0(0.0);
  for (int i = 1; i <= n; ++i) {
    const double x = double(i) / n;
    const double cur = d.u0(x);
    if (prev == 0.0) roots.push_back(double(i - 1) / n);
    else if ((prev < 0.0) != (cur < 0.0)) {
      double lo = double(i - 1) / n, hi = x, flo = prev;
      for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = d.u0(mid);
        if ((flo < 0.0) == (fm < 0.0)) { lo = mid; flo = fm; }
        else hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev = cur;
  }
  const double scale = [&] {
    double s = 0.0;
    for (int i = 0; i < 64; ++i) s = std::max(s, std::abs(d.u0(i / 64.0)));
    return std::max(s, 1e-30);
  }();
  for (double r : roots) {
    bool odd = true;
    for (int j = 1; j <= 37 && odd; ++j) {
      const double s = 0.5 * (j - 0.381966) / 37.0;
      if (std::abs(d.u0(r + s) + d.u0(r - s)) > 1e-11 * scale) odd = false;
    }
    if (odd) return wrap_unit(r);
  }
  return std::nullopt;
}

}  // namespace

Solution::Solution(ProblemSetup setup) : setup_(std::move(setup)) {
  odd_center_ = detect_odd_center(setup_.data);
  const auto& ex = setup_.extrema;
  const auto& crit = setup_.lambda >= 0.0 ? ex.maxima : ex.minima;
  for (const auto& s : crit) {
    if (s.is_interval) {
      critical_locations_.push_back(s.interval_left);
      critical_locations_.push_back(s.interval_right);
    } else {
      critical_locations_.push_back(s.location);
    }
  }
  for (const auto& s : ex.maxima) all_extrema_.push_back(s.location);
  for (const auto& s : ex.minima) all_extrema_.push_back(s.location);
  std::sort(all_extrema_.begin(), all_extrema_.end());
  std::sort(critical_locations_.begin(), critical_locations_.end());

  // int (u0')^2, used for small-eta limits
  if (setup_.data.data_class() == data::DataClass::PiecewiseConstantSlope) {
    double acc = 0.0;
    const auto& b = setup_.data.breakpoints();
    const auto& h = setup_.data.pc_slopes();
    for (std::size_t i = 0; i < h.size(); ++i)
      acc += h[i] * h[i] * (b[i + 1] - b[i]);
    slope_sq_integral_ = acc;
  } else {
    auto f = [this](double a) {
      const double s = setup_.data.slope(a);
      return s * s;
    };
    std::vector<double> splits = setup_.data.breakpoints();
    slope_sq_integral_ =
        quad::integrate_singular(f, 0.0, 1.0, splits.empty() ? all_extrema_ : splits,
                                 {}, 1e-13)
            .value;
  }
}

double Solution::eta_max() const {
  if (setup_.lambda == 0.0) return kInf;
  return setup_.eta_star * (1.0 - setup_.options.guard_fraction);
}

double Solution::require_eta(double eta) const {
  if (!std::isfinite(eta) || eta < 0.0) {
    std::ostringstream msg;
    msg << "eta = " << eta << " outside domain [0, eta_star)";
    throw std::domain_error(msg.str());
  }
  if (setup_.lambda == 0.0) return eta;
  const double limit = eta_max();
  if (eta > limit * (1.0 + 1e-15)) {
    std::ostringstream msg;
    msg << "eta = " << eta << " beyond the guard band: evaluation requires eta <= "
        << limit << " (eta_star = " << setup_.eta_star << ")";
    throw std::domain_error(msg.str());
  }
  return std::min(eta, limit);
}

double Solution::jacobian_factor(double alpha, double eta) const {
  require_eta(eta);
  if (setup_.lambda == 0.0) return 1.0;
  return 1.0 - setup_.lambda * eta * setup_.data.slope(alpha);
}

double Solution::critical_jacobian(double eta) const {
  if (setup_.lambda == 0.0) return 1.0;
  return 1.0 - eta / setup_.eta_star;
}

// ---------------------------------------------------------------------------
// moments

double Solution::cached_moment(double b, double eta, bool slope_weighted) const {
  auto& cache = slope_weighted ? slope_moment_cache_ : moment_cache_;
  const std::pair<double, double> key{b, eta};
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const double value = moment_impl(b, eta, slope_weighted);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (cache.size() > (1u << 22)) cache.clear();
    cache.emplace(key, value);
  }
  return value;
}

double Solution::moment_impl(double b, double eta, bool slope_weighted) const {
  const double lambda = setup_.lambda;
  const bool limit_mode = lambda != 0.0 && eta >= setup_.eta_star;
  if (lambda == 0.0 || eta <= kEtaTiny) {
    // J = 1 + O(eta); first order in eta is exact enough below the floor
    if (!slope_weighted) return 1.0;
    return b * lambda * eta * slope_sq_integral_;
  }
  if (b == 0.0) return slope_weighted ? 0.0 : 1.0;

  const auto& d = setup_.data;
  const double le = lambda * eta;

  if (d.data_class() == data::DataClass::PiecewiseConstantSlope) {
    const auto& bp = d.breakpoints();
    const auto& h = d.pc_slopes();
    double acc = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      double j = 1.0 - le * h[i];
      if (j < 1e-14) j = 0.0;
      double term;
      if (j == 0.0) {
        if (b > 0.0)
          throw std::runtime_error("moment diverges: J = 0 on an interval");
        term = 0.0;
      } else {
        term = std::pow(j, -b);
      }
      acc += term * (slope_weighted ? h[i] : 1.0) * (bp[i + 1] - bp[i]);
    }
    return acc;
  }

  if (d.data_class() == data::DataClass::PiecewiseLinearSlope) {
    const auto& bp = d.breakpoints();
    const auto& seg = d.pl_segments();
    double acc = 0.0;
    for (std::size_t i = 0; i < seg.size(); ++i) {
      const double length = bp[i + 1] - bp[i];
      const double g = seg[i].slope;
      const double q = seg[i].curvature;
      double j_l = 1.0 - le * g;
      double j_r = 1.0 - le * (g + q * length);
      if (limit_mode) {
        if (j_l < 1e-13) j_l = 0.0;
        if (j_r < 1e-13) j_r = 0.0;
      }
      if (!slope_weighted) {
        acc += power_linear_integral(j_l, j_r, b, length);
        continue;
      }
      const double B_over_A = j_l > 0.0 ? (j_r - j_l) / j_l : kInf;
      if (std::abs(B_over_A) < 1e-4) {
        // near-constant jacobian on the segment: quartic Taylor
        const double x = (j_r - j_l) / (length * j_l);  // B/A
        const double L = length;
        const double t0 = g * L + 0.5 * q * L * L;
        const double t1 = -b * x * (0.5 * g * L * L + q * L * L * L / 3.0);
        const double t2 = 0.5 * b * (b + 1.0) * x * x *
                          (g * L * L * L / 3.0 + 0.25 * q * L * L * L * L);
        const double t3 = -b * (b + 1.0) * (b + 2.0) * x * x * x / 6.0 *
                          (0.25 * g * L * L * L * L + 0.2 * q * L * L * L * L * L);
        acc += std::pow(j_l, -b) * (t0 + t1 + t2 + t3);
      } else {
        // u0' = (1 - J)/(lambda*eta) exactly, so the slope-weighted moment
        // reduces to a difference of two plain moments of the segment
        const double ib = power_linear_integral(j_l, j_r, b, length);
        const double ibm = power_linear_integral(j_l, j_r, b - 1.0, length);
        acc += (ib - ibm) / le;
      }
    }
    return acc;
  }

  // smooth data: split-aware quadrature with a model-based window around
  // each location where J can degenerate
  struct Site {
    double loc;
    double eps;
    double c0;      // local quadratic coefficient of J
    double w;       // window half-width
    bool hard;      // endpoint-type singularity (limit mode)
    bool lemma_ok;  // quadratic model + residual inside the window
  };
  const auto& crit_sites =
      lambda > 0.0 ? setup_.extrema.maxima : setup_.extrema.minima;

  std::vector<double> anchors;  // critical locations for gap/cut logic
  std::vector<Site> sites;
  for (const auto& s : crit_sites) {
    Site site;
    site.loc = s.location;
    site.eps = 1.0 - le * d.slope(s.location);
    if (site.eps < kHardEps) site.eps = limit_mode ? 0.0 : site.eps;
    site.hard = site.eps < kHardEps;
    site.c0 = -le * s.curvature_coeff;
    site.lemma_ok = !site.hard && !s.degenerate && site.c0 > 0.0;
    site.w = 0.0;
    if (!site.hard) {
      if (site.lemma_ok) {
        site.w = std::sqrt(site.eps / site.c0);
      } else {
        // bisect for the width at which J doubles
        double lo = 1e-15, hi = 0.25;
        auto grown = [&](double w) {
          const double jp = 1.0 - le * d.slope(site.loc + w);
          const double jm = 1.0 - le * d.slope(site.loc - w);
          return std::min(jp, jm) >= 2.0 * site.eps;
        };
        if (grown(lo)) hi = lo;
        else {
          while (!grown(hi) && hi < 0.5) hi *= 2.0;
          for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (grown(mid) ? hi : lo) = mid;
          }
        }
        site.w = hi;
      }
    }
    sites.push_back(site);
    anchors.push_back(s.location);
  }
  if (sites.empty())
    throw std::logic_error("moment_impl: no critical sites for smooth data");

  // integrate over [cut, cut+1] where cut sits in the widest gap
  std::sort(anchors.begin(), anchors.end());
  double cut = 0.0, widest = -1.0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double next =
        (i + 1 < anchors.size()) ? anchors[i + 1] : anchors[0] + 1.0;
    if (next - anchors[i] > widest) {
      widest = next - anchors[i];
      cut = 0.5 * (anchors[i] + next);
    }
  }

  auto f = [&](double a) {
    const double x = wrap_unit(a);
    double j = 1.0 - le * d.slope(x);
    if (j < kJFloor) j = kJFloor;
    const double p = std::pow(j, -b);
    return slope_weighted ? d.slope(x) * p : p;
  };

  auto into_range = [&](double x) {
    double y = x;
    while (y < cut) y += 1.0;
    while (y >= cut + 1.0) y -= 1.0;
    return y;
  };

  std::vector<double> bounds{cut, cut + 1.0};
  for (double e : all_extrema_) {
    const double x = into_range(e);
    if (x > cut && x < cut + 1.0) bounds.push_back(x);
  }
  struct Window {
    double lo, hi;
    const Site* site;
    double loc;
  };
  std::vector<Window> windows;
  std::vector<double> hard_points;
  for (const auto& s : sites) {
    const double loc = into_range(s.loc);
    if (s.hard) {
      hard_points.push_back(loc);
      bounds.push_back(loc);
      continue;
    }
    const double w = std::min(s.w, 0.2);
    windows.push_back({loc - w, loc + w, &s, loc});
    bounds.push_back(loc - w);
    bounds.push_back(loc + w);
    for (double r = 2.0 * w; r < 0.55; r *= 2.0) {
      if (loc - r > cut) bounds.push_back(loc - r);
      if (loc + r < cut + 1.0) bounds.push_back(loc + r);
    }
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  while (bounds.front() < cut) bounds.erase(bounds.begin());
  while (bounds.back() > cut + 1.0) bounds.pop_back();

  const double tol = setup_.options.quad_tol;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double lo = bounds[i], hi = bounds[i + 1];
    if (hi - lo < 1e-16) continue;
    const Window* win = nullptr;
    for (const auto& w : windows)
      if (lo >= w.lo - 1e-16 && hi <= w.hi + 1e-16 && lo < w.loc + 1e-16 &&
          hi > w.loc - 1e-16)
        win = &w;
    bool hard = false;
    for (double hp : hard_points)
      if (lo == hp || hi == hp) hard = true;

    if (win != nullptr && win->site->lemma_ok) {
      const Site& s = *win->site;
      const double wl = win->loc - lo;  // usually equal half-widths
      const double wr = hi - win->loc;
      const double model =
          sf::power_quadratic_antiderivative(b, s.c0, s.eps, wr) -
          sf::power_quadratic_antiderivative(b, s.c0, s.eps, -wl);
      const double weight = slope_weighted ? d.slope(s.loc) : 1.0;
      auto residual = [&](double a) {
        const double dd = a - win->loc;
        const double m = std::pow(s.eps + s.c0 * dd * dd, -b) * weight;
        return f(a) - m;
      };
      const auto r = quad::integrate_adaptive(residual, lo, hi, tol,
                                              tol * std::abs(model), 30);
      acc += model * weight + r.value;
    } else if (hard) {
      acc += quad::integrate_tanh_sinh(f, lo, hi, tol, 12).value;
    } else {
      acc += quad::integrate_adaptive(f, lo, hi, tol, 1e-300, 30).value;
    }
  }
  return acc;
}

double Solution::j_moment(double b, double eta) const {
  require_eta(eta);
  return cached_moment(b, eta, false);
}

double Solution::slope_moment(double b, double eta) const {
  require_eta(eta);
  return cached_moment(b, eta, true);
}

double Solution::j_moment_limit(double b) const {
  if (setup_.lambda == 0.0)
    throw std::domain_error("j_moment_limit requires lambda != 0");
  // convergence at eta_star depends on the local shape at the critical sites
  const auto& crit =
      setup_.lambda > 0.0 ? setup_.extrema.maxima : setup_.extrema.minima;
  for (const auto& s : crit) {
    const double threshold = s.is_interval ? 0.0 : (s.is_kink ? 1.0 : 0.5);
    if (b >= threshold && !(b == 0.0)) {
      std::ostringstream msg;
      msg << "moment with exponent b = " << b
          << " diverges as eta -> eta_star = " << setup_.eta_star;
      throw std::runtime_error(msg.str());
    }
  }
  return cached_moment(b, setup_.eta_star, false);
}

double Solution::kbar(int i, double eta) const {
  if (i < 0) throw std::invalid_argument("kbar: index must be >= 0");
  if (setup_.lambda == 0.0)
    throw std::domain_error(
        "kbar requires lambda != 0 (the lambda = 0 path uses exponential moments)");
  require_eta(eta);
  return cached_moment(double(i) + 1.0 / setup_.lambda, eta, false);
}

double Solution::kbar_limit(int i) const {
  if (i < 0) throw std::invalid_argument("kbar_limit: index must be >= 0");
  if (setup_.lambda == 0.0)
    throw std::domain_error("kbar_limit requires lambda != 0");
  return j_moment_limit(double(i) + 1.0 / setup_.lambda);
}

double Solution::phi1(double eta) const {
  return std::pow(kbar(0, eta), setup_.lambda);
}

// ---------------------------------------------------------------------------
// time maps

double Solution::time_integrand(double eta) const {
  const double k0 = cached_moment(1.0 / setup_.lambda, eta, false);
  return std::pow(k0, 2.0 * setup_.lambda);
}

void Solution::build_time_map() const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (time_map_) return;
  }
  auto tm = std::make_shared<TimeMap>();
  const double emax = eta_max();
  tm->eta_nodes.push_back(0.0);
  const int uniform = 32;
  for (int i = 1; i <= uniform; ++i)
    tm->eta_nodes.push_back(0.9 * emax * double(i) / uniform);
  double step = 0.1 * emax;
  while (step > 1e-12 * setup_.eta_star) {
    step *= 0.5;
    tm->eta_nodes.push_back(emax - step);
  }
  tm->eta_nodes.push_back(emax);
  std::sort(tm->eta_nodes.begin(), tm->eta_nodes.end());
  tm->eta_nodes.erase(
      std::unique(tm->eta_nodes.begin(), tm->eta_nodes.end()),
      tm->eta_nodes.end());

  tm->t_nodes.assign(tm->eta_nodes.size(), 0.0);
  auto g = [this](double mu) { return time_integrand(mu); };
  for (std::size_t i = 0; i + 1 < tm->eta_nodes.size(); ++i) {
    const auto r = quad::integrate_adaptive(g, tm->eta_nodes[i],
                                            tm->eta_nodes[i + 1],
                                            setup_.options.quad_tol, 1e-300, 36);
    tm->t_nodes[i + 1] = tm->t_nodes[i] + r.value;
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (!time_map_) time_map_ = std::move(tm);
}

double Solution::time_of_eta_unguarded(double eta) const {
  build_time_map();
  std::shared_ptr<const TimeMap> tm;
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    tm = time_map_;
  }
  const auto& en = tm->eta_nodes;
  auto it = std::upper_bound(en.begin(), en.end(), eta);
  std::size_t k = std::max<std::ptrdiff_t>(0, it - en.begin() - 1);
  k = std::min(k, en.size() - 1);
  double t = tm->t_nodes[k];
  if (eta > en[k]) {
    auto g = [this](double mu) { return time_integrand(mu); };
    t += quad::integrate_adaptive(g, en[k], eta, setup_.options.quad_tol,
                                  1e-300, 36)
             .value;
  }
  return t;
}

double Solution::time_of_eta(double eta) const {
  require_eta(eta);
  if (setup_.lambda == 0.0) return eta;
  if (eta == 0.0) return 0.0;
  return time_of_eta_unguarded(eta);
}

double Solution::time_max() const {
  if (setup_.lambda == 0.0) return kInf;
  return time_of_eta_unguarded(eta_max());
}

double Solution::eta_of_time(double t) const {
  if (!std::isfinite(t) || t < 0.0)
    throw std::domain_error("eta_of_time: t must be finite and >= 0");
  if (setup_.lambda == 0.0) return t;
  if (t == 0.0) return 0.0;
  const double tmax = time_max();
  if (t > tmax * (1.0 + 1e-14)) {
    std::ostringstream msg;
    msg << "t = " << t << " not reachable: guard band limits evaluation to t <= "
        << tmax << " (blow-up time t* = " << blowup_time() << ")";
    throw std::domain_error(msg.str());
  }
  build_time_map();
  std::shared_ptr<const TimeMap> tm;
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    tm = time_map_;
  }
  // bracket on the tabulated nodes, then refine with Brent on t(eta)-t
  const auto& tn = tm->t_nodes;
  auto it = std::upper_bound(tn.begin(), tn.end(), t);
  std::size_t hi_i = std::min<std::size_t>(tn.size() - 1, it - tn.begin());
  std::size_t lo_i = hi_i > 0 ? hi_i - 1 : 0;
  double lo = tm->eta_nodes[lo_i], hi = tm->eta_nodes[hi_i];
  double flo = tn[lo_i] - t, fhi = tn[hi_i] - t;
  if (fhi < 0.0) { hi = eta_max(); fhi = tmax - t; }
  if (flo > 0.0) { lo = 0.0; flo = -t; }

  // Brent's method
  double a = lo, b = hi, fa = flo, fb = fhi;
  double c = a, fc = fa, d = b - a, e = d;
  const double tol_t = 1e-12 * (1.0 + std::abs(t));
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol_x = 2.0 * 2.2e-16 * std::abs(b) + 1e-18;
    const double m = 0.5 * (c - b);
    if (std::abs(fb) <= tol_t || std::abs(m) <= tol_x) return b;
    if (std::abs(e) < tol_x || std::abs(fa) <= std::abs(fb)) {
      d = m; e = m;
    } else {
      double p, q_, r, s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q_ = 1.0 - s;
      } else {
        q_ = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q_ * (q_ - r) - (b - a) * (r - 1.0));
        q_ = (q_ - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q_ = -q_;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * m * q_ - std::abs(tol_x * q_),
                             std::abs(e * q_))) {
        e = d; d = p / q_;
      } else {
        d = m; e = m;
      }
    }
    a = b; fa = fb;
    b += (std::abs(d) > tol_x) ? d : (m > 0.0 ? tol_x : -tol_x);
    fb = time_of_eta_unguarded(b) - t;
    if ((fb > 0.0) == (fc > 0.0)) { c = a; fc = fa; e = d = b - a; }
  }
  return b;
}

// ---------------------------------------------------------------------------
// blow-up time

Solution::TailExponent Solution::kbar_tail_exponent() const {
  TailExponent te;
  const double lambda = setup_.lambda;
  if (lambda == 0.0) return te;
  const double b = 1.0 / lambda;
  const auto& crit = lambda > 0.0 ? setup_.extrema.maxima : setup_.extrema.minima;
  double q = 0.0;
  bool log_flag = false;
  for (const auto& s : crit) {
    double qs = 0.0;
    bool ls = false;
    if (s.is_interval) {
      qs = b > 0.0 ? -b : 0.0;
    } else if (s.is_kink) {
      if (std::abs(b - 1.0) < 1e-12) ls = true;
      else qs = std::min(0.0, 1.0 - b);
    } else {
      if (s.degenerate) te.degenerate = true;
      if (std::abs(b - 0.5) < 1e-12) ls = true;
      else qs = std::min(0.0, 0.5 - b);
    }
    q = std::min(q, qs);
    log_flag = log_flag || ls;
  }
  te.q = q;
  te.log_factor = (q == 0.0) && log_flag;
  return te;
}

double Solution::compute_blowup_time() const {
  const double lambda = setup_.lambda;
  if (lambda == 0.0) return kInf;

  const TailExponent te = kbar_tail_exponent();
  if (te.degenerate) {
    // no usable asymptotic model: Aitken extrapolation on t(eta)
    const double es = setup_.eta_star;
    const double t0 = time_of_eta_unguarded(es * (1.0 - 1e-4));
    const double t1 = time_of_eta_unguarded(es * (1.0 - 1e-5));
    const double t2 = time_of_eta_unguarded(es * (1.0 - 1e-6));
    const double d1 = t1 - t0, d2 = t2 - t1;
    if (std::abs(d1 - d2) < 1e-300) return t2;
    const double extrapolated = t2 + d2 * d2 / (d1 - d2);
    return extrapolated;
  }

  const double sigma = 2.0 * lambda * te.q;
  if (te.q < 0.0 && sigma <= -1.0 + 1e-12) return kInf;

  const double es = setup_.eta_star;
  const double emax = eta_max();
  const double head = time_of_eta_unguarded(emax);
  auto g = [this](double mu) { return time_integrand(mu); };

  if (te.q == 0.0 && !te.log_factor) {
    // Kbar_0 has a finite positive limit: integrate through eta_star
    const auto tail = quad::integrate_tanh_sinh(g, emax, es, 1e-11, 12);
    return head + tail.value;
  }

  // fit the tail model on nodes inside the evaluation range
  const double tau_b = es - emax;
  const double tau_a = 4.0 * tau_b;
  const double tau_c = 2.0 * tau_b;
  const double ka = cached_moment(1.0 / lambda, es - tau_a, false);
  const double kb = cached_moment(1.0 / lambda, es - tau_b, false);
  const double kc = cached_moment(1.0 / lambda, es - tau_c, false);

  double tail = 0.0;
  bool model_ok = true;
  if (te.log_factor) {
    // Kbar_0 ~ -C log(tau/eta_star) + D
    const double la = std::log(tau_a / es), lb = std::log(tau_b / es);
    const double C = -(ka - kb) / (la - lb);
    const double D = ka + C * la;
    const double pred = -C * std::log(tau_c / es) + D;
    model_ok = C > 0.0 && std::abs(pred - kc) <= 1e-2 * std::abs(kc);
    if (model_ok) {
      auto model = [&](double tau) {
        return std::pow(-C * std::log(tau / es) + D, 2.0 * lambda);
      };
      tail = quad::integrate_tanh_sinh(model, 0.0, tau_b, 1e-11, 12).value;
    }
  } else {
    // Kbar_0 ~ C tau^q + D; validate q against the sampled log-log slope
    const double slope_emp = std::log(ka / kb) / std::log(tau_a / tau_b);
    model_ok = std::abs(slope_emp - te.q) <= 0.05;
    const double pa = std::pow(tau_a, te.q), pb = std::pow(tau_b, te.q);
    const double C = (ka - kb) / (pa - pb);
    const double D = ka - C * pa;
    model_ok = model_ok && C > 0.0;
    if (model_ok) {
      auto model = [&](double tau) {
        return std::pow(C * std::pow(tau, te.q) + D, 2.0 * lambda);
      };
      tail = quad::integrate_tanh_sinh(model, 0.0, tau_b, 1e-11, 12).value;
    }
  }
  if (!model_ok) {
    const double t0 = time_of_eta_unguarded(es * (1.0 - 1e-4));
    const double t1 = time_of_eta_unguarded(es * (1.0 - 1e-5));
    const double t2 = time_of_eta_unguarded(es * (1.0 - 1e-6));
    const double d1 = t1 - t0, d2 = t2 - t1;
    if (std::abs(d1 - d2) < 1e-300) return t2;
    return t2 + d2 * d2 / (d1 - d2);
  }
  // head covers [0, emax] = [0, es - tau_b]
  return head + tail;
}

double Solution::blowup_time() const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (t_star_) return *t_star_;
  }
  const double t = compute_blowup_time();
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (!t_star_) t_star_ = t;
  return *t_star_;
}

// ---------------------------------------------------------------------------
// pointwise fields

double Solution::exp_moment(int order, double t) const {
  const std::pair<int, double> key{order, t};
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = exp_moment_cache_.find(key);
    if (it != exp_moment_cache_.end()) return it->second;
  }
  const auto& d = setup_.data;
  double value;
  if (d.data_class() == data::DataClass::PiecewiseConstantSlope) {
    const auto& bp = d.breakpoints();
    const auto& h = d.pc_slopes();
    value = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
      value += std::pow(h[i], order) * std::exp(t * h[i]) * (bp[i + 1] - bp[i]);
  } else {
    auto f = [&](double a) {
      const double s = d.slope(a);
      double w = std::exp(t * s);
      for (int j = 0; j < order; ++j) w *= s;
      return w;
    };
    std::vector<double> splits = d.data_class() == data::DataClass::SmoothFourier
                                     ? all_extrema_
                                     : d.breakpoints();
    value = quad::integrate_singular(f, 0.0, 1.0, splits, {}, 1e-12).value;
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  exp_moment_cache_.emplace(key, value);
  return value;
}

Solution::UxForms Solution::ux_forms(double alpha, double eta) const {
  require_eta(eta);
  const double lambda = setup_.lambda;
  const auto& d = setup_.data;
  if (lambda == 0.0) {
    const double v = d.slope(alpha) - exp_moment(1, eta) / exp_moment(0, eta);
    return {v, v};
  }
  if (eta < kInitialFloor) {
    const double v = d.slope(alpha);
    return {v, v};
  }
  const double b0 = 1.0 / lambda;
  const double j = 1.0 - lambda * eta * d.slope(alpha);
  const double k0 = cached_moment(b0, eta, false);
  const double s1 = cached_moment(b0 + 1.0, eta, true);
  const double pref = std::pow(k0, -2.0 * lambda);
  const double alt = pref * (d.slope(alpha) / j - s1 / k0);
  double main = alt;
  if (std::abs(lambda) * eta >= kConsistencyWindow) {
    const double k1 = cached_moment(b0 + 1.0, eta, false);
    main = pref / (lambda * eta) * (1.0 / j - k1 / k0);
    if (std::abs(main - alt) > 1e-8 * (1.0 + std::abs(alt))) {
      std::ostringstream msg;
      msg << "internal consistency failure between the two u_x forms at alpha="
          << alpha << " eta=" << eta << ": " << main << " vs " << alt;
      throw std::runtime_error(msg.str());
    }
  }
  return {main, alt};
}

double Solution::ux(double alpha, double eta) const {
  return ux_forms(alpha, eta).alt;
}

double Solution::gamma_alpha(double alpha, double eta) const {
  require_eta(eta);
  const double lambda = setup_.lambda;
  const auto& d = setup_.data;
  if (lambda == 0.0)
    return std::exp(eta * d.slope(alpha)) / exp_moment(0, eta);
  const double j = 1.0 - lambda * eta * d.slope(alpha);
  const double k0 = cached_moment(1.0 / lambda, eta, false);
  return std::pow(j, -1.0 / lambda) / k0;
}

double Solution::uxx(double alpha, double eta) const {
  require_eta(eta);
  const double lambda = setup_.lambda;
  const auto& d = setup_.data;
  const double c = d.curvature(alpha);  // throws for PC data
  if (lambda == 0.0)
    return c * exp_moment(0, eta) / std::exp(eta * d.slope(alpha));
  const double j = 1.0 - lambda * eta * d.slope(alpha);
  const double k0 = cached_moment(1.0 / lambda, eta, false);
  return c * std::pow(j, -(2.0 - 1.0 / lambda)) *
         std::pow(k0, 1.0 - 2.0 * lambda);
}

double Solution::nonlocal_term(double eta) const {
  require_eta(eta);
  const double lambda = setup_.lambda;
  if (lambda == 0.0) {
    const double e0 = exp_moment(0, eta);
    const double e1 = exp_moment(1, eta);
    const double e2 = exp_moment(2, eta);
    const double energy = e2 / e0 - (e1 / e0) * (e1 / e0);
    return -energy;
  }
  if (eta < kInitialFloor) return -(lambda + 1.0) * slope_sq_integral_;
  const double b0 = 1.0 / lambda;
  const double k0 = cached_moment(b0, eta, false);
  const double k1 = cached_moment(b0 + 1.0, eta, false);
  const double k2 = cached_moment(b0 + 2.0, eta, false);
  const double denom = lambda * eta * std::pow(k0, 1.0 + 2.0 * lambda);
  const double energy = (k0 * k2 - k1 * k1) / (denom * denom);
  return -(lambda + 1.0) * energy;
}

std::pair<double, double> Solution::extrema_track(double eta) const {
  const double m_loc = setup_.extrema.maxima.front().location;
  const double n_loc = setup_.extrema.minima.front().location;
  return {ux(m_loc, eta), ux(n_loc, eta)};
}

// ---------------------------------------------------------------------------
// alpha integration with singularity awareness

double Solution::integrate_range(const std::function<double(double)>& field,
                                 double lo, double hi, double eta,
                                 double tol_rel) const {
  if (lo == hi) return 0.0;
  if (lo > hi) return -integrate_range(field, hi, lo, eta, tol_rel);
  const double tol = tol_rel > 0.0 ? tol_rel : setup_.options.quad_tol;
  const double lambda = setup_.lambda;
  const auto& d = setup_.data;

  std::vector<double> splits;
  std::vector<quad::SingularPoint> sing;
  auto add_periodic_images = [&](double x, auto&& fn) {
    for (double base = std::floor(lo) - 1.0; base <= std::ceil(hi) + 1.0;
         base += 1.0) {
      const double y = x + base;
      if (y > lo && y < hi) fn(y);
    }
  };
  if (d.data_class() == data::DataClass::SmoothFourier) {
    for (double e : all_extrema_)
      add_periodic_images(e, [&](double y) { splits.push_back(y); });
  } else {
    for (double bpt : d.breakpoints())
      add_periodic_images(bpt, [&](double y) { splits.push_back(y); });
  }
  if (lambda != 0.0 && eta > kEtaTiny) {
    const auto& crit =
        lambda > 0.0 ? setup_.extrema.maxima : setup_.extrema.minima;
    for (const auto& s : crit) {
      const double eps =
          std::max(1.0 - lambda * eta * d.slope(s.location), 0.0);
      double width = 1e-3;
      if (!s.is_interval && !s.is_kink && !s.degenerate) {
        const double c0 = -lambda * eta * s.curvature_coeff;
        if (c0 > 0.0) width = std::sqrt(std::max(eps, 1e-30) / c0);
      } else if (s.is_kink) {
        const double cl = std::abs(lambda * eta * s.kink_left_curv);
        const double cr = std::abs(lambda * eta * s.kink_right_curv);
        const double c = std::max(cl, cr);
        if (c > 0.0) width = eps / c;
      }
      width = std::clamp(width, 1e-14, 0.2);
      const bool hard = eps < kHardEps;
      auto add_point = [&](double x) {
        add_periodic_images(
            x, [&](double y) { sing.push_back({y, width, hard}); });
      };
      if (s.is_interval) {
        add_point(s.interval_left);
        add_point(s.interval_right);
      } else {
        add_point(s.location);
      }
    }
  }
  return quad::integrate_singular(field, lo, hi, splits, sing, tol).value;
}

double Solution::integrate_alpha(const std::function<double(double)>& field,
                                 double eta, double tol_rel) const {
  require_eta(eta);
  return integrate_range(field, 0.0, 1.0, eta, tol_rel);
}

// ---------------------------------------------------------------------------
// flow map

namespace {
// directional cumulative integral helper shared by gamma/u_along
}  // namespace

double Solution::dgamma0_deta(double eta) const {
  // d(gamma(0,t))/d(eta) for data without an odd center, from mean
  // conservation: the flow-map increment has zero gamma_alpha-weighted mean.
  const double lambda = setup_.lambda;
  const auto& d = setup_.data;
  const double small = lambda == 0.0 ? 1e-6 : 1e-6 * eta_max();
  if (eta < small) {
    // gamma(0,t) moves at u0(0) to leading order
    return d.u0(0.0) * (lambda == 0.0 ? 1.0 : time_integrand(eta));
  }
  const double k0 = lambda != 0.0 ? cached_moment(1.0 / lambda, eta, false)
                                  : exp_moment(0, eta);
  const double s1 = lambda != 0.0
                        ? cached_moment(1.0 + 1.0 / lambda, eta, true)
                        : exp_moment(1, eta);

  auto kernel0 = [&](double a) {
    if (lambda == 0.0) return std::exp(eta * d.slope(a));
    const double j = 1.0 - lambda * eta * d.slope(a);
    return std::pow(std::max(j, kJFloor), -1.0 / lambda);
  };
  auto kernel1 = [&](double a) {
    // d(kernel0)/d(eta) = u0' * J^-(1+1/lambda)  (= u0' e^{t u0'} at lambda=0)
    if (lambda == 0.0) return d.slope(a) * std::exp(eta * d.slope(a));
    const double j = 1.0 - lambda * eta * d.slope(a);
    return d.slope(a) * std::pow(std::max(j, kJFloor), -(1.0 + 1.0 / lambda));
  };

  // cumulative tables on a fixed panel grid; panel integrals by GK15
  const int panels = 512;
  std::vector<double> cum0(panels + 1, 0.0), cum1(panels + 1, 0.0);
  for (int i = 0; i < panels; ++i) {
    const double a = double(i) / panels, b = double(i + 1) / panels;
    cum0[i + 1] = cum0[i] + integrate_range(kernel0, a, b, eta, 0.0);
    cum1[i + 1] = cum1[i] + integrate_range(kernel1, a, b, eta, 0.0);
  }
  auto cum_at = [&](const std::vector<double>& cum, auto&& kern, double a) {
    const double x = std::clamp(a, 0.0, 1.0);
    const int i = std::min(panels - 1, int(x * panels));
    const double lo = double(i) / panels;
    return cum[i] + quad::gauss_kronrod_15([&](double y) { return kern(y); },
                                           lo, x)
                        .value;
  };

  auto integrand = [&](double a) {
    const double c0 = cum_at(cum0, kernel0, a);
    const double c1 = cum_at(cum1, kernel1, a);
    const double ga = kernel0(a) / k0;
    return (c1 / k0 - c0 * s1 / (k0 * k0)) * ga;
  };
  const double inner = integrate_range(integrand, 0.0, 1.0, eta, 1e-9);
  return -inner;  // d(gamma0)/d(eta)
}

double Solution::gamma0_dot(double eta) const {
  require_eta(eta);
  if (odd_symmetric()) {
    // gamma(center) is pinned; gamma0_dot = u at the image of alpha = 0
    const double t = setup_.lambda == 0.0 ? eta : time_of_eta(eta);
    return u_along(0.0, t);
  }
  const double dt_deta = setup_.lambda == 0.0 ? 1.0 : time_integrand(eta);
  return dgamma0_deta(eta) / dt_deta;
}

double Solution::gamma0(double t) const {
  if (!(t >= 0.0)) throw std::domain_error("gamma0: t must be >= 0");
  const double eta = setup_.lambda == 0.0 ? t : eta_of_time(t);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = gamma0_cache_.find(t);
    if (it != gamma0_cache_.end()) return it->second;
  }
  double value;
  if (odd_symmetric()) {
    const double a0 = *odd_center_;
    const double lambda = setup_.lambda;
    const auto& d = setup_.data;
    auto kernel0 = [&](double a) {
      if (lambda == 0.0) return std::exp(eta * d.slope(a));
      const double j = 1.0 - lambda * eta * d.slope(a);
      return std::pow(std::max(j, kJFloor), -1.0 / lambda);
    };
    const double k0 = lambda != 0.0 ? cached_moment(1.0 / lambda, eta, false)
                                    : exp_moment(0, eta);
    value = a0 - integrate_range(kernel0, 0.0, a0, eta, 0.0) / k0;
  } else if (eta == 0.0) {
    value = 0.0;
  } else {
    // trapezoid in eta with doubling refinement; memoize the integrand
    std::map<double, double> memo;
    auto rate = [&](double mu) {
      auto it = memo.find(mu);
      if (it != memo.end()) return it->second;
      const double v = dgamma0_deta(mu);
      memo.emplace(mu, v);
      return v;
    };
    long n = 64;
    auto sample_sum = [&](long m) {
      double s = 0.5 * (rate(0.0) + rate(eta));
      for (long i = 1; i < m; ++i) s += rate(eta * double(i) / m);
      return s * eta / double(m);
    };
    double prev = sample_sum(n);
    for (int level = 0; level < 5; ++level) {
      n *= 2;
      const double cur = sample_sum(n);
      const bool done = std::abs(cur - prev) <= 1e-8 * (1.0 + std::abs(cur));
      prev = cur;
      if (done) break;
    }
    value = prev;
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  gamma0_cache_.emplace(t, value);
  return value;
}

double Solution::characteristic(double alpha, double t) const {
  const double eta = setup_.lambda == 0.0 ? t : eta_of_time(t);
  const double lambda = setup_.lambda;
  const auto& d = setup_.data;
  auto kernel0 = [&](double a) {
    if (lambda == 0.0) return std::exp(eta * d.slope(a));
    const double j = 1.0 - lambda * eta * d.slope(a);
    return std::pow(std::max(j, kJFloor), -1.0 / lambda);
  };
  const double k0 = lambda != 0.0 ? cached_moment(1.0 / lambda, eta, false)
                                  : exp_moment(0, eta);
  // periodic reduction: gamma(alpha + n) = gamma(alpha) + n
  const double base = std::floor(alpha);
  const double a = alpha - base;
  double anchor_pos, anchor_label;
  if (odd_symmetric()) {
    anchor_label = *odd_center_;
    anchor_pos = anchor_label;
  } else {
    anchor_label = 0.0;
    anchor_pos = gamma0(t);
  }
  const double cum = integrate_range(kernel0, anchor_label, a, eta, 0.0);
  return anchor_pos + cum / k0 + base;
}

double Solution::u_along(double alpha, double t) const {
  const double eta = setup_.lambda == 0.0 ? t : eta_of_time(t);
  const double lambda = setup_.lambda;
  const auto& d = setup_.data;
  const double k0 = lambda != 0.0 ? cached_moment(1.0 / lambda, eta, false)
                                  : exp_moment(0, eta);
  const double s1 = lambda != 0.0
                        ? cached_moment(1.0 + 1.0 / lambda, eta, true)
                        : exp_moment(1, eta);
  auto kernel0 = [&](double a) {
    if (lambda == 0.0) return std::exp(eta * d.slope(a));
    const double j = 1.0 - lambda * eta * d.slope(a);
    return std::pow(std::max(j, kJFloor), -1.0 / lambda);
  };
  auto kernel1 = [&](double a) {
    if (lambda == 0.0) return d.slope(a) * std::exp(eta * d.slope(a));
    const double j = 1.0 - lambda * eta * d.slope(a);
    return d.slope(a) * std::pow(std::max(j, kJFloor), -(1.0 + 1.0 / lambda));
  };
  const double a = alpha - std::floor(alpha);
  const double dt_deta = lambda == 0.0 ? 1.0 : time_integrand(eta);

  double anchor_label, anchor_u;
  if (odd_symmetric()) {
    anchor_label = *odd_center_;
    anchor_u = 0.0;  // the center is a fixed point of the flow
  } else {
    anchor_label = 0.0;
    anchor_u = dgamma0_deta(eta) / dt_deta;
  }
  const double c1 = integrate_range(kernel1, anchor_label, a, eta, 0.0);
  const double c0 = integrate_range(kernel0, anchor_label, a, eta, 0.0);
  return anchor_u + (c1 / k0 - c0 * s1 / (k0 * k0)) / dt_deta;
}

double gamma_ratio(double lambda) {
  if (!(lambda > 0.0 && lambda < 2.0))
    throw std::domain_error("gamma_ratio: requires lambda in (0,2)");
  const double il = 1.0 / lambda;
  return std::exp(sf::log_gamma(0.5 + il) + sf::log_gamma(il) -
                  sf::log_gamma(1.0 + il) - sf::log_gamma(il - 0.5));
}

}  // namespace pj::rep
