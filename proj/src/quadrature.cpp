#include "pj/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace pj::quad {

namespace {

// Kronrod-15 abscissae/weights on [-1,1] and the embedded Gauss-7 weights.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  double value;
  double error;
};

Panel evaluate_panel(const Integrand& f, double a, double b, long& evals) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kXgk[i]);
    fv[14 - i] = f(c + h * kXgk[i]);
  }
  fv[7] = f(c);
  evals += 15;

  double resk = kWgk[7] * fv[7];
  double resg = kWg[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    resk += kWgk[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) resg += kWg[i / 2] * (fv[i] + fv[14 - i]);
  }
  const double value = resk * h;
  double err = std::abs((resk - resg) * h);
  // standard QUADPACK-style rescaling of the raw difference
  double resabs = 0.0;
  for (int i = 0; i < 7; ++i) resabs += kWgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
  resabs = (resabs + kWgk[7] * std::abs(fv[7])) * std::abs(h);
  if (resabs > 0.0 && err > 0.0) {
    const double scale = std::pow(200.0 * err / resabs, 1.5);
    err = resabs * std::min(1.0, scale);
  }
  return {a, b, value, err};
}

}  // namespace

Result gauss_kronrod_15(const Integrand& f, double a, double b) {
  Result r;
  Panel p = evaluate_panel(f, a, b, r.evaluations);
  r.value = p.value;
  r.error = p.error;
  return r;
}

Result integrate_adaptive(const Integrand& f, double a, double b,
                          double tol_rel, double tol_abs, int max_depth) {
  Result out;
  if (a == b) return out;
  // worst-panel-first refinement with a hard panel budget; panel width
  // bottoms out at |b-a| * 2^-max_depth
  const double min_width = std::abs(b - a) * std::pow(0.5, max_depth);
  const std::size_t max_panels = 3000;
  auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> open(worse);
  std::vector<Panel> closed;
  open.push(evaluate_panel(f, a, b, out.evaluations));
  double total_err = open.top().error;
  double total_val = open.top().value;
  std::size_t count = 1;
  while (!open.empty() && count < max_panels) {
    const double goal = std::max(tol_rel * std::abs(total_val), tol_abs);
    if (total_err <= goal) break;
    Panel p = open.top();
    open.pop();
    if (p.b - p.a <= min_width) {
      closed.push_back(p);
      continue;
    }
    const double m = 0.5 * (p.a + p.b);
    Panel left = evaluate_panel(f, p.a, m, out.evaluations);
    Panel right = evaluate_panel(f, m, p.b, out.evaluations);
    total_err += left.error + right.error - p.error;
    total_val += left.value + right.value - p.value;
    open.push(left);
    open.push(right);
    ++count;
  }
  while (!open.empty()) {
    closed.push_back(open.top());
    open.pop();
  }
  std::sort(closed.begin(), closed.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
  double value = 0.0, err = 0.0;
  for (const auto& p : closed) {
    value += p.value;
    err += p.error;
  }
  out.value = value;
  out.error = err;
  out.converged = err <= std::max(tol_rel * std::abs(value), tol_abs) * 1.0001 ||
                  err <= 1e-14 * std::abs(value) + 1e-300;
  return out;
}

Result integrate_tanh_sinh(const Integrand& f, double a, double b,
                           double tol_rel, int max_level) {
  Result out;
  if (a == b) return out;
  const double half = 0.5 * (b - a);
  const double t_max = 6.1;  // weights underflow beyond this

  // x(t) = mid + half*tanh((pi/2) sinh t); evaluate offsets from the
  // endpoints through exp to keep them accurate near the boundary.
  auto sample = [&](double t, double& x, double& w) -> bool {
    const double u = 0.5 * M_PI * std::sinh(t);
    const double ch = std::cosh(u);
    // distance to the nearest endpoint: (half) e^(-|u|)/cosh(u)
    const double dist = half / (std::exp(std::abs(u)) * ch);
    x = (t >= 0.0) ? b - dist : a + dist;
    if (x <= a || x >= b) return false;
    w = half * 0.5 * M_PI * std::cosh(t) / (ch * ch);
    return true;
  };

  double h = 1.0;
  double sum = 0.0;
  {
    double x = 0.0, w = 0.0;
    sample(0.0, x, w);
    sum = w * f(x);
    ++out.evaluations;
    for (double t = h; t <= t_max; t += h) {
      double xp, wp, xm, wm;
      if (sample(t, xp, wp)) { sum += wp * f(xp); ++out.evaluations; }
      if (sample(-t, xm, wm)) { sum += wm * f(xm); ++out.evaluations; }
    }
  }
  double prev = sum * h;
  out.converged = false;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    double add = 0.0;
    for (double t = h; t <= t_max; t += 2.0 * h) {
      double xp, wp, xm, wm;
      if (sample(t, xp, wp)) { add += wp * f(xp); ++out.evaluations; }
      if (sample(-t, xm, wm)) { add += wm * f(xm); ++out.evaluations; }
    }
    const double cur = 0.5 * prev + add * h;
    const double diff = std::abs(cur - prev);
    prev = cur;
    if (level >= 3 && diff <= tol_rel * std::max(1e-300, std::abs(cur))) {
      out.error = diff;
      out.converged = true;
      break;
    }
    out.error = diff;
  }
  out.value = prev;
  return out;
}

Result integrate_singular(const Integrand& f, double a, double b,
                          const std::vector<double>& splits,
                          const std::vector<SingularPoint>& singular,
                          double tol_rel, double tol_abs) {
  // collect panel boundaries: user splits plus dyadic onions shrinking
  // toward each singular location down to its resolvable width
  std::vector<double> pts{a, b};
  for (double s : splits)
    if (s > a && s < b) pts.push_back(s);
  for (const auto& sp : singular) {
    if (sp.location < a || sp.location > b)
      throw std::invalid_argument("integrate_singular: singular point outside domain");
    pts.push_back(std::clamp(sp.location, a, b));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  auto nearest_gap = [&](double x) {
    double gap = std::max(b - a, 1e-300);
    for (double p : pts)
      if (p != x) gap = std::min(gap, std::abs(p - x));
    return gap;
  };

  std::vector<double> bounds = pts;
  for (const auto& sp : singular) {
    const double w_in = std::max(sp.width, 1e-15);
    const double reach = 0.5 * nearest_gap(sp.location);
    for (int side = -1; side <= 1; side += 2) {
      double r = reach;
      while (r > w_in) {
        const double x = sp.location + side * r;
        if (x > a && x < b) bounds.push_back(x);
        r *= 0.5;
      }
      const double x = sp.location + side * w_in;
      if (x > a && x < b) bounds.push_back(x);
    }
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  auto hard_endpoint = [&](double x) {
    for (const auto& sp : singular)
      if (sp.hard && x == sp.location) return true;
    return false;
  };

  Result out;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double lo = bounds[i], hi = bounds[i + 1];
    Result r;
    if (hard_endpoint(lo) || hard_endpoint(hi)) {
      r = integrate_tanh_sinh(f, lo, hi, tol_rel, 12);
    } else {
      r = integrate_adaptive(f, lo, hi, tol_rel, tol_abs, 30);
    }
    out.value += r.value;
    out.error += r.error;
    out.evaluations += r.evaluations;
    out.converged = out.converged && r.converged;
  }
  return out;
}

TrapezoidResult trapezoid_refine(const Integrand& f, double a, double b,
                                 double tol_rel, long max_points,
                                 bool periodic) {
  TrapezoidResult out;
  const double len = b - a;
  long n = 16;
  double sum;
  if (periodic) {
    sum = 0.0;
    for (long i = 0; i < n; ++i) sum += f(a + len * double(i) / double(n));
  } else {
    sum = 0.5 * (f(a) + f(b));
    for (long i = 1; i < n; ++i) sum += f(a + len * double(i) / double(n));
  }
  double prev = sum * len / double(n);
  out.converged = false;
  while (n < max_points) {
    double add = 0.0;
    for (long i = 0; i < n; ++i)
      add += f(a + len * (double(i) + 0.5) / double(n));
    n *= 2;
    sum += add;
    const double cur = sum * len / double(n);
    out.error = std::abs(cur - prev);
    prev = cur;
    if (out.error <= tol_rel * std::max(std::abs(cur), 1e-300)) {
      out.converged = true;
      break;
    }
  }
  out.value = prev;
  out.points = n;
  return out;
}

}  // namespace pj::quad
