#include "pj/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pj::data {

namespace {

constexpr double kMeanZeroTol = 1e-12;
constexpr double kTwoPi = 2.0 * M_PI;

double wrap_unit(double alpha) {
  double a = alpha - std::floor(alpha);
  if (a == 1.0) a = 0.0;
  return a;
}

[[noreturn]] void validation_fail(const std::string& what) {
  throw std::invalid_argument("initial data: " + what);
}

void check_breakpoints(const std::vector<double>& b) {
  if (b.size() < 2) validation_fail("need at least two breakpoints");
  if (b.front() != 0.0 || b.back() != 1.0)
    validation_fail("breakpoints must start at 0 and end at 1");
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    if (!(b[i] < b[i + 1])) {
      std::ostringstream msg;
      msg << "breakpoints not strictly increasing at index " << i
          << " (" << b[i] << " >= " << b[i + 1] << ")";
      validation_fail(msg.str());
    }
  }
}

}  // namespace

std::string to_string(DataClass c) {
  switch (c) {
    case DataClass::SmoothFourier: return "smooth-fourier";
    case DataClass::PiecewiseConstantSlope: return "piecewise-constant-slope";
    case DataClass::PiecewiseLinearSlope: return "piecewise-linear-slope";
  }
  return "?";
}

InitialData InitialData::fourier(std::vector<FourierMode> modes) {
  if (modes.empty()) validation_fail("Fourier data needs at least one mode");
  for (const auto& m : modes) {
    if (m.k < 1) validation_fail("Fourier frequencies must be positive integers");
  }
  // zero-frequency term excluded by construction, so the mean is zero
  InitialData d;
  d.class_ = DataClass::SmoothFourier;
  d.modes_ = std::move(modes);
  return d;
}

InitialData InitialData::piecewise_constant(std::vector<double> breakpoints,
                                            std::vector<double> slopes) {
  check_breakpoints(breakpoints);
  if (slopes.size() + 1 != breakpoints.size())
    validation_fail("need one slope per interval between breakpoints");
  double mean = 0.0;
  for (std::size_t i = 0; i < slopes.size(); ++i)
    mean += slopes[i] * (breakpoints[i + 1] - breakpoints[i]);
  if (std::abs(mean) > kMeanZeroTol) {
    std::ostringstream msg;
    msg << "slope mean-zero violation: sum h_i*mu(Omega_i) = " << mean;
    validation_fail(msg.str());
  }

  InitialData d;
  d.class_ = DataClass::PiecewiseConstantSlope;
  d.breaks_ = std::move(breakpoints);
  d.pc_slopes_ = std::move(slopes);
  d.cum_u0_.assign(d.breaks_.size(), 0.0);
  double integral = 0.0;  // of the antiderivative, for the mean offset
  for (std::size_t i = 0; i + 1 < d.breaks_.size(); ++i) {
    const double mu = d.breaks_[i + 1] - d.breaks_[i];
    integral += d.cum_u0_[i] * mu + 0.5 * d.pc_slopes_[i] * mu * mu;
    d.cum_u0_[i + 1] = d.cum_u0_[i] + d.pc_slopes_[i] * mu;
  }
  d.u0_offset_ = integral;
  return d;
}

InitialData InitialData::piecewise_linear(std::vector<double> breakpoints,
                                          std::vector<PlSegment> segments) {
  check_breakpoints(breakpoints);
  if (segments.size() + 1 != breakpoints.size())
    validation_fail("need one (slope,curvature) pair per interval");
  const std::size_t n = segments.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = breakpoints[i + 1] - breakpoints[i];
    const double end_val = segments[i].slope + segments[i].curvature * mu;
    const double next = segments[(i + 1) % n].slope;
    if (std::abs(end_val - next) > 1e-10 * std::max(1.0, std::abs(end_val))) {
      std::ostringstream msg;
      msg << "u0' discontinuous at breakpoint alpha = " << breakpoints[i + 1]
          << " (left value " << end_val << ", right value " << next << ")";
      validation_fail(msg.str());
    }
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = breakpoints[i + 1] - breakpoints[i];
    mean += segments[i].slope * mu + 0.5 * segments[i].curvature * mu * mu;
  }
  if (std::abs(mean) > kMeanZeroTol) {
    std::ostringstream msg;
    msg << "slope mean-zero violation: integral of u0' = " << mean;
    validation_fail(msg.str());
  }

  InitialData d;
  d.class_ = DataClass::PiecewiseLinearSlope;
  d.breaks_ = std::move(breakpoints);
  d.pl_segments_ = std::move(segments);
  d.cum_u0_.assign(d.breaks_.size(), 0.0);
  double integral = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = d.breaks_[i + 1] - d.breaks_[i];
    const double g = d.pl_segments_[i].slope;
    const double q = d.pl_segments_[i].curvature;
    integral += d.cum_u0_[i] * mu + 0.5 * g * mu * mu + q * mu * mu * mu / 6.0;
    d.cum_u0_[i + 1] = d.cum_u0_[i] + g * mu + 0.5 * q * mu * mu;
  }
  d.u0_offset_ = integral;
  return d;
}

int InitialData::max_frequency() const {
  int k = 1;
  for (const auto& m : modes_) k = std::max(k, m.k);
  return k;
}

double InitialData::u0(double alpha) const {
  const double a = wrap_unit(alpha);
  if (class_ == DataClass::SmoothFourier) {
    double v = 0.0;
    for (const auto& m : modes_) {
      const double w = kTwoPi * m.k * a;
      v += m.cos_coeff * std::cos(w) + m.sin_coeff * std::sin(w);
    }
    return v;
  }
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), a);
  const std::size_t i =
      std::min<std::size_t>(breaks_.size() - 2,
                            std::max<std::ptrdiff_t>(0, it - breaks_.begin() - 1));
  const double s = a - breaks_[i];
  if (class_ == DataClass::PiecewiseConstantSlope)
    return cum_u0_[i] + pc_slopes_[i] * s - u0_offset_;
  const double g = pl_segments_[i].slope;
  const double q = pl_segments_[i].curvature;
  return cum_u0_[i] + g * s + 0.5 * q * s * s - u0_offset_;
}

double InitialData::slope(double alpha) const {
  const double a = wrap_unit(alpha);
  if (class_ == DataClass::SmoothFourier) {
    double v = 0.0;
    for (const auto& m : modes_) {
      const double f = kTwoPi * m.k;
      const double w = f * a;
      v += f * (-m.cos_coeff * std::sin(w) + m.sin_coeff * std::cos(w));
    }
    return v;
  }
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), a);
  const std::size_t i =
      std::min<std::size_t>(breaks_.size() - 2,
                            std::max<std::ptrdiff_t>(0, it - breaks_.begin() - 1));
  if (class_ == DataClass::PiecewiseConstantSlope) return pc_slopes_[i];
  return pl_segments_[i].slope + pl_segments_[i].curvature * (a - breaks_[i]);
}

double InitialData::curvature(double alpha) const {
  const double a = wrap_unit(alpha);
  if (class_ == DataClass::PiecewiseConstantSlope)
    throw std::domain_error(
        "curvature is undefined for piecewise-constant slope data");
  if (class_ == DataClass::SmoothFourier) {
    double v = 0.0;
    for (const auto& m : modes_) {
      const double f = kTwoPi * m.k;
      const double w = f * a;
      v += f * f * (-m.cos_coeff * std::cos(w) - m.sin_coeff * std::sin(w));
    }
    return v;
  }
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), a);
  const std::size_t i =
      std::min<std::size_t>(breaks_.size() - 2,
                            std::max<std::ptrdiff_t>(0, it - breaks_.begin() - 1));
  return pl_segments_[i].curvature;
}

double InitialData::third_derivative(double alpha) const {
  if (class_ != DataClass::SmoothFourier)
    throw std::domain_error("u0''' is only available for smooth data");
  const double a = wrap_unit(alpha);
  double v = 0.0;
  for (const auto& m : modes_) {
    const double f = kTwoPi * m.k;
    const double w = f * a;
    v += f * f * f * (m.cos_coeff * std::sin(w) - m.sin_coeff * std::cos(w));
  }
  return v;
}

bool SlopeExtrema::any_degenerate() const {
  for (const auto& s : maxima)
    if (s.degenerate) return true;
  for (const auto& s : minima)
    if (s.degenerate) return true;
  return false;
}

namespace {

// critical points of a smooth slope: roots of u0'' refined by bisection
std::vector<double> smooth_critical_points(const InitialData& d, int grid) {
  std::vector<double> roots;
  double prev_x = 0.0;
  double prev = d.curvature(0.0);
  for (int i = 1; i <= grid; ++i) {
    const double x = double(i) / grid;
    const double cur = d.curvature(x);
    if (prev == 0.0) roots.push_back(prev_x);
    else if ((prev < 0.0) != (cur < 0.0)) {
      double lo = prev_x, hi = x, flo = prev;
      for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = d.curvature(mid);
        if ((flo < 0.0) == (fm < 0.0)) { lo = mid; flo = fm; }
        else hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev = cur;
  }
  std::sort(roots.begin(), roots.end());
  // merge near-coincident roots
  std::vector<double> out;
  for (double r : roots) {
    if (out.empty() || r - out.back() > 1e-9) out.push_back(r);
  }
  // periodic duplicate at 1
  while (!out.empty() && out.back() > 1.0 - 1e-9) out.pop_back();
  return out;
}

}  // namespace

SlopeExtrema slope_extrema(const InitialData& data, int grid) {
  SlopeExtrema ex;
  const double value_tol = 1e-10;

  if (data.data_class() == DataClass::SmoothFourier) {
    grid = std::max(grid, 64 * data.max_frequency());
    const auto crit = smooth_critical_points(data, grid);
    if (crit.empty())
      throw std::invalid_argument("slope_extrema: no critical points found");
    double vmax = -1e300, vmin = 1e300, scale3 = 0.0;
    for (double c : crit) {
      const double v = data.slope(c);
      vmax = std::max(vmax, v);
      vmin = std::min(vmin, v);
      scale3 = std::max(scale3, std::abs(data.third_derivative(c)));
    }
    if (vmax - vmin < 1e-12)
      throw std::invalid_argument("slope_extrema: slope is constant");
    const double span = vmax - vmin;
    for (double c : crit) {
      const double v = data.slope(c);
      const double d3 = data.third_derivative(c);
      ExtremumSite site;
      site.location = c;
      site.curvature_coeff = 0.5 * d3;
      site.degenerate = std::abs(d3) <= 1e-8 * std::max(scale3, 1.0);
      if (v >= vmax - value_tol * span && d3 <= 0.0) ex.maxima.push_back(site);
      else if (v <= vmin + value_tol * span && d3 >= 0.0) ex.minima.push_back(site);
    }
    ex.M0 = vmax;
    ex.m0 = vmin;
  } else if (data.data_class() == DataClass::PiecewiseConstantSlope) {
    const auto& h = data.pc_slopes();
    const auto& b = data.breakpoints();
    const double vmax = *std::max_element(h.begin(), h.end());
    const double vmin = *std::min_element(h.begin(), h.end());
    if (vmax - vmin < 1e-12)
      throw std::invalid_argument("slope_extrema: slope is constant");
    const double tol = value_tol * (vmax - vmin);
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (h[i] < vmax - tol && h[i] > vmin + tol) continue;
      ExtremumSite site;
      site.is_interval = true;
      site.interval_left = b[i];
      site.interval_right = b[i + 1];
      site.measure = b[i + 1] - b[i];
      site.location = 0.5 * (b[i] + b[i + 1]);
      (h[i] >= vmax - tol ? ex.maxima : ex.minima).push_back(site);
    }
    ex.M0 = vmax;
    ex.m0 = vmin;
  } else {
    const auto& seg = data.pl_segments();
    const auto& b = data.breakpoints();
    const std::size_t n = seg.size();
    // candidate values: node values of u0' plus flat segments
    double vmax = -1e300, vmin = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
      vmax = std::max(vmax, seg[i].slope);
      vmin = std::min(vmin, seg[i].slope);
    }
    if (vmax - vmin < 1e-12)
      throw std::invalid_argument("slope_extrema: slope is constant");
    const double tol = value_tol * (vmax - vmin);
    auto push_site = [&](std::vector<ExtremumSite>& dst, const ExtremumSite& s) {
      for (const auto& o : dst)
        if (std::abs(o.location - s.location) < 1e-12) return;
      dst.push_back(s);
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (seg[i].curvature == 0.0 &&
          (seg[i].slope >= vmax - tol || seg[i].slope <= vmin + tol)) {
        ExtremumSite site;
        site.is_interval = true;
        site.interval_left = b[i];
        site.interval_right = b[i + 1];
        site.measure = b[i + 1] - b[i];
        site.location = 0.5 * (b[i] + b[i + 1]);
        push_site(seg[i].slope >= vmax - tol ? ex.maxima : ex.minima, site);
        continue;
      }
      // node at the left edge of segment i: slopes on both sides
      const std::size_t prev = (i + n - 1) % n;
      const double v = seg[i].slope;
      if (v >= vmax - tol || v <= vmin + tol) {
        ExtremumSite site;
        site.is_kink = true;
        site.location = b[i];
        site.kink_left_curv = seg[prev].curvature;
        site.kink_right_curv = seg[i].curvature;
        site.degenerate =
            seg[prev].curvature == 0.0 || seg[i].curvature == 0.0;
        push_site(v >= vmax - tol ? ex.maxima : ex.minima, site);
      }
    }
    ex.M0 = vmax;
    ex.m0 = vmin;
  }

  if (!(ex.m0 < 0.0 && ex.M0 > 0.0))
    throw std::invalid_argument(
        "slope_extrema: mean-zero nonconstant slope must satisfy m0 < 0 < M0");
  auto by_loc = [](const ExtremumSite& a, const ExtremumSite& b) {
    return a.location < b.location;
  };
  std::sort(ex.maxima.begin(), ex.maxima.end(), by_loc);
  std::sort(ex.minima.begin(), ex.minima.end(), by_loc);
  if (ex.maxima.empty() || ex.minima.empty())
    throw std::invalid_argument("slope_extrema: failed to locate extrema");
  return ex;
}

}  // namespace pj::data
