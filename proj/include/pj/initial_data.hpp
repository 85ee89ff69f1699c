#ifndef PJ_INITIAL_DATA_HPP
#define PJ_INITIAL_DATA_HPP

#include <string>
#include <vector>

// The three admissible classes of periodic, mean-zero initial data and
// the location of the global slope extrema.  InitialData is immutable
// after construction and shareable across threads.

namespace pj::data {

enum class DataClass {
  SmoothFourier,            // u0 a finite trigonometric sum
  PiecewiseConstantSlope,   // u0' piecewise constant (simple function)
  PiecewiseLinearSlope      // u0' continuous piecewise linear
};

std::string to_string(DataClass c);

struct FourierMode {
  int k;             // frequency: contributes a*cos(2*pi*k*a) + b*sin(2*pi*k*a) to u0
  double cos_coeff;
  double sin_coeff;
};

// Segment of a piecewise-linear slope: u0'(x) = slope + curvature*(x - left edge).
struct PlSegment {
  double slope;
  double curvature;
};

class InitialData {
 public:
  // Validating factories.  Throw std::invalid_argument with the
  // offending location on mean-zero violations, unsorted breakpoints,
  // or a discontinuous piecewise-linear slope.
  static InitialData fourier(std::vector<FourierMode> modes);
  static InitialData piecewise_constant(std::vector<double> breakpoints,
                                        std::vector<double> slopes);
  static InitialData piecewise_linear(std::vector<double> breakpoints,
                                      std::vector<PlSegment> segments);

  DataClass data_class() const { return class_; }

  // Pointwise evaluation with periodic extension beyond [0,1].
  double u0(double alpha) const;
  double slope(double alpha) const;       // u0'
  double curvature(double alpha) const;   // u0''; undefined for PC slope data
  double third_derivative(double alpha) const;  // u0'''; smooth data only

  bool has_curvature() const { return class_ != DataClass::PiecewiseConstantSlope; }

  // u0 is normalized to zero mean over one period.
  double u0_mean() const { return 0.0; }

  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& pc_slopes() const { return pc_slopes_; }
  const std::vector<PlSegment>& pl_segments() const { return pl_segments_; }
  const std::vector<FourierMode>& modes() const { return modes_; }

  // largest frequency present (smooth data), for grid sizing
  int max_frequency() const;

 private:
  InitialData() = default;

  DataClass class_ = DataClass::SmoothFourier;
  std::vector<FourierMode> modes_;

  // PC/PL representation: breakpoints 0 = x_0 < ... < x_n = 1.
  std::vector<double> breaks_;
  std::vector<double> pc_slopes_;          // PC: slope per segment
  std::vector<PlSegment> pl_segments_;     // PL: (slope, curvature) per segment
  std::vector<double> cum_u0_;             // antiderivative values at breakpoints
  double u0_offset_ = 0.0;                 // subtracted so that u0 has zero mean
};

// One location (or interval) where the slope attains a global extremum.
struct ExtremumSite {
  double location = 0.0;          // representative point (interval midpoint)
  double curvature_coeff = 0.0;   // u0'''(location)/2 for smooth data (C1 or C2)
  bool degenerate = false;        // smooth data with u0''' ~ 0 at the extremum
  bool is_interval = false;       // PC (or flat PL segment): extremum on a set
  bool is_kink = false;           // PL: extremum at a slope-derivative jump
  double interval_left = 0.0;
  double interval_right = 0.0;
  double measure = 0.0;           // Lebesgue measure of the attaining set
  double kink_left_curv = 0.0;    // PL kinks: one-sided u0'' values
  double kink_right_curv = 0.0;
};

struct SlopeExtrema {
  double M0 = 0.0;   // global max of u0', > 0
  double m0 = 0.0;   // global min of u0', < 0
  std::vector<ExtremumSite> maxima;  // sorted by location
  std::vector<ExtremumSite> minima;
  bool any_degenerate() const;
};

// Global extrema of u0' with all attaining locations.  Smooth data is
// scanned on a dense grid (default 4096 points) and refined by
// bisection on u0''.  Throws std::invalid_argument for constant slope.
SlopeExtrema slope_extrema(const InitialData& data, int grid = 4096);

}  // namespace pj::data

#endif
