#pragma once

#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace restrlab {

using Rational = boost::multiprecision::cpp_rational;

// Exact value of x when x = n/d with d <= max_den, otherwise nullopt.
std::optional<Rational> as_rational(double x, long max_den = 1000);
double to_double(const Rational& r);

struct ExactThresholds {
  Rational h, inv_p0, inv_s0, p1;
};

struct ExponentData {
  double m1 = 2, m2 = 2;
  double mbar = 2, m = 2;  // max and min of (m1, m2)
  double h = 1;            // 1/h = 1/m1 + 1/m2
  double inv_p0 = 0, inv_s0 = 0;
  double p0 = 0, s0 = 0;
  double p1 = 0;  // where the second condition meets the 1/p axis
  double pc = 10.0 / 3.0;
  std::optional<ExactThresholds> exact;
};

ExponentData exponent_data(double m1, double m2);

// True when both boundary lines pass through (1/s0, 1/p0). Exact for
// rational inputs, 1e-12 otherwise.
bool critical_point_consistent(double m1, double m2);

enum class Figure { Fig2, Fig3, Fig4, Fig5 };
const char* to_string(Figure f);
Figure region_classify(double m1, double m2);

struct RegionVerdict {
  double inv_s = 0, inv_p = 0;
  bool weak_type = false;    // the three hypotheses of the main theorem
  bool admissible = false;   // strong type
  bool strong_type_unknown = false;
  std::vector<std::string> failed;
  std::vector<std::string> necessary_violations;
  Figure figure = Figure::Fig2;
};

// Inputs are reciprocals so that s = 1 and p = infinity are representable.
RegionVerdict admissible(double m1, double m2, double inv_s, double inv_p);

inline double p_star(double p) { return p <= 2.0 ? p : p / (p - 1.0); }

// Threshold 1 + M/(M+m) of the linear reduction (bilinear exponent p).
double reduction_p0(double m1, double m2);

struct QChoice {
  double lo = 0, hi = 0;  // open window for 1/q'
  double inv_qprime = 0;
  double q = 2;
};
QChoice choose_q(double m1, double m2, double p);

struct RChecks {
  bool one = false, one_eps = false, two = false, three = false, threesym = false, four = false;
  bool r_star_ge1 = false, alpha_pos = false;
  bool all() const {
    return one && one_eps && two && three && threesym && four && r_star_ge1 && alpha_pos;
  }
};

struct RChoice {
  double J_lo = 0, J_hi = 0;
  double inv_r = 0;
  bool r_infinite = false;
  double r_star = 0, alpha = 0;
  double q = 2;
  double eps_used = 0;
  RChecks checks;
};
RChoice choose_r(double m1, double m2, double p, double eps = 1e-3);

}  // namespace restrlab
