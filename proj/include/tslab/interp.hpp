#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tslab/functionals.hpp"

namespace tslab {

// Couple (L^q(mu), L^q(w^q mu)) on a finite index set:
// ||g||_0 = (sum |g_i|^q mu_i)^{1/q}, ||g||_1 = (sum |g_i w_i|^q mu_i)^{1/q}.
struct WeightedCouple {
  double q = 2.0;
  std::vector<double> measure;
  std::vector<double> weight;

  std::size_t size() const { return measure.size(); }
};

void validate(const WeightedCouple& c);

double couple_norm0(const WeightedCouple& c, const std::vector<double>& f);
double couple_norm1(const WeightedCouple& c, const std::vector<double>& f);

enum class KMethod { convex_solve, brute_force, split_formula };

// Raised when the projected coordinate descent hits its iteration cap.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& msg, double best, double gap)
      : std::runtime_error(msg), best_value(best), gap_estimate(gap) {}
  double best_value;
  double gap_estimate;
};

// K(t, f) = inf over pointwise splits f = phi0 + phi1 of ||phi0||_0 + t ||phi1||_1.
// convex_solve: projected coordinate descent over the split fractions,
//   warm-started by a scalar multiplier search along the split frontier,
//   gradient tolerance 1e-10, cap 1e4 sweeps; requires q >= 1.
// brute_force: 101-value grid per coordinate, exhausted (with exact pruning
//   above 4 points); at most 8 points, any q > 0.
// split_formula: the hard threshold split at t*w <= 1, an upper bound for K
//   within a bounded factor.
double k_functional(double t, const std::vector<double>& f,
                    const WeightedCouple& c,
                    KMethod method = KMethod::convex_solve);

// Minimizes ||phi0||_0^{p0} + t ||phi1||_1^{p1}; solved by the same descent
// when p0, p1, q >= 1 and by brute force otherwise.
double k_functional_powered(double t, const std::vector<double>& f,
                            const WeightedCouple& c, double p0, double p1);

struct KCurve {
  std::vector<double> t;
  std::vector<double> K;
  KMethod method = KMethod::convex_solve;
};

// Geometric t-samples centered at the balance point ||f||_0 / ||f||_1.
// K is nondecreasing and concave with K(t) <= min(||f||_0, t ||f||_1);
// property tests assert this on the samples.
KCurve k_curve(const std::vector<double>& f, const WeightedCouple& c,
               int samples = 32, KMethod method = KMethod::convex_solve);

struct GilbertReport {
  double disc = 0.0;   // band sum: ell^p over k of r^{-k theta} ||f restricted
                       // to weight band (r^-k, r^-k+1]||_{L^q(mu)}
  double cont2 = 0.0;  // integral of (s^{1-theta} || f 1_{w <= 1/s} ||_{L^q(w^q mu)})^p ds/s
  double cont3 = 0.0;  // integral of (s^{-theta}  || f 1_{w > 1/s}  ||_{L^q(mu)})^p ds/s
  std::int64_t bands = 0;
  bool degenerate_weight = false;
};

// Three equivalent interpolation norms for (L^q(mu), L^q(w^q mu))_{theta,p}.
// The band sum is an exact finite sum; the two integrals use a geometric
// s-grid (pts_per_octave samples per octave) covering the weight range padded
// by r^4, with the exactly-constant tails integrated in closed form.
GilbertReport gilbert_norms(const std::vector<double>& f,
                            const WeightedCouple& c, double theta, double p,
                            double r, int pts_per_octave = 16);

enum class WeightMode {
  volume,  // weight V(y,t)^-s inside the norms
  tpower,  // weight t^(-n s), the AD-regular model power
};

struct TentInterpReport {
  double p_theta = 0.0;
  double s_theta = 0.0;
  double infty_norm = 0.0;  // tau-weighted upper truncations, measured at s1
  double zero_norm = 0.0;   // tau-weighted lower truncations, measured at s0
  double seq_norm = 0.0;    // band sums [r^(k-1), r^k), measured at s0
  double ratio_infty_zero = 0.0;
  double ratio_infty_seq = 0.0;
  double ratio_zero_seq = 0.0;
  std::int64_t seq_bands = 0;
};

// The three truncation characterizations of the real interpolation norm
// between T^{p0,q}_{s0} and T^{p1,q}_{s1}.  With N(tau) piecewise constant
// between consecutive time levels, the tau-integrals are evaluated in closed
// form piece by piece; the band sum runs over bands [r^(k-1), r^k) meeting
// the levels with factor r^(-n k theta (s1-s0)).  s1 < s0 is reduced to
// s1 > s0 by swapping the endpoint spaces and theta -> 1-theta.
TentInterpReport tent_interp_norms(const GridFunction& f, double p0, double p1,
                                   double q, double s0, double s1, double theta,
                                   double r, WeightMode wm = WeightMode::volume,
                                   Mode mode = Mode::exact);

struct TZReport {
  double p_theta = 0.0;
  double s_theta = 0.0;
  double seq_norm = 0.0;  // band characterization, r = c1, aperture c0/c1
  double z = 0.0;         // z_norm(f, p_theta, q, s_theta, c0, c1)
  double ratio = 0.0;
  bool defined = false;   // both sides positive
  std::int64_t seq_bands = 0;
};

TZReport t_z_equivalence(const GridFunction& f, double p0, double p1, double q,
                         double s0, double s1, double theta, double c0,
                         double c1, WeightMode wm = WeightMode::volume,
                         Mode mode = Mode::exact);

// Restriction of |f| to the cone at x, realized as a weighted couple with
// mu_i = cell_weight * V^(-q s0 - 1) and w_i = V^(-(s1-s0)), so that
// couple_norm0/1 reproduce the cone-localized L^q_{s0} / L^q_{s1} norms.
struct ConeRestriction {
  std::vector<std::int64_t> cells;
  WeightedCouple couple;
  std::vector<double> values;
};

ConeRestriction cone_restriction(const GridFunction& f, std::int64_t x,
                                 double q, double s0, double s1,
                                 double aperture = 1.0);

}  // namespace tslab
