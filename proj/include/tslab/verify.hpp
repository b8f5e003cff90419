#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tslab/atoms.hpp"
#include "tslab/functionals.hpp"
#include "tslab/gridfn.hpp"

namespace tslab {

// Evidence object for a one-sided norm comparison over a corpus.  Ratios are
// collected only where the denominator is positive; zero denominators are
// counted, never folded in as infinities.
struct RatioReport {
  std::string suite;
  std::string params;
  std::vector<double> numerator;
  std::vector<double> denominator;
  std::vector<double> ratio;
  double min_ratio = 0.0;
  double median_ratio = 0.0;
  double max_ratio = 0.0;
  std::int64_t excluded_zero = 0;
  bool refinement_stable = false;

  // Recomputes ratio/min/median/max from the numerator and denominator lists.
  void finalize();
};

// Marks `base` stable when the two max ratios agree within `factor` (both
// zero also counts); returns the flag it stored.
bool refinement_check(RatioReport& base, const RatioReport& refined,
                      double factor = 2.0);

// Embedding ratios || f ||_{T^{p1,q}_{s1}} / || f ||_{T^{p0,q}_{s0}}.
// Requires p0 < p1 and the exponent relation s1 - s0 = delta(p0, p1); the
// variant with p1 = inf, q in (1, inf) and alpha > 0 instead requires
// (s1 + alpha) - s0 = delta(p0, inf).  Violations raise ConfigError naming
// the relation.
RatioReport hls_suite(const std::vector<GridFunction>& corpus, double p0,
                      double p1, double q, double s0, double s1,
                      double alpha = 0.0, Mode mode = Mode::exact);

// Pairing ratios |<f, g>| / (|| f ||_{T^{p,q}_s} || g ||_{T^{p',q'}_{-s}})
// over index-aligned pairs; p in [1, inf), q in (1, inf).
RatioReport duality_suite(const std::vector<GridFunction>& fs,
                          const std::vector<GridFunction>& gs, double p,
                          double q, double s, Mode mode = Mode::exact);

// Atom-side pairing step: a validated T^{p,q}_s atom with p <= 1 satisfies
//   |<a, g>| <= || g ||_{T^{inf,q'}_{-s; a}},   a = 1/p - 1,
// with constant exactly 1.  The atom's ball joins the Carleson sup family so
// the witnessing ball is present.  When q = 1 (so q' = inf) the ball-sup
// display absorbs one extra power of mu(B) and the exponent shifts to
// 1/p - 2.  Atoms take their exponents from their own fields; g cycles
// through gs by index.
struct AtomDualityReport {
  RatioReport report;
  double max_slack = 0.0;  // max over atoms of ratio - 1
  bool pass = false;       // max_slack <= 1e-9
};
AtomDualityReport duality_atom_suite(const std::vector<Atom>& atoms,
                                     const std::vector<GridFunction>& gs,
                                     Mode mode = Mode::exact);

// Equality case of the pairing bound: g = V^{-2s} f gives
// |<f, g>| = || f ||_{T^{2,2}_s} || g ||_{T^{2,2}_{-s}} exactly.
struct ConjugatePairing {
  double lhs = 0.0;  // |<f, g>|
  double rhs = 0.0;  // product of the two norms
};
ConjugatePairing conjugate_pair_check(const GridFunction& f, double s,
                                      Mode mode = Mode::exact);

struct Cylinder {
  Ball ball;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

// Localization bounds for cylindrically supported functions.  For each
// corpus f restricted to K, the ratio || 1_K f ||_{T^{p,inf}} / max_K |f|
// must land between the two proof constants
//   lower: min over cells (y, t) of K of mu(B(y, t))^{1/p}
//   upper: mu{x : the cone over x meets K}^{1/p}  <=  V(c_K, r_K + t_hi)^{1/p},
// the hit set enumerated exactly.  The cylinder must fit inside the grid:
// a clipped ball or time window raises std::invalid_argument.
struct CylinderReport {
  RatioReport report;
  double upper_constant = 0.0;
  double hit_constant = 0.0;
  double lower_constant = 0.0;
  std::int64_t hit_count = 0;
  double max_upper_slack = 0.0;  // max of lhs - linf * hit_constant
  double min_lower_slack = 0.0;  // min of lhs - linf * lower_constant
  bool pass = false;
};
CylinderReport cylinder_suite(const Cylinder& K,
                              const std::vector<GridFunction>& corpus,
                              double p, Mode mode = Mode::exact);

// f restricted to the region's cells, zero elsewhere.
GridFunction restrict_to(const GridFunction& f, const Region& region);

// Embedding ratios || f ||_{T^{p,q}_s} / || f ||_{Z^{p,q}_s} for p <= q,
// Whitney parameters (c0, c1).
RatioReport zt_suite(const std::vector<GridFunction>& corpus, double p,
                     double q, double s, double c0, double c1,
                     Mode mode = Mode::exact);

// Same physical box at twice the resolution: h/2 with extents doubled onto
// the shared endpoints, twice the levels per octave with the top level kept.
// Sampling an analytic corpus spec on the refined grid lands on a superset
// of the base lattice.
GridPtr refine_grid(const GridPtr& grid);

// The four grid-exact identities, each reported as the max relative error
// over the corpus and a fixed internal exponent battery:
//   fubini    T^{q,q}_s coincides with L^q of V^{-s} f
//   isometry  V^r maps T^{p,q}_s to T^{p,q}_{s+r} isometrically
//   convex    || |f|^M ||_{T^{p/M,q/M}_{Ms}} = || f ||^M_{T^{p,q}_s},
//             M in {1/2, 2, 3}, including a T^{inf,inf} case
//   adjoint   <f, g> = <V^{-s} f, V^{s} g>
// These hold on the grid by construction; pass demands all four stay below
// the 1e-10 relative tolerance, which configuration can never loosen.
struct IdentityReport {
  double fubini_err = 0.0;
  double isometry_err = 0.0;
  double convex_err = 0.0;
  double adjoint_err = 0.0;
  double tolerance = 1e-10;
  bool pass = false;
};
IdentityReport identity_suite(const std::vector<GridFunction>& corpus,
                              Mode mode = Mode::exact);

}  // namespace tslab
