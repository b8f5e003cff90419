#pragma once

#include <cstdint>
#include <vector>

#include "tslab/gridfn.hpp"

namespace tslab {

// exact: direct summation with the integer membership predicate.
// fast: per-row prefix sums over the same membership sets (and, for the
// Carleson sup, radii restricted to a geometric sqrt(2) progression).  Both
// modes visit identical cell sets; results differ only by summation order.
enum class Mode { exact, fast };

struct NormParams {
  double p = 2.0;
  double q = 2.0;
  double s = 0.0;
  double alpha = 0.0;     // Carleson exponent, p = inf only
  double aperture = 1.0;  // cone aperture, p < inf only
};
void validate(const NormParams& np);

struct FieldOnX {
  std::vector<double> v;
};

// A^q f(x) = (sum over the aperture cone of |f(y,t)|^q / V(y,t) dmu dt/t)^(1/q),
// with A^inf the cone maximum.
FieldOnX lusin(const GridFunction& f, double q, double aperture = 1.0,
               Mode mode = Mode::exact);

// All balls with grid-point centers and radii k*h/2, 1 <= k <= ceil(2L/h).
// fast mode thins the radius list to a geometric sqrt(2) progression (always
// keeping the largest radius), but only once the full list exceeds 64 radii,
// so on small grids both modes run the identical ball family.
std::vector<double> carleson_radii(const SpaceGrid& g, Mode mode);

struct CarlesonField {
  std::vector<double> v;
  std::vector<Ball> argmax;  // maximizing ball per point
};

// C^q_alpha f(x) = sup over family balls containing x of
//   mu(B)^(-alpha) * (mu(B)^(-1) * int_{T(B)} |f|^q dmu dt/t)^(1/q),
// with the q = inf variant mu(B)^(-(1+alpha)) * max_{T(B)} |f|.
// extra_balls joins the sup family (used when a bound must be witnessed by a
// specific ball, e.g. an atom's ball).
CarlesonField carleson(const GridFunction& f, double q, double alpha,
                       Mode mode = Mode::exact,
                       const std::vector<Ball>* extra_balls = nullptr);
double carleson_norm(const GridFunction& f, double q, double alpha,
                     Mode mode = Mode::exact,
                     const std::vector<Ball>* extra_balls = nullptr);

// The Carleson expression for one specific ball (no sup).
double carleson_ball_value(const GridFunction& f, double q, double alpha,
                           const Ball& b, Mode mode = Mode::exact);

// Tent-space quasi-norm of f for the given exponents:
//   p < inf:           || A^q(V^-s f) ||_Lp(X)
//   p = inf, q < inf:  max_x C^q_alpha(V^-s f)
//   p = q = inf:       alpha = 0 reads || V^-s f ||_Linf(X+); alpha != 0 uses
//                      the ball-sup display sup_B mu(B)^-(1+alpha) max_T(B).
double tent_norm(const GridFunction& f, const NormParams& np,
                 Mode mode = Mode::exact,
                 const std::vector<Ball>* extra_balls = nullptr);

// W^q average of |f| over B(x, c0 t) x (t/c1, c1 t) with the plain product
// measure dmu(xi) dtau, discretized as mu(xi) * tau_l * log_weight per cell.
GridFunction whitney_average(const GridFunction& f, double q, double c0,
                             double c1, Mode mode = Mode::exact,
                             std::int64_t* clipped_cells = nullptr);

// || W^q(V^-s f) ||_Lp(X+).
double z_norm(const GridFunction& f, double p, double q, double s, double c0,
              double c1, Mode mode = Mode::exact,
              std::int64_t* clipped_cells = nullptr);

// Dyadic characterization: (sum over Whitney cubes of
//   ell(Q)^(dim * (1 - p*s)) * [ |f|^q ]_cube^(p/q) )^(1/p),
// cube averages against the plain dmu dtau measure.
double z_norm_dyadic(const GridFunction& f, double p, double q, double s);

}  // namespace tslab
