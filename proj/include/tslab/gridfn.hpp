#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "tslab/geometry.hpp"

namespace tslab {

// Product grid X x {t_j} with the measure d(mu) dt/t discretized as
// h^dim * log_weight per cell, plus a cached table of discrete ball volumes
// V(y, t_j) = mu(B(y, t_j)).  V is computed from the clipped grid ball, which
// is what makes the Fubini identity and the V^r isometries exact.
class HalfSpaceGrid {
 public:
  static std::shared_ptr<const HalfSpaceGrid> make(SpaceGrid space,
                                                   TimeLevels levels);

  const SpaceGrid& space() const { return space_; }
  const TimeLevels& levels() const { return levels_; }
  std::int64_t num_cells() const { return space_.num_points() * levels_.count; }
  std::int64_t cell(std::int64_t s, int j) const { return s * levels_.count + j; }
  double cell_weight() const;  // h^dim * log_weight
  double volume(std::int64_t s, int j) const { return vol_[cell(s, j)]; }
  const std::vector<double>& volume_table() const { return vol_; }

  bool same_layout(const HalfSpaceGrid& other) const;

 private:
  HalfSpaceGrid(SpaceGrid space, TimeLevels levels);
  SpaceGrid space_;
  TimeLevels levels_;
  std::vector<double> vol_;
};

using GridPtr = std::shared_ptr<const HalfSpaceGrid>;

// Function on the half-space grid, spatial-major and level-minor.  Values are
// real unless an imaginary part is attached; norms only ever consume |f|.
struct GridFunction {
  GridPtr grid;
  std::vector<double> re;
  std::vector<double> im;  // empty for real-valued functions

  static GridFunction zeros(GridPtr g);
  bool is_complex() const { return !im.empty(); }
  std::int64_t cells() const { return static_cast<std::int64_t>(re.size()); }
  double abs2(std::int64_t c) const {
    double v = re[c] * re[c];
    if (!im.empty()) v += im[c] * im[c];
    return v;
  }
  double& at(std::int64_t s, int j) { return re[grid->cell(s, j)]; }
  double at(std::int64_t s, int j) const { return re[grid->cell(s, j)]; }

  std::vector<double> magnitudes() const;
  void ensure_complex();
};

void check_same_grid(const GridFunction& a, const GridFunction& b,
                     const char* what);

// Integral of f over an explicit region against d(mu) dt/t.  Real input only.
double integrate(const GridFunction& f, const Region& region);

// Pointwise multiplication by V(y, t)^r.
GridFunction v_multiply(const GridFunction& f, double r);

// Pointwise multiplication by t_j^e.
GridFunction t_multiply(const GridFunction& f, double e);

// |f|^M, with 0^M := 0.  Output is real.
GridFunction power(const GridFunction& f, double M);

// Zero outside X x (a, b), both endpoints open.
GridFunction truncate(const GridFunction& f, double a, double b);

// Zero outside X x [a, b): lower endpoint kept.  Bands [r^(k-1), r^k) built
// this way partition the level set exactly even when levels sit on band
// boundaries, which open truncation would drop.
GridFunction band_truncate(const GridFunction& f, double a, double b);

// Sesquilinear pairing <f, g> = sum f * conj(g) * h^dim * log_weight.
std::complex<double> pairing(const GridFunction& f, const GridFunction& g);

// Plain L^q(X^+) norm; q = inf gives max |f|.
double lq_norm(const GridFunction& f, double q);

GridFunction scale(const GridFunction& f, double c);
GridFunction add(const GridFunction& f, const GridFunction& g);
GridFunction sub(const GridFunction& f, const GridFunction& g);

}  // namespace tslab
