#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "tslab/functionals.hpp"

namespace tslab {

// Function essentially supported in the tent of its ball, stored sparsely as
// (cell, value) pairs with cells ascending.
struct Atom {
  GridPtr grid;
  Ball ball;
  double p = 1.0;
  double q = 2.0;
  double s = 0.0;
  std::vector<std::int64_t> cells;
  std::vector<std::complex<double>> values;

  GridFunction to_grid_function() const;
};

struct AtomReport {
  bool supported_in_tent = false;
  double size_norm = 0.0;   // T^{q,q}_s norm of the atom
  double size_bound = 0.0;  // mu(B)^{delta(p,q)}
  double slack = 0.0;       // size_bound - size_norm
  double unit_norm = -1.0;  // tent_norm(a, (p,q,s)); -1 when skipped
  bool valid = false;
};

// Checks tent support exactly and the size bound up to relative 1e-9.
// with_unit_norm additionally evaluates the (costlier) T^{p,q}_s norm, whose
// bound by 1 follows from the other two checks.
AtomReport atom_validate(const Atom& a, bool with_unit_norm = true);

// Vitali-type cover of an open set O: greedily selected centers with radii
// r(x) = dist(x, O^c)/10 whose balls are pairwise disjoint (center distance
// at least the summed radii), plus the normalized hat partition subordinate
// to the double balls.
struct CoveringPartition {
  std::vector<std::int64_t> centers;
  std::vector<double> radii;
  // phi_i as sparse (point, value) lists; supp phi_i lies in B(x_i, 2 r_i)
  // and sum_i phi_i = 1 on O.
  std::vector<std::vector<std::pair<std::int64_t, double>>> phi;
  int overlap = 0;  // observed max number of overlapping supports
};

CoveringPartition covering_partition(const SpaceGrid& g,
                                     const std::vector<char>& O);

struct BandInfo {
  int k = 0;
  std::int64_t level_set_points = 0;   // |O^k|
  double level_set_measure = 0.0;      // mu(O^k)
  std::int64_t selected_centers = 0;   // covering size (0 for full-grid bands)
  std::int64_t atom_count = 0;         // atoms actually emitted
  int overlap = 0;
  bool full_grid = false;
};

struct AtomicDecomposition {
  double p = 1.0;
  double q = kInf;
  double s = 0.0;
  std::vector<double> lambda;
  std::vector<Atom> atoms;
  std::vector<int> atom_k;       // band exponent per atom
  std::vector<BandInfo> bands;   // k descending
  double lp_sum = 0.0;           // sum of lambda^p
  double residual_l2 = 0.0;      // relative L^2(X+) reconstruction error
  double residual_sup = 0.0;     // relative max-norm reconstruction error
};

// Level-set atomic decomposition of f driven by G = A^q(V^-s f) (A^inf for
// q = inf).  Requires p in (0,1], q >= p, and spatial support away from the
// grid boundary.  Reconstruction sum lambda * atom = f holds cellwise by
// construction.
AtomicDecomposition decompose(const GridFunction& f, double p, double q,
                              double s = 0.0);

}  // namespace tslab
