#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tslab/atoms.hpp"
#include "tslab/gridfn.hpp"
#include "tslab/interp.hpp"
#include "tslab/verify.hpp"

namespace tslab {

// Every writer lands in a temporary file next to the target and renames it
// into place, so a crashed run never leaves a half-written file behind.
void atomic_write_text(const std::string& path, const std::string& content);

// Grid description: one key=value line per field, in the order
// n, extents, h, origin, t_min, m, J; extents and origin are
// space-separated lists.
void write_grid(const std::string& path, const HalfSpaceGrid& grid);
GridPtr read_grid(const std::string& path);

// Text layout: header line
//   tslab-function grid=<ref> complex=<0|1>
// then one line per spatial point holding its level values in order
// (pairs "re im" when complex).  Binary layout: 8-byte magic TSLABF01,
// u64 grid-ref length, the ref bytes, u64 spatial count, u64 level count,
// u64 flags (bit 0 = complex), then the value doubles (re block, im block),
// integers and doubles little-endian.  A grid ref is resolved relative to
// the directory holding the function file.
void write_function(const std::string& path, const GridFunction& f,
                    const std::string& grid_ref, bool binary = false);
GridFunction read_function(const std::string& path);

// Directory layout: `manifest` with one header line and one line per atom
// (index, lambda, band exponent k, ball, file name), plus one function file
// per atom.
void write_decomposition(const std::string& dir, const AtomicDecomposition& d,
                         const std::string& grid_ref);

struct StoredDecomposition {
  double p = 1.0, q = 2.0, s = 0.0;
  double lp_sum = 0.0;
  double residual_l2 = 0.0;
  std::vector<double> lambda;
  std::vector<long long> atom_k;
  std::vector<Atom> atoms;
};
StoredDecomposition read_decomposition(const std::string& dir);

// CSV and summary renderings; all floating-point values use 17 significant
// digits.  Ratio rows with a zero denominator leave the ratio column empty.
std::string ratio_csv(const RatioReport& rep);
std::string ratio_summary(const RatioReport& rep);
std::string kcurve_csv(const KCurve& kc);
std::string identity_csv(const IdentityReport& rep);
std::string identity_summary(const IdentityReport& rep);

// Flat key=value configuration; '#' opens a comment, blank lines are
// skipped, later duplicates win.
struct Config {
  std::vector<std::pair<std::string, std::string>> items;
  bool has(const std::string& key) const;
  std::string get(const std::string& key,
                  const std::string& fallback = "") const;
  double get_num(const std::string& key, double fallback) const;
};
Config read_config(const std::string& path);

}  // namespace tslab
