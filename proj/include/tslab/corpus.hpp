#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tslab/gridfn.hpp"

namespace tslab {

enum class Profile {
  cylindrical_smooth,
  cylindrical_rough,
  single_tent,
  multi_bump,
  atom_like,
};

Profile profile_from_string(const std::string& name);
std::string profile_name(Profile p);

// Analytic description of one corpus function.  All parameters live in
// continuum coordinates so the same spec can be sampled on a refined grid;
// centers sit on the base lattice, which every refinement contains.
struct BumpParam {
  std::vector<double> center;
  double radius = 1.0;          // spatial
  double tau = 1.0;             // time center
  double sigma = 0.5;           // log-time half-width
  double amp = 1.0;
  double freq_x = 0.0, freq_t = 0.0, phase_x = 0.0, phase_t = 0.0;
};

struct FunctionSpec {
  Profile profile = Profile::cylindrical_smooth;
  std::vector<BumpParam> bumps;       // smooth / rough / multi
  std::vector<double> tent_center;    // single_tent / atom_like
  double tent_radius = 0.0;
  double amp = 1.0;
  double atom_p = 1.0, atom_q = 2.0, atom_s = 0.0;
};

struct CorpusSpec {
  std::uint64_t seed = 1;
  int count = 0;
  double base_h = 1.0;                 // lattice the draws are snapped to
  std::vector<double> x_lo, x_hi;      // usable spatial box
  double t_lo = 0.0, t_hi = 0.0;       // usable time band
  double margin_aperture = 2.0;
  std::vector<FunctionSpec> functions;
};

// Draws `count` function specs with supports inside the grid's safety
// margins: the top and bottom two levels are avoided and the spatial box is
// shrunk by max_aperture * t_hi so cones over the support stay unclipped.
CorpusSpec make_corpus_spec(const HalfSpaceGrid& grid, int count,
                            std::uint64_t seed,
                            std::vector<Profile> mix = {},
                            double max_aperture = 2.0);

GridFunction sample_function(const FunctionSpec& fs, const GridPtr& grid);
std::vector<GridFunction> sample_corpus(const CorpusSpec& spec,
                                        const GridPtr& grid);

// Convenience: spec + sample on the same grid.
std::vector<GridFunction> random_corpus(const GridPtr& grid, int count,
                                        std::uint64_t seed,
                                        std::vector<Profile> mix = {},
                                        double max_aperture = 2.0);

}  // namespace tslab
