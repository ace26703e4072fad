#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "adasamp/model.hpp"

namespace adasamp {

/// Gaussian class clusters with a label-noise subset placed between
/// clusters. Class c receives a share proportional to (1 - imbalance)^c.
struct SynthConfig {
  std::size_t n = 1000;
  std::size_t dim = 5;
  std::size_t classes = 2;
  double imbalance = 0.0;    ///< in [0, 1)
  double noise = 0.0;        ///< fraction of examples moved to a boundary and relabeled
  double separation = 4.0;   ///< distance between cluster centers, in cluster std units
  double boundary_spread = 0.25;  ///< std of the noisy points around their anchor
  double boundary_offset = 0.0;   ///< in [0, 1): anchor moves from the midpoint toward the claimed center
  double radius = 1.0;       ///< rescale so max ||x|| equals this; 0 keeps raw scale
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthData {
  Dataset data;
  std::vector<bool> flipped;  ///< true for the relabeled boundary examples
};

SynthData synthesize(const SynthConfig& cfg);
Dataset synth_data(const SynthConfig& cfg);

/// Reads `label,f1,...,fd`. Errors cite the 1-based data row.
Dataset load_csv(const std::string& path);
Dataset read_csv(std::istream& in);

/// Writes every value with 17 significant digits.
void write_csv(const Dataset& ds, const std::string& path);
void write_csv(const Dataset& ds, std::ostream& out);

/// First `n_train` examples and the rest.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::size_t n_train);

/// printf("%.17g").
std::string format_double(double v);

}  // namespace adasamp
