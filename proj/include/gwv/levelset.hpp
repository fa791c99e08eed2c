#pragma once

#include <vector>

#include "gwv/curves.hpp"
#include "gwv/field.hpp"

namespace gwv {

struct ContourSet {
  std::vector<std::vector<Vec2>> closed;
  std::vector<std::vector<Vec2>> open;  // chains ending on the grid boundary
};

// Marching-squares contours of {u = t}. Saddle cells are disambiguated by the
// cell-center average.
ContourSet extract_contours(const ScalarField& u, double t);

struct LevelExtractOptions {
  // target sample spacing; 0 means h/2
  double target_ds = 0.0;
  int min_samples = 16;
  // contours shorter than this many cells are dropped as grid noise
  double min_length_cells = 4.0;
  bool reject_open = true;
};

// One curve system per level, uniform-arclength resampled. Open contours
// throw (scenes are compactly supported); levels with no contour yield an
// empty system.
LevelFamily level_extract(const ScalarField& u, const std::vector<double>& t_grid,
                          LevelExtractOptions opts = {});

}  // namespace gwv
