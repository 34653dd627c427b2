#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "patchy/error.hpp"
#include "patchy/generators.hpp"
#include "patchy/labeling.hpp"
#include "patchy/receptive_field.hpp"

namespace patchy {

struct GridCheckReport {
  bool match = false;
  std::size_t fields = 0;
  /// `slot_of_pixel[i]` is the field slot holding pixel i of the patch
  /// (row-major inside the patch); empty when no consistent map exists.
  std::vector<std::size_t> slot_of_pixel;
};

/// Compares receptive fields on a rows x cols grid image with the patches a
/// convolution of size (2m-1) and stride s reads from the same image.
///
/// Fields use k = (2m-1)^2 and 1-WL normalization computed on each assembled
/// neighborhood, rooted at the patch centers in row-major order. The check
/// passes when a single slot permutation turns every field into its patch.
inline GridCheckReport verify_grid_equivalence(std::size_t rows, std::size_t cols, std::size_t m,
                                               std::size_t s) {
  if (m < 1 || s < 1) throw error(errc::bad_params, "m and stride must be positive");
  const auto side = 2 * m - 1;
  if (rows < side || cols < side || rows < 2 || cols < 2)
    throw error(errc::grid_too_small, "grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                                          " smaller than patch side " + std::to_string(side));
  const auto k = side * side;
  const auto g = generate_grid(rows, cols, false);
  const auto wl = wl_labeling();

  GridCheckReport rep;
  std::optional<std::vector<std::size_t>> fixed;
  bool ok = true;
  for (std::size_t r0 = 0; r0 + side <= rows; r0 += s) {
    for (std::size_t c0 = 0; c0 + side <= cols; c0 += s) {
      const auto center = static_cast<NodeId>((r0 + m - 1) * cols + (c0 + m - 1));
      auto f = receptive_field(g, center, wl, k);
      ++rep.fields;
      std::vector<std::size_t> map(k, k);
      for (std::size_t i = 0; i < k; ++i) {
        const auto pixel = static_cast<NodeId>((r0 + i / side) * cols + (c0 + i % side));
        for (std::size_t slot = 0; slot < k; ++slot)
          if (f.slots[slot] == pixel) map[i] = slot;
      }
      const bool complete = std::find(map.begin(), map.end(), k) == map.end();
      if (!complete) {
        ok = false;
      } else if (!fixed) {
        fixed = map;
      } else if (*fixed != map) {
        ok = false;
      }
      if (complete) {
        // slot identity must also show in the attribute channel
        for (std::size_t i = 0; i < k; ++i) {
          const auto pixel = static_cast<float>((r0 + i / side) * cols + (c0 + i % side));
          if (f.node_patch[map[i]] != pixel) ok = false;
        }
      }
    }
  }
  rep.match = ok && fixed.has_value();
  if (rep.match) rep.slot_of_pixel = *fixed;
  return rep;
}

}  // namespace patchy
