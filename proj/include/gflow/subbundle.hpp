#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "gflow/errors.hpp"
#include "gflow/grid.hpp"

namespace gflow {

// Orthogonal splitting of the fiber R^d over each boundary face into a
// Dirichlet block W and its complement. Components are marked per face; the
// common case marks the first d' fiber coordinates.
class SubbundleSplit {
public:
  SubbundleSplit() = default;

  static SubbundleSplit first_components(int d, int dprime_lower, int dprime_upper) {
    if (dprime_lower < 0 || dprime_lower > d || dprime_upper < 0 || dprime_upper > d)
      throw ConfigError("subbundle block size must lie in [0, d]");
    SubbundleSplit s;
    s.d_ = d;
    for (int f = 0; f < 2; ++f) {
      const int dp = f == 0 ? dprime_lower : dprime_upper;
      s.mask_[f].assign(d, 0);
      for (int m = 0; m < dp; ++m) s.mask_[f][m] = 1;
    }
    return s;
  }

  static SubbundleSplit from_masks(std::vector<std::uint8_t> lower, std::vector<std::uint8_t> upper) {
    if (lower.size() != upper.size()) throw ConfigError("subbundle masks must agree in length");
    SubbundleSplit s;
    s.d_ = static_cast<int>(lower.size());
    s.mask_[0] = std::move(lower);
    s.mask_[1] = std::move(upper);
    return s;
  }

  int d() const { return d_; }
  bool is_dirichlet(Face f, int m) const { return mask_[static_cast<int>(f)][m] != 0; }
  int dirichlet_count(Face f) const {
    int c = 0;
    for (int m = 0; m < d_; ++m) c += is_dirichlet(f, m);
    return c;
  }

  void project_w(Face f, std::span<double> fiber) const {
    for (int m = 0; m < d_; ++m)
      if (!is_dirichlet(f, m)) fiber[m] = 0.0;
  }
  void project_w_perp(Face f, std::span<double> fiber) const {
    for (int m = 0; m < d_; ++m)
      if (is_dirichlet(f, m)) fiber[m] = 0.0;
  }

private:
  int d_ = 0;
  std::array<std::vector<std::uint8_t>, 2> mask_;
};

}  // namespace gflow
