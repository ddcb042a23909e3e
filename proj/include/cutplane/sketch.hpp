#pragma once

#include <cstdint>
#include <initializer_list>

#include "cutplane/linalg.hpp"

namespace cutplane {

std::uint64_t splitmix64(std::uint64_t x);

// Child seed for a labelled stream: folds each label into the parent with
// splitmix64, so distinct label paths give unrelated generators.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

// Dense r x m matrix with i.i.d. N(0, 1/r) entries, filled column by column
// from a 64-bit Mersenne twister through a ziggurat normal sampler.
class GaussianSketch {
 public:
  GaussianSketch(int r, int m, std::uint64_t seed);

  int r() const { return static_cast<int>(R_.rows()); }
  int m() const { return static_cast<int>(R_.cols()); }
  std::uint64_t seed() const { return seed_; }
  const Mat& matrix() const { return R_; }
  Vec apply(const Vec& x) const;
  Mat apply(const Mat& X) const { return R_ * X; }

 private:
  std::uint64_t seed_;
  Mat R_;
};

GaussianSketch make_sketch(int r, int m, std::uint64_t seed);

// (R x)^T (R y).
double sketched_inner(const GaussianSketch& R, const Vec& x, const Vec& y);

}  // namespace cutplane
