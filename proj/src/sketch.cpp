#include "cutplane/sketch.hpp"

#include <cmath>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "cutplane/errors.hpp"

namespace cutplane {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t label : path) s = splitmix64(s ^ splitmix64(label + 0x632be59bd9b4e019ULL));
  return s;
}

GaussianSketch::GaussianSketch(int r, int m, std::uint64_t seed) : seed_(seed) {
  if (r < 1 || m < 1) throw ArgumentError("sketch dimensions must be positive");
  boost::random::mt19937_64 gen(seed);
  boost::random::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(r)));
  R_.resize(r, m);
  // Column-major fill keeps the stream order independent of Eigen's storage.
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < r; ++i) R_(i, j) = nd(gen);
}

Vec GaussianSketch::apply(const Vec& x) const {
  if (x.size() != R_.cols()) throw ArgumentError("sketch: dimension mismatch");
  return R_ * x;
}

GaussianSketch make_sketch(int r, int m, std::uint64_t seed) { return GaussianSketch(r, m, seed); }

double sketched_inner(const GaussianSketch& R, const Vec& x, const Vec& y) {
  if (x.size() != R.m() || y.size() != R.m()) throw ArgumentError("sketch: dimension mismatch");
  return R.apply(x).dot(R.apply(y));
}

}  // namespace cutplane
