#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vmf/matrix.hpp"

namespace vmf {

class Rng;

double norm(std::span<const double> v);

// Uniform direction from dim independent standard normals, renormalized.
std::vector<double> random_unit_vector(Rng& rng, std::size_t dim);

// v / ||v||. Throws ZeroNormError when ||v|| < 1e-12.
std::vector<double> normalize(std::span<const double> v);

// A point on the unit sphere S^{p-1}, p >= 2. The explicit constructor
// enforces ||v|| within 1e-9 of 1; from_raw normalizes first.
class UnitVector {
 public:
  explicit UnitVector(std::vector<double> coords);
  static UnitVector from_raw(std::span<const double> v);

  const std::vector<double>& coords() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }
  double dot(const UnitVector& other) const;

 private:
  struct Unchecked {};
  UnitVector(std::vector<double> coords, Unchecked) : coords_(std::move(coords)) {}
  std::vector<double> coords_;
};

// Mean direction plus concentration. kappa = 0 is the uniform distribution
// on the sphere.
struct VmfParams {
  VmfParams(UnitVector mean_direction, double concentration);
  UnitVector mu;
  double kappa;
};

// N x p matrix whose rows are unit vectors; the common currency between the
// sampler, the estimators, and the clustering code.
class SampleCloud {
 public:
  explicit SampleCloud(Matrix points);           // validates unit rows
  static SampleCloud normalized(Matrix points);  // normalizes rows first

  const Matrix& points() const { return points_; }
  std::size_t size() const { return points_.rows(); }
  std::size_t dim() const { return points_.cols(); }
  std::span<const double> row(std::size_t i) const { return points_.row_span(i); }

 private:
  struct Unchecked {};
  SampleCloud(Matrix points, Unchecked) : points_(std::move(points)) {}
  Matrix points_;
};

// Surface area of S^{p-1} embedded in R^p: 2 pi^{p/2} / Gamma(p/2), computed
// through the even/odd closed forms so S_2 = 2*pi and S_3 = 4*pi come out
// bit-exact. The curve peaks at p = 7 and decays toward zero afterwards.
double sphere_surface_area(int p);

// ln Z_p(kappa) for the density f(r) = Z_p(kappa) exp(kappa mu.r):
// (p/2-1) ln kappa - (p/2) ln(2 pi) - ln I_{p/2-1}(kappa). At kappa = 0 this
// is -ln S_p, the uniform density. Requires p >= 2, kappa >= 0.
double log_normalizer(int p, double kappa);

double log_vmf_density(const UnitVector& r, const VmfParams& params);

// Normalized resultant sum of the rows (maximum likelihood mean direction).
// Throws ZeroNormError when the resultant vanishes.
UnitVector estimate_mean_direction(const SampleCloud& samples);

// Banerjee et al. approximation kappa^ = Rbar (p - Rbar^2) / (1 - Rbar^2)
// with Rbar = ||sum of rows|| / N, clamped to Rbar <= 1 - 1e-9 so a single
// sample or a perfectly aligned cloud yields a large finite value.
double estimate_kappa(const SampleCloud& samples);

// Wood's rejection sampler. kappa = 0 draws uniformly on the sphere. The
// draw sequence is fully determined by the seed; consumers derive it from
// the global seed under the "sampling" role.
SampleCloud sample_vmf(const VmfParams& params, std::size_t n, std::uint64_t seed);

}  // namespace vmf
