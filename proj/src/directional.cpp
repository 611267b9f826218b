#include "vmf/directional.hpp"

#include <cmath>
#include <string>

#include "vmf/bessel.hpp"
#include "vmf/errors.hpp"
#include "vmf/rng.hpp"

namespace vmf {

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

std::vector<double> normalize(std::span<const double> v) {
  const double len = norm(v);
  if (!(len >= 1e-12)) {
    throw ZeroNormError("normalize: vector norm " + std::to_string(len) +
                        " is below 1e-12");
  }
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= len;
  return out;
}

UnitVector::UnitVector(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw ConfigError("UnitVector: dimension must be at least 2");
  }
  const double len = norm(coords_);
  if (std::abs(len - 1.0) > 1e-9) {
    throw ConfigError("UnitVector: norm " + std::to_string(len) +
                      " deviates from 1 by more than 1e-9");
  }
}

UnitVector UnitVector::from_raw(std::span<const double> v) {
  if (v.size() < 2) {
    throw ConfigError("UnitVector: dimension must be at least 2");
  }
  return UnitVector(normalize(v), Unchecked{});
}

double UnitVector::dot(const UnitVector& other) const {
  if (dim() != other.dim()) {
    throw ConfigError("UnitVector::dot: dimensions differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < coords_.size(); ++i) acc += coords_[i] * other.coords_[i];
  return acc;
}

VmfParams::VmfParams(UnitVector mean_direction, double concentration)
    : mu(std::move(mean_direction)), kappa(concentration) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw ConfigError("VmfParams: kappa must be finite and >= 0");
  }
}

SampleCloud::SampleCloud(Matrix points) : points_(std::move(points)) {
  if (points_.rows() == 0 || points_.cols() < 2) {
    throw ConfigError("SampleCloud: needs at least one row and dimension >= 2");
  }
  for (std::size_t i = 0; i < points_.rows(); ++i) {
    const double len = norm(points_.row_span(i));
    if (std::abs(len - 1.0) > 1e-9) {
      throw ConfigError("SampleCloud: row " + std::to_string(i) +
                        " is not unit length");
    }
  }
}

SampleCloud SampleCloud::normalized(Matrix points) {
  if (points.rows() == 0 || points.cols() < 2) {
    throw ConfigError("SampleCloud: needs at least one row and dimension >= 2");
  }
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto unit = normalize(points.row_span(i));
    double* row = points.row(i);
    for (std::size_t j = 0; j < points.cols(); ++j) row[j] = unit[j];
  }
  return SampleCloud(std::move(points), Unchecked{});
}

double sphere_surface_area(int p) {
  if (p < 2) {
    throw ConfigError("sphere_surface_area: p must be >= 2");
  }
  double s = 2.0;
  if (p % 2 == 0) {
    // 2 pi^m / (m-1)!, m = p/2
    const int m = p / 2;
    for (int i = 1; i <= m; ++i) s *= M_PI;
    for (int i = 1; i < m; ++i) s /= i;
  } else {
    // 2 pi^m 4^m m! / (2m)!, m = (p-1)/2; folded as prod pi*4i/((2i-1)(2i))
    // to keep intermediates near the final magnitude.
    const int m = (p - 1) / 2;
    for (int i = 1; i <= m; ++i) {
      s *= M_PI * (4.0 * i) / ((2.0 * i - 1.0) * (2.0 * i));
    }
  }
  return s;
}

double log_normalizer(int p, double kappa) {
  if (p < 2) {
    throw ConfigError("log_normalizer: p must be >= 2");
  }
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw ConfigError("log_normalizer: kappa must be finite and >= 0");
  }
  if (kappa == 0.0) {
    return -std::log(sphere_surface_area(p));
  }
  const double half_p = 0.5 * p;
  const double order = half_p - 1.0;
  return order * std::log(kappa) - half_p * std::log(2.0 * M_PI) -
         log_bessel_i(order, kappa);
}

double log_vmf_density(const UnitVector& r, const VmfParams& params) {
  if (r.dim() != params.mu.dim()) {
    throw ConfigError("log_vmf_density: dimension mismatch");
  }
  return log_normalizer(static_cast<int>(r.dim()), params.kappa) +
         params.kappa * params.mu.dot(r);
}

namespace {

std::vector<double> resultant(const SampleCloud& samples) {
  std::vector<double> sum(samples.dim(), 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double* row = samples.points().row(i);
    for (std::size_t j = 0; j < samples.dim(); ++j) sum[j] += row[j];
  }
  return sum;
}

}  // namespace

UnitVector estimate_mean_direction(const SampleCloud& samples) {
  auto sum = resultant(samples);
  if (norm(sum) < 1e-12) {
    throw ZeroNormError("estimate_mean_direction: resultant vanishes");
  }
  return UnitVector::from_raw(sum);
}

double estimate_kappa(const SampleCloud& samples) {
  const double p = static_cast<double>(samples.dim());
  double rbar = norm(resultant(samples)) / static_cast<double>(samples.size());
  if (rbar > 1.0 - 1e-9) rbar = 1.0 - 1e-9;
  return rbar * (p - rbar * rbar) / (1.0 - rbar * rbar);
}

// Redraws in the (measure-zero) event the Gaussian vector's norm vanishes.
std::vector<double> random_unit_vector(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (;;) {
    for (double& x : v) x = rng.normal();
    if (norm(v) >= 1e-12) return normalize(v);
  }
}

SampleCloud sample_vmf(const VmfParams& params, std::size_t n, std::uint64_t seed) {
  if (n == 0) {
    throw ConfigError("sample_vmf: n must be positive");
  }
  const std::size_t p = params.mu.dim();
  const double kappa = params.kappa;
  Rng rng(seed);
  Matrix out(n, p);

  if (kappa == 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      auto v = random_unit_vector(rng, p);
      for (std::size_t j = 0; j < p; ++j) out(i, j) = v[j];
    }
    return SampleCloud(std::move(out));
  }

  // Wood (1994): sample the cosine W against the pole from a Beta envelope,
  // pick a uniform tangent direction, then reflect the pole onto mu.
  const double dim = static_cast<double>(p);
  const double b =
      (dim - 1.0) / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa +
                                             (dim - 1.0) * (dim - 1.0)));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + (dim - 1.0) * std::log(1.0 - x0 * x0);
  const double beta_shape = 0.5 * (dim - 1.0);

  // Householder vector u with (I - 2uu^T) e_p = mu; u = 0 means mu is the
  // pole itself and the reflection is the identity.
  std::vector<double> u(p, 0.0);
  {
    std::vector<double> diff(params.mu.coords());
    for (double& x : diff) x = -x;
    diff[p - 1] += 1.0;
    if (norm(diff) >= 1e-12) u = normalize(diff);
  }

  std::vector<double> sample(p);
  for (std::size_t i = 0; i < n; ++i) {
    double w = 0.0;
    for (;;) {
      const double g1 = rng.gamma(beta_shape);
      const double g2 = rng.gamma(beta_shape);
      const double z = g1 / (g1 + g2);
      w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
      const double accept = kappa * w + (dim - 1.0) * std::log1p(-x0 * w) - c;
      if (accept >= std::log(rng.uniform01())) break;
    }
    auto tangent = random_unit_vector(rng, p - 1);
    const double scale = std::sqrt(std::max(0.0, 1.0 - w * w));
    for (std::size_t j = 0; j + 1 < p; ++j) sample[j] = scale * tangent[j];
    sample[p - 1] = w;
    // reflect: x - 2 (u.x) u
    double ux = 0.0;
    for (std::size_t j = 0; j < p; ++j) ux += u[j] * sample[j];
    for (std::size_t j = 0; j < p; ++j) out(i, j) = sample[j] - 2.0 * ux * u[j];
  }
  // Reflection preserves length only up to rounding; snap rows back to the
  // sphere so downstream unit checks never trip.
  return SampleCloud::normalized(std::move(out));
}

}  // namespace vmf
