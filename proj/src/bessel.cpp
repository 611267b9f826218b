#include "vmf/bessel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vmf/errors.hpp"

namespace vmf {
namespace {

// Power series I_v(x) = (x/2)^v * sum_m (x^2/4)^m / (m! Gamma(v+m+1)).
// The largest term can overflow long before I_v does, so locate the peak
// index m*, factor its log out, and sum term ratios in both directions.
double series_log_bessel(double v, double x) {
  const double q = 0.25 * x * x;
  // Peak where u_{m+1}/u_m = q / ((m+1)(v+m+1)) crosses 1, i.e. the positive
  // root of m^2 + (v+2)m + (v+1-q) = 0.
  double disc = (v + 2.0) * (v + 2.0) - 4.0 * (v + 1.0 - q);
  long mstar = 0;
  if (disc > 0.0) {
    mstar = static_cast<long>(std::floor(0.5 * (-(v + 2.0) + std::sqrt(disc))));
    if (mstar < 0) mstar = 0;
  }
  const double m = static_cast<double>(mstar);
  const double log_peak = m * std::log(q) - std::lgamma(m + 1.0) - std::lgamma(v + m + 1.0);

  double sum = 1.0;  // peak term, normalized to 1
  double term = 1.0;
  for (long k = mstar; ; ++k) {  // upward from the peak
    const double kk = static_cast<double>(k);
    term *= q / ((kk + 1.0) * (v + kk + 1.0));
    sum += term;
    if (term < 1e-20 * sum) break;
  }
  term = 1.0;
  for (long k = mstar; k > 0; --k) {  // downward from the peak
    const double kk = static_cast<double>(k);
    term *= kk * (v + kk) / q;
    sum += term;
    if (term < 1e-20 * sum) break;
  }
  return v * std::log(0.5 * x) + log_peak + std::log(sum);
}

// Hankel expansion I_v(x) ~ e^x / sqrt(2 pi x) * sum_k a_k, with
// a_k = a_{k-1} * ((2k-1)^2 - 4v^2) / (8 k x). The series is asymptotic:
// terms may grow before they shrink (noticeable for v near 30 at x = 2v),
// so only stop on term growth once past k ~ v/2 where growth provably ends.
double hankel_log_bessel(double v, double x) {
  const double mu = 4.0 * v * v;
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double f = (2.0 * k - 1.0);
    const double next = term * (f * f - mu) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term) && k > v / 2.0 + 1.0) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return x - 0.5 * std::log(2.0 * M_PI * x) + std::log(sum);
}

// Olver's uniform large-order expansion. The U_k(t) polynomials below are
// exact rationals from the standard recurrence
//   U_{k+1}(t) = t^2 (1-t^2)/2 U_k'(t) + 1/8 int_0^t (1-5s^2) U_k(s) ds.
double olver_poly_u(int k, double t) {
  const double t2 = t * t;
  switch (k) {
    case 0:
      return 1.0;
    case 1:
      return t * (1.0 / 8.0 + t2 * (-5.0 / 24.0));
    case 2:
      return t2 * (9.0 / 128.0 + t2 * (-77.0 / 192.0 + t2 * (385.0 / 1152.0)));
    case 3:
      return t * t2 *
             (75.0 / 1024.0 +
              t2 * (-4563.0 / 5120.0 +
                    t2 * (17017.0 / 9216.0 + t2 * (-85085.0 / 82944.0))));
    case 4:
      return t2 * t2 *
             (3675.0 / 32768.0 +
              t2 * (-96833.0 / 40960.0 +
                    t2 * (144001.0 / 16384.0 +
                          t2 * (-7436429.0 / 663552.0 +
                                t2 * (37182145.0 / 7962624.0)))));
    case 5:
      return t * t2 * t2 *
             (59535.0 / 262144.0 +
              t2 * (-67608983.0 / 9175040.0 +
                    t2 * (250881631.0 / 5898240.0 +
                          t2 * (-108313205.0 / 1179648.0 +
                                t2 * (5391411025.0 / 63700992.0 +
                                      t2 * (-5391411025.0 / 191102976.0))))));
    case 6:
      return t2 * t2 * t2 *
             (2401245.0 / 4194304.0 +
              t2 * (-388895895.0 / 14680064.0 +
                    t2 * (1441372804469.0 / 6606028800.0 +
                          t2 * (-33010308331.0 / 47185920.0 +
                                t2 * (4445922195.0 / 4194304.0 +
                                      t2 * (-1169936192425.0 / 1528823808.0 +
                                            t2 * (5849680962125.0 /
                                                  27518828544.0)))))));
    default:
      return 0.0;
  }
}

double olver_log_bessel(double v, double x) {
  const double z = x / v;
  const double root = std::sqrt(1.0 + z * z);
  const double eta = root + std::log(z / (1.0 + root));
  const double t = 1.0 / root;
  double corr = 0.0;
  double vk = 1.0;
  for (int k = 0; k <= 6; ++k) {
    corr += olver_poly_u(k, t) / vk;
    vk *= v;
  }
  return v * eta - 0.5 * std::log(2.0 * M_PI * v) - 0.25 * std::log(1.0 + z * z) +
         std::log(corr);
}

}  // namespace

double log_bessel_i(double order, double x) {
  if (!(order >= 0.0) || !std::isfinite(order) || !(x >= 0.0) || !std::isfinite(x)) {
    throw NumericError("log_bessel_i: requires finite order >= 0 and x >= 0, got order=" +
                       std::to_string(order) + " x=" + std::to_string(x));
  }
  if (x == 0.0) {
    return order == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  if (x < std::max(20.0, 2.0 * order)) {
    return series_log_bessel(order, x);
  }
  if (order < 30.0) {
    return hankel_log_bessel(order, x);
  }
  return olver_log_bessel(order, x);
}

}  // namespace vmf
