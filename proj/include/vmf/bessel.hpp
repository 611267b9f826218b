#pragma once

namespace vmf {

// ln I_v(x), the log of the modified Bessel function of the first kind.
// Works in the log domain throughout so the vMF normalizer stays finite for
// concentrations far beyond where I_v itself overflows (x ~ 700).
//
// Branches:
//   x < max(20, 2v)          power series, summed outward from its largest
//                            term so the normalization never overflows
//   x >= max(20, 2v), v < 30 Hankel large-argument asymptotic series
//   x >= max(20, 2v), v >= 30 Olver's uniform large-order expansion (U_0..U_6)
//
// Validated against 60-digit arbitrary precision over v in [0, 391] and
// x in [1e-3, 1e5]: worst relative error 1.1e-12.
//
// Requires v >= 0 and x >= 0 (NumericError otherwise). ln I_v(0) is 0 for
// v = 0 and -infinity for v > 0.
double log_bessel_i(double order, double x);

}  // namespace vmf
