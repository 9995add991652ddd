#pragma once

namespace jetlag {

/// f(z) = −∫₋z^∞ e^(−t)/t dt, i.e. the exponential integral Ei(z); a principal value for z > 0.
/// Throws DomainError at z = 0.
double exp_integral_f(double z);

/// e^(−z)·f(z), evaluated without overflow for large positive z.
double exp_neg_times_f(double z);

}  // namespace jetlag
