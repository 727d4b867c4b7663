#pragma once

#include <cmath>

// Critical-point constants, all evaluated from closed forms.
namespace currentlab::critical {

/// beta_c = log(1 + sqrt 2) / 2.
inline double beta_c() { return 0.5 * std::log1p(std::sqrt(2.0)); }
/// tanh(beta_c) = sqrt 2 - 1; weight of an odd edge after parity reduction.
inline double tanh_beta_c() { return std::tanh(beta_c()); }
/// FK-Ising critical edge parameter 1 - exp(-2 beta_c) = 2 - sqrt 2.
inline double p_c() { return -std::expm1(-2.0 * beta_c()); }
/// P(n_e > 0 | n_e even) = 1 - 1/cosh(beta).
inline double q_even(double beta) { return 1.0 - 1.0 / std::cosh(beta); }
inline double q_even_c() { return q_even(beta_c()); }
/// Parameter of the extra Bernoulli edges turning a current trace into FK.
inline double sprinkle() { return 1.0 - std::sqrt(1.0 - p_c()); }
/// Conductance of edges leaving a quad along its wired arcs.
inline double exit_conductance() { return 2.0 * (std::sqrt(2.0) - 1.0); }

}  // namespace currentlab::critical
