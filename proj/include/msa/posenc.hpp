#pragma once

#include "msa/automaton.hpp"

namespace msa {

/// One conjugate pair of a diagonal polar automaton: initial weight
/// s*exp(i*phi), transition r*exp(i*theta).
struct PolarPair {
    double s = 1.0;
    double phi = 0.0;
    double r = 1.0;
    double theta = 0.0;
};

struct PolarParams {
    std::vector<PolarPair> pairs;
    int dimension() const { return 2 * static_cast<int>(pairs.size()); }
};

/// Position encoding of position p >= 1 in d dimensions, interleaved
/// (sin, cos) per frequency.
Eigen::VectorXd sinusoidal_encoding(long p, int d);

/// Real unary automaton of scaled 2x2 rotation blocks; forward weights
/// after n symbols are [s_i r_i^n cos(phi_i + n theta_i),
/// s_i r_i^n sin(phi_i + n theta_i)]_i.
WeightedAutomaton polar_automaton(const PolarParams& params);

/// Forward weights of the polar automaton after n symbols, computed by
/// actually running the automaton (iterated block products).
Eigen::VectorXd polar_forward_weights(const PolarParams& params, long n);

/// Same vector in closed form, with angles reduced mod 2*pi before sin/cos.
Eigen::VectorXd polar_forward_closed_form(const PolarParams& params, long n);

/// s=1, phi=pi/2, r=1, theta_j = -10000^(-2(j-1)/d): the parameter choice
/// under which forward weights equal the sinusoidal encodings.
PolarParams transformer_params(int d);

/// Real automaton computing identical unary weights as a complex diagonal
/// automaton whose spectrum and weights come in conjugate pairs.
WeightedAutomaton complex_pairs_to_real(const DiagonalAutomaton& m,
                                        double pair_tol = 1e-10);

/// Max absolute deviation between sinusoidal_encoding(p, d) and the polar
/// automaton's forward weights at n = p-1, for p = 1..max_position.
/// swap_pairs exchanges the two components of each (cos, sin) block before
/// comparing; the transformer parameterization needs no swap.
double posenc_max_deviation(int d, long max_position, bool swap_pairs = false);

}  // namespace msa
