#pragma once

#include <span>

namespace msqkd {

/// Base-2 binary entropy with h(0) = h(1) = 0. Inputs within 1e-12 outside
/// [0,1] are clamped; anything further throws InvalidParameter.
double binary_entropy(double x);

/// One pair of unnormalized conditional states (E_i, F_i) seen through their
/// norms and a lower bound on the magnitude of their overlap.
struct EntropyTerm {
    double nE = 0.0;       // <E_i|E_i>
    double nF = 0.0;       // <F_i|F_i>
    double overlap = 0.0;  // lower bound on |<E_i|F_i>|
};

/// lambda = (1 + sqrt((nE-nF)^2 + 4 overlap^2) / (nE+nF)) / 2, clamped to [1/2, 1].
/// Throws DegenerateTerm when nE + nF == 0.
double lambda_of(const EntropyTerm& term);

/// Contribution of a single term: (nE+nF)/N * (h(nE/(nE+nF)) - h(lambda)),
/// floored at 0. Zero-weight terms contribute 0.
double theorem1_summand(const EntropyTerm& term, double normalization);

/// Lower bound on H(A|E) for a classical-quantum state built from pairs of
/// conditional states. Any subset of the pairs gives a valid bound, so
/// negative summands are dropped. Throws InvalidNormalization if N <= 0.
double theorem1_bound(std::span<const EntropyTerm> terms, double normalization);

/// Shannon entropy in bits of a probability vector, with 0 log 0 = 0.
double shannon_entropy(std::span<const double> probabilities);

}  // namespace msqkd
