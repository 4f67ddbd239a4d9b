#include "msqkd/entropy.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "msqkd/error.hpp"

namespace msqkd {

namespace {

constexpr double kDomainTolerance = 1e-12;

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

}  // namespace

double binary_entropy(double x) {
    if (!(x >= -kDomainTolerance && x <= 1.0 + kDomainTolerance)) {
        throw InvalidParameter(fmt::format("binary entropy argument {} outside [0, 1]", x));
    }
    x = std::clamp(x, 0.0, 1.0);
    return -xlog2x(x) - xlog2x(1.0 - x);
}

double lambda_of(const EntropyTerm& term) {
    const double total = term.nE + term.nF;
    if (!(total > 0.0)) throw DegenerateTerm("entropy term has nE + nF = 0");
    const double diff = term.nE - term.nF;
    const double root = std::sqrt(diff * diff + 4.0 * term.overlap * term.overlap);
    return std::clamp(0.5 * (1.0 + root / total), 0.5, 1.0);
}

double theorem1_summand(const EntropyTerm& term, double normalization) {
    const double total = term.nE + term.nF;
    if (!(total > 0.0)) return 0.0;
    const double value =
        total / normalization * (binary_entropy(term.nE / total) - binary_entropy(lambda_of(term)));
    return std::max(value, 0.0);
}

double theorem1_bound(std::span<const EntropyTerm> terms, double normalization) {
    if (!(normalization > 0.0)) {
        throw InvalidNormalization(fmt::format("normalization {} must be positive", normalization));
    }
    double sum = 0.0;
    for (const auto& term : terms) sum += theorem1_summand(term, normalization);
    return sum;
}

double shannon_entropy(std::span<const double> probabilities) {
    double h = 0.0;
    for (double p : probabilities) h -= xlog2x(p);
    return h;
}

}  // namespace msqkd
