#pragma once

#include <span>
#include <string>
#include <vector>

namespace wfqpsk {

/// log P(n; mu) for a Poisson law; mu == 0 gives 0 at n == 0 and -inf elsewhere.
double poisson_log_pmf(int n, double mu);

/// P(0..n_max; mu), evaluated in log space.
std::vector<double> poisson_pmf_table(double mu, int n_max);

/// Rule of thumb for a Poisson table covering mean mu: ceil(mu + 12 sqrt(mu) + 20).
int poisson_cutoff(double mu);

/// Nodes and weights for E[f(X)], X ~ N(0, 1): sum_i weights[i] * f(nodes[i]).
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule with `n` nodes rescaled to the standard normal.
/// Nodes come from Newton iteration on the Hermite recurrence.
const GaussRule& gauss_hermite_normal(int n);

/// Composite Simpson weights for `intervals` (even) equal steps of width h.
std::vector<double> simpson_weights(int intervals, double h);

/// Round-trip text for a double: general format, 17 significant digits.
std::string format_real(double x);

/// Shannon entropy term -p log2 p, zero for p <= 0.
double entropy_term(double p);

}  // namespace wfqpsk
