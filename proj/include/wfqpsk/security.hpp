#pragma once

#include <complex>
#include <vector>

#include "wfqpsk/constellation.hpp"
#include "wfqpsk/wf_receiver.hpp"

namespace wfqpsk {

/// Mixture of coherent states sum_k w_k |beta_k><beta_k|.
struct Ensemble {
    std::vector<std::complex<double>> amplitudes;
    std::vector<double> weights;

    /// Throws InvalidArgument on length mismatch, negative weights or a sum off 1 by > 1e-12.
    void validate() const;
};

/// Eve's share of a pure-loss channel: sqrt(1 - T) alpha_k with the priors as weights.
Ensemble eve_ensemble(const Constellation& c, double transmissivity);

/// <a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b).
std::complex<double> coherent_overlap(std::complex<double> a, std::complex<double> b);

/// Eigenvalues (ascending) of a Hermitian matrix given row-major, n x n.
/// Cyclic Jacobi on the real 2n x 2n embedding [[Re, -Im], [Im, Re]].
std::vector<double> hermitian_eigenvalues(const std::vector<std::complex<double>>& a, int n);

/// Von Neumann entropy in bits from the spectrum of the weighted Gram matrix.
/// Eigenvalues down to -1e-10 count as 0; below that NumericalError.
double vn_entropy(const Ensemble& e);

struct EveConditionalEntropy {
    double bits = 0.0;
    /// Probability of outcomes skipped because p(n,m) < 1e-15.
    double skipped_mass = 0.0;
};

/// S(E|B) = sum_{n,m} p(n,m) S[rho_E|(n,m)].
EveConditionalEntropy conditional_eve_entropy(const Constellation& c, const WfReceiverParams& params);

struct KgrResult {
    double kgr_bits = 0.0;
    double mi_bits = 0.0;
    double holevo_bits = 0.0;
    double s_e_bits = 0.0;
    double s_e_given_b_bits = 0.0;
    double skipped_mass = 0.0;
    bool insecure = false;  // kgr_bits < 0
};

/// Reverse-reconciliation key rate against a beam-splitting collective attack:
/// I(A;B) - chi(B;E), chi = S(E) - S(E|B). Negative rates are kept.
KgrResult kgr(const Constellation& c, const WfReceiverParams& params);

}  // namespace wfqpsk
