#pragma once

#include <optional>
#include <vector>

#include "wfqpsk/constellation.hpp"

namespace wfqpsk {

/// Number of Gauss-Hermite nodes used to average over Gaussian phase jitter.
inline constexpr int kJitterNodes = 21;

/// Largest truncated probability mass a table may lose before it is rejected.
inline constexpr double kMaxTruncationMass = 1e-6;

/// Weak-field homodyne receiver: balanced beam splitter mixing the signal with
/// a local oscillator |z>, photon-number-resolving detectors on both outputs.
struct WfReceiverParams {
    double lo_amplitude = 3.53;    // z, sqrt(photons)
    double visibility = 1.0;       // xi in [0, 1]
    double transmissivity = 1.0;   // T in [0, 1]
    std::optional<int> n_max;      // per-branch truncation; nullopt = automatic
    double phase_jitter_rms = 0.0; // sigma_phi, radians

    /// Throws InvalidArgument when an invariant is broken.
    void validate() const;
};

struct BranchMeans {
    double transmitted = 0.0;  // mu_t
    double reflected = 0.0;    // mu_r
};

/// Branch means for a pre-channel symbol. The interference term uses the
/// x projection: mu_{t,r} = (T a^2 + z^2 +- 2 xi sqrt(T) a z cos(phase)) / 2.
BranchMeans branch_means(const CoherentSymbol& symbol, const WfReceiverParams& params);

/// Same as above with an explicit (possibly jittered) phase.
BranchMeans branch_means_at(double amplitude, double phase, const WfReceiverParams& params);

/// Automatic truncation for a whole constellation: poisson_cutoff of the
/// largest branch mean (jitter can rotate any symbol onto the x axis).
int auto_n_max(const Constellation& c, const WfReceiverParams& params);

/// Effective truncation: params.n_max if set, otherwise auto_n_max.
int resolve_n_max(const Constellation& c, const WfReceiverParams& params);

/// True when z^2 >= 3 T a_max^2, the regime where the photon-number difference
/// tracks the x quadrature.
bool within_homodyne_limit(const Constellation& c, const WfReceiverParams& params);

/// Probability table p(n, m), n, m in [0, n_max], stored row-major in n.
class JointPnrDistribution {
public:
    JointPnrDistribution() = default;
    explicit JointPnrDistribution(int n_max);

    int n_max() const { return n_max_; }
    int dim() const { return n_max_ + 1; }
    double operator()(int n, int m) const { return probs_[static_cast<std::size_t>(n) * dim() + m]; }
    double& at(int n, int m) { return probs_[static_cast<std::size_t>(n) * dim() + m]; }
    const std::vector<double>& probs() const { return probs_; }
    std::vector<double>& probs() { return probs_; }

    double total() const;
    /// 1 - total(), clamped at 0.
    double truncation_mass() const;
    std::vector<double> marginal_n() const;
    std::vector<double> marginal_m() const;

private:
    int n_max_ = 0;
    std::vector<double> probs_;
};

/// p(n, m | symbol): product of two Poissons, jitter-averaged when
/// sigma_phi > 0. Throws TruncationError if more than 1e-6 of the mass falls
/// outside [0, n_max]^2.
JointPnrDistribution joint_pnr_conditional(const CoherentSymbol& symbol, const WfReceiverParams& params);

/// As above with the table size fixed by the caller.
JointPnrDistribution joint_pnr_conditional(const CoherentSymbol& symbol, const WfReceiverParams& params,
                                           int n_max);

/// Prior-weighted mixture sum_k q_k p(n, m | k).
JointPnrDistribution joint_pnr_marginal(const Constellation& c, const WfReceiverParams& params);

/// Conditional tables for every symbol, all with the same truncation.
std::vector<JointPnrDistribution> joint_pnr_conditionals(const Constellation& c, const WfReceiverParams& params);

/// Distribution of the photon-number difference d = n - m on [-d_max, d_max].
class DiffDistribution {
public:
    DiffDistribution() = default;
    DiffDistribution(int d_max, std::vector<double> probs);
    explicit DiffDistribution(int d_max);

    int d_max() const { return d_max_; }
    double operator()(int d) const;
    double& at(int d) { return probs_[static_cast<std::size_t>(d + d_max_)]; }
    const std::vector<double>& probs() const { return probs_; }

    double total() const;
    double mean() const;
    double variance() const;

    /// Same distribution on a wider support, zero-padded. Throws if d_max shrinks
    /// below the current support.
    DiffDistribution padded(int d_max) const;

private:
    int d_max_ = 0;
    std::vector<double> probs_;
};

/// Skellam law of n - m for independent Poissons n ~ P(mu_t), m ~ P(mu_r),
/// by truncated convolution. Throws TruncationError when [-d_max, d_max]
/// holds less than 1 - 1e-9 of the mass.
DiffDistribution difference_dist(double mu_t, double mu_r, int d_max);

/// Law of n - m read off a joint table (diagonal sums), support [-n_max, n_max].
DiffDistribution difference_from_joint(const JointPnrDistribution& joint);

/// Smallest symmetric support holding all but ~1e-12 of a Skellam law.
int skellam_d_max(double mu_t, double mu_r);

/// Closed form exp(-(mu_t + mu_r)) (mu_t / mu_r)^(d/2) I_|d|(2 sqrt(mu_t mu_r)).
double skellam_pmf(int d, double mu_t, double mu_r);

}  // namespace wfqpsk
