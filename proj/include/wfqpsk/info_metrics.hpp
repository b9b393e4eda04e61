#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "wfqpsk/constellation.hpp"
#include "wfqpsk/wf_receiver.hpp"

namespace wfqpsk {

struct MiResult {
    double mi_bits = 0.0;
    double marginal_entropy_bits = 0.0;     // H(B)
    double conditional_entropy_bits = 0.0;  // H(B|A)
    double truncation_mass = 0.0;           // largest per-symbol mass outside the table
};

/// -sum p log2 p, 0 log 0 = 0. Throws InvalidArgument on negative entries or
/// a sum above 1 + 1e-9.
double shannon_entropy(std::span<const double> dist);

/// I(A;B) = H[p(n,m)] - sum_k q_k H[p(n,m|k)] over the truncated tables.
MiResult wf_mutual_information(const Constellation& c, const WfReceiverParams& params);

/// Same, for caller-supplied conditional tables (all the same size) and priors.
MiResult mutual_information(std::span<const double> priors, const std::vector<JointPnrDistribution>& conditionals);

/// Occurrence counts of (symbol k, outcome (n,m)).
class OutcomeCounts {
public:
    using Outcome = std::pair<int, int>;

    explicit OutcomeCounts(int num_symbols);

    int num_symbols() const { return num_symbols_; }
    void add(int k, int n, int m, std::uint64_t times = 1);
    void merge(const OutcomeCounts& other);
    std::uint64_t total() const { return total_; }
    std::uint64_t count(int k, int n, int m) const;
    /// Outcome -> per-symbol counts, ordered by (n, m).
    const std::map<Outcome, std::vector<std::uint64_t>>& table() const { return table_; }

private:
    int num_symbols_;
    std::uint64_t total_ = 0;
    std::map<Outcome, std::vector<std::uint64_t>> table_;
};

/// Plug-in (maximum-likelihood) MI of the empirical joint frequencies, bits.
/// No bias correction. Throws InvalidArgument on an empty table.
double plugin_mi_estimate(const OutcomeCounts& counts);

/// Bootstrap standard error of plugin_mi_estimate: each replicate redraws
/// total() shots from the empirical joint distribution.
double plugin_mi_bootstrap_se(const OutcomeCounts& counts, int replicates, std::uint64_t seed);

}  // namespace wfqpsk
