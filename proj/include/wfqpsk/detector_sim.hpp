#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "wfqpsk/constellation.hpp"
#include "wfqpsk/info_metrics.hpp"
#include "wfqpsk/wf_receiver.hpp"

namespace wfqpsk {

struct DetectorImperfections {
    double dark_mean = 0.0;       // mean dark counts per gate and detector
    double crosstalk_prob = 0.0;  // chance that a count triggers one extra count
    double valid_mean_min = 0.5;  // branch means outside this band raise a warning
    double valid_mean_max = 15.0;

    void validate() const;
};

struct ShotRecord {
    int k = 0;
    int n = 0;  // transmitted branch
    int m = 0;  // reflected branch

    bool operator==(const ShotRecord&) const = default;
};

struct Shot {
    ShotRecord record;
    bool range_warning = false;
};

/// One pulse: optional Gaussian phase kick, Poisson counts on both branches,
/// Poisson dark counts, then one generation of binomial crosstalk.
Shot sample_shot(int k, const CoherentSymbol& symbol, const WfReceiverParams& params,
                 const DetectorImperfections& imperfections, std::mt19937_64& rng);

/// Exact law of the detected (n, m) for one symbol: the ideal joint table
/// (jitter-averaged if requested) pushed through Poisson dark counts and one
/// generation of binomial crosstalk on each branch. The table grows to hold
/// every reachable count, so no mass is lost beyond the ideal table's own.
JointPnrDistribution detected_joint(const CoherentSymbol& symbol, const WfReceiverParams& params,
                                    const DetectorImperfections& imperfections);

/// Detected-outcome tables for every symbol, on a common support.
std::vector<JointPnrDistribution> detected_conditionals(const Constellation& c, const WfReceiverParams& params,
                                                        const DetectorImperfections& imperfections);

struct ExperimentResult {
    OutcomeCounts counts;
    std::vector<ShotRecord> records;  // empty unless requested
    std::uint64_t range_warnings = 0;
};

/// Shots are generated in fixed blocks of kShotBlock, block b seeded with
/// derive_seed(seed, b), so the result does not depend on `workers`.
inline constexpr std::uint64_t kShotBlock = 1u << 15;

ExperimentResult run_experiment(const Constellation& c, const WfReceiverParams& params,
                                const DetectorImperfections& imperfections, std::uint64_t shots, std::uint64_t seed,
                                bool keep_records = false, int workers = 1);

/// Normalized histogram of n - m, support [-max|d|, max|d|].
DiffDistribution empirical_difference_dist(std::span<const ShotRecord> records);

/// Histogram of n - m for the records of a single symbol.
DiffDistribution empirical_difference_dist(std::span<const ShotRecord> records, int k);

enum class FidelityMetric { bhattacharyya, product };

/// sum sqrt(p q) (default) or the literal sum p q. Supports must match
/// (same d_max) and both inputs must be normalized within 1e-6.
double fidelity(const DiffDistribution& a, const DiffDistribution& b,
                FidelityMetric metric = FidelityMetric::bhattacharyya);

/// sum min(p, q) after padding to a common support.
double histogram_overlap(const DiffDistribution& a, const DiffDistribution& b);

void write_records_csv(std::ostream& out, std::span<const ShotRecord> records);
std::vector<ShotRecord> read_records_csv(std::istream& in);

/// "WFQREC1\n", uint64 record count, then int32 (k, n, m) triples, little-endian.
void write_records_binary(std::ostream& out, std::span<const ShotRecord> records);
std::vector<ShotRecord> read_records_binary(std::istream& in);

void write_histogram_csv(std::ostream& out, const DiffDistribution& dist);

}  // namespace wfqpsk
