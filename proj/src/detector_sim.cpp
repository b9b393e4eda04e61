#include "wfqpsk/detector_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "wfqpsk/error.hpp"
#include "wfqpsk/lock_sim.hpp"
#include "wfqpsk/numeric.hpp"
#include "wfqpsk/parallel.hpp"

namespace wfqpsk {

void DetectorImperfections::validate() const
{
    if (!(dark_mean >= 0.0) || !std::isfinite(dark_mean)) {
        throw InvalidArgument("dark_mean must be finite and >= 0");
    }
    if (!(crosstalk_prob >= 0.0 && crosstalk_prob < 1.0)) {
        throw InvalidArgument("crosstalk_prob must lie in [0, 1)");
    }
    if (!(valid_mean_min < valid_mean_max)) {
        throw InvalidArgument("valid mean range needs min < max");
    }
}

namespace {

int draw_poisson(double mu, std::mt19937_64& rng)
{
    if (!(mu > 0.0)) {
        return 0;
    }
    return std::poisson_distribution<int>(mu)(rng);
}

int detect(double mu, const DetectorImperfections& imp, std::mt19937_64& rng)
{
    int counts = draw_poisson(mu, rng) + draw_poisson(imp.dark_mean, rng);
    if (imp.crosstalk_prob > 0.0 && counts > 0) {
        counts += std::binomial_distribution<int>(counts, imp.crosstalk_prob)(rng);
    }
    return counts;
}

double binomial_pmf(int k, int n, double p)
{
    if (k < 0 || k > n) {
        return 0.0;
    }
    if (p == 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                    (n - k) * std::log1p(-p));
}

// Column i: law of the detected count given i true photons, row-major [out][in].
std::vector<double> branch_kernel(int in_max, int out_max, const DetectorImperfections& imp)
{
    const int dark_max = imp.dark_mean > 0.0 ? poisson_cutoff(imp.dark_mean) : 0;
    const auto dark = poisson_pmf_table(imp.dark_mean, dark_max);
    const int in_dim = in_max + 1;
    std::vector<double> k(static_cast<std::size_t>(out_max + 1) * in_dim, 0.0);
    for (int i = 0; i <= in_max; ++i) {
        for (int j = 0; j <= dark_max; ++j) {
            const int c = i + j;
            for (int x = 0; x <= c && c + x <= out_max; ++x) {
                k[static_cast<std::size_t>(c + x) * in_dim + i] += dark[j] * binomial_pmf(x, c, imp.crosstalk_prob);
            }
        }
    }
    return k;
}

int detected_max(int in_max, const DetectorImperfections& imp)
{
    const int dark_max = imp.dark_mean > 0.0 ? poisson_cutoff(imp.dark_mean) : 0;
    return (in_max + dark_max) * (imp.crosstalk_prob > 0.0 ? 2 : 1);
}

JointPnrDistribution push_through(const JointPnrDistribution& ideal, const DetectorImperfections& imp)
{
    const int in_dim = ideal.dim();
    const int out_max = detected_max(ideal.n_max(), imp);
    const int out_dim = out_max + 1;
    const auto k = branch_kernel(ideal.n_max(), out_max, imp);
    // K T K^T, done as two passes
    std::vector<double> half(static_cast<std::size_t>(out_dim) * in_dim, 0.0);
    for (int a = 0; a < out_dim; ++a) {
        for (int n = 0; n < in_dim; ++n) {
            const double w = k[static_cast<std::size_t>(a) * in_dim + n];
            if (w == 0.0) {
                continue;
            }
            for (int m = 0; m < in_dim; ++m) {
                half[static_cast<std::size_t>(a) * in_dim + m] += w * ideal(n, m);
            }
        }
    }
    JointPnrDistribution out(out_max);
    for (int a = 0; a < out_dim; ++a) {
        for (int b = 0; b < out_dim; ++b) {
            double s = 0.0;
            for (int m = 0; m < in_dim; ++m) {
                s += half[static_cast<std::size_t>(a) * in_dim + m] * k[static_cast<std::size_t>(b) * in_dim + m];
            }
            out.at(a, b) = s;
        }
    }
    return out;
}

}  // namespace

JointPnrDistribution detected_joint(const CoherentSymbol& symbol, const WfReceiverParams& params,
                                    const DetectorImperfections& imperfections)
{
    imperfections.validate();
    return push_through(joint_pnr_conditional(symbol, params), imperfections);
}

std::vector<JointPnrDistribution> detected_conditionals(const Constellation& c, const WfReceiverParams& params,
                                                        const DetectorImperfections& imperfections)
{
    imperfections.validate();
    std::vector<JointPnrDistribution> out;
    for (const auto& ideal : joint_pnr_conditionals(c, params)) {
        out.push_back(push_through(ideal, imperfections));
    }
    return out;
}

Shot sample_shot(int k, const CoherentSymbol& symbol, const WfReceiverParams& params,
                 const DetectorImperfections& imperfections, std::mt19937_64& rng)
{
    double phase = symbol.phase;
    if (params.phase_jitter_rms > 0.0) {
        phase += params.phase_jitter_rms * std::normal_distribution<double>(0.0, 1.0)(rng);
    }
    const auto mu = branch_means_at(symbol.amplitude, phase, params);
    Shot shot;
    shot.record.k = k;
    shot.record.n = detect(mu.transmitted, imperfections, rng);
    shot.record.m = detect(mu.reflected, imperfections, rng);
    auto outside = [&](double x) { return x < imperfections.valid_mean_min || x > imperfections.valid_mean_max; };
    shot.range_warning = outside(mu.transmitted) || outside(mu.reflected);
    return shot;
}

ExperimentResult run_experiment(const Constellation& c, const WfReceiverParams& params,
                                const DetectorImperfections& imperfections, std::uint64_t shots, std::uint64_t seed,
                                bool keep_records, int workers)
{
    params.validate();
    imperfections.validate();
    if (shots < 1) {
        throw InvalidArgument("shots must be >= 1");
    }
    std::vector<double> priors;
    for (const auto& s : c.symbols()) {
        priors.push_back(s.prior);
    }
    const int m_order = c.order();
    const std::uint64_t blocks = (shots + kShotBlock - 1) / kShotBlock;

    struct Block {
        OutcomeCounts counts;
        std::vector<ShotRecord> records;
        std::uint64_t warnings = 0;
    };
    std::vector<Block> parts(blocks, Block{OutcomeCounts(m_order), {}, 0});
    parallel_for(blocks, workers, [&](std::size_t b) {
        std::mt19937_64 rng(derive_seed(seed, b));
        std::discrete_distribution<int> pick(priors.begin(), priors.end());
        const std::uint64_t begin = b * kShotBlock;
        const std::uint64_t end = std::min(shots, begin + kShotBlock);
        auto& part = parts[b];
        if (keep_records) {
            part.records.reserve(end - begin);
        }
        for (std::uint64_t i = begin; i < end; ++i) {
            const int k = pick(rng);
            const Shot shot = sample_shot(k, c[k], params, imperfections, rng);
            part.counts.add(k, shot.record.n, shot.record.m);
            part.warnings += shot.range_warning ? 1 : 0;
            if (keep_records) {
                part.records.push_back(shot.record);
            }
        }
    });

    ExperimentResult out{OutcomeCounts(m_order), {}, 0};
    for (auto& part : parts) {
        out.counts.merge(part.counts);
        out.range_warnings += part.warnings;
        out.records.insert(out.records.end(), part.records.begin(), part.records.end());
    }
    return out;
}

namespace {

DiffDistribution histogram(std::span<const ShotRecord> records, int k, bool filter)
{
    int d_max = 0;
    std::uint64_t total = 0;
    for (const auto& r : records) {
        if (!filter || r.k == k) {
            d_max = std::max(d_max, std::abs(r.n - r.m));
            ++total;
        }
    }
    if (total == 0) {
        throw InvalidArgument("difference histogram needs at least one record");
    }
    std::vector<double> p(static_cast<std::size_t>(2 * d_max + 1), 0.0);
    for (const auto& r : records) {
        if (!filter || r.k == k) {
            p[static_cast<std::size_t>(r.n - r.m + d_max)] += 1.0;
        }
    }
    for (auto& x : p) {
        x /= static_cast<double>(total);
    }
    return DiffDistribution(d_max, std::move(p));
}

}  // namespace

DiffDistribution empirical_difference_dist(std::span<const ShotRecord> records)
{
    return histogram(records, 0, false);
}

DiffDistribution empirical_difference_dist(std::span<const ShotRecord> records, int k)
{
    return histogram(records, k, true);
}

double fidelity(const DiffDistribution& a, const DiffDistribution& b, FidelityMetric metric)
{
    if (a.d_max() != b.d_max()) {
        throw InvalidArgument("fidelity needs distributions on the same support; pad one of them first");
    }
    if (std::fabs(a.total() - 1.0) > 1e-6 || std::fabs(b.total() - 1.0) > 1e-6) {
        throw InvalidArgument("fidelity needs normalized distributions");
    }
    double f = 0.0;
    for (std::size_t i = 0; i < a.probs().size(); ++i) {
        const double p = a.probs()[i];
        const double q = b.probs()[i];
        f += metric == FidelityMetric::bhattacharyya ? std::sqrt(p * q) : p * q;
    }
    return std::min(1.0, f);
}

double histogram_overlap(const DiffDistribution& a, const DiffDistribution& b)
{
    const int d_max = std::max(a.d_max(), b.d_max());
    double s = 0.0;
    for (int d = -d_max; d <= d_max; ++d) {
        s += std::min(a(d), b(d));
    }
    return s;
}

void write_records_csv(std::ostream& out, std::span<const ShotRecord> records)
{
    out << "k,n,m\n";
    for (const auto& r : records) {
        out << r.k << ',' << r.n << ',' << r.m << '\n';
    }
}

std::vector<ShotRecord> read_records_csv(std::istream& in)
{
    std::vector<ShotRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line == "k,n,m") {
            continue;
        }
        ShotRecord r;
        char c1 = 0;
        char c2 = 0;
        if (std::sscanf(line.c_str(), "%d%c%d%c%d", &r.k, &c1, &r.n, &c2, &r.m) != 5 || c1 != ',' || c2 != ',') {
            throw InvalidArgument("bad record row: " + line);
        }
        if (r.k < 0 || r.n < 0 || r.m < 0) {
            throw InvalidArgument("record fields must be >= 0: " + line);
        }
        out.push_back(r);
    }
    return out;
}

namespace {

constexpr char kRecordMagic[8] = {'W', 'F', 'Q', 'R', 'E', 'C', '1', '\n'};
static_assert(std::endian::native == std::endian::little, "binary records assume a little-endian host");

}  // namespace

void write_records_binary(std::ostream& out, std::span<const ShotRecord> records)
{
    out.write(kRecordMagic, sizeof kRecordMagic);
    const std::uint64_t count = records.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    for (const auto& r : records) {
        const std::int32_t row[3] = {r.k, r.n, r.m};
        out.write(reinterpret_cast<const char*>(row), sizeof row);
    }
}

std::vector<ShotRecord> read_records_binary(std::istream& in)
{
    char magic[sizeof kRecordMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kRecordMagic, sizeof magic) != 0) {
        throw InvalidArgument("not a binary record file");
    }
    std::uint64_t count = 0;
    if (!in.read(reinterpret_cast<char*>(&count), sizeof count)) {
        throw InvalidArgument("binary record file truncated in header");
    }
    std::vector<ShotRecord> out;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::int32_t row[3];
        if (!in.read(reinterpret_cast<char*>(row), sizeof row)) {
            throw InvalidArgument("binary record file truncated at record " + std::to_string(i));
        }
        out.push_back({row[0], row[1], row[2]});
    }
    return out;
}

void write_histogram_csv(std::ostream& out, const DiffDistribution& dist)
{
    out << "d,probability\n";
    for (int d = -dist.d_max(); d <= dist.d_max(); ++d) {
        out << d << ',' << format_real(dist(d)) << '\n';
    }
}

}  // namespace wfqpsk
