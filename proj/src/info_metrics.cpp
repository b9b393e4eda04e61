#include "wfqpsk/info_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wfqpsk/error.hpp"
#include "wfqpsk/numeric.hpp"

namespace wfqpsk {

double shannon_entropy(std::span<const double> dist)
{
    double sum = 0.0;
    double h = 0.0;
    for (double p : dist) {
        if (!(p >= 0.0)) {
            throw InvalidArgument("invalid distribution: negative or NaN entry");
        }
        sum += p;
        h += entropy_term(p);
    }
    if (sum > 1.0 + 1e-9) {
        throw InvalidArgument("invalid distribution: entries sum above 1");
    }
    return h;
}

MiResult wf_mutual_information(const Constellation& c, const WfReceiverParams& params)
{
    std::vector<double> priors;
    for (const auto& s : c.symbols()) {
        priors.push_back(s.prior);
    }
    return mutual_information(priors, joint_pnr_conditionals(c, params));
}

MiResult mutual_information(std::span<const double> priors, const std::vector<JointPnrDistribution>& conditionals)
{
    if (conditionals.empty() || conditionals.size() != priors.size()) {
        throw InvalidArgument("need one conditional table per prior");
    }
    std::vector<double> mix(conditionals.front().probs().size(), 0.0);
    MiResult r;
    for (std::size_t k = 0; k < conditionals.size(); ++k) {
        if (conditionals[k].probs().size() != mix.size()) {
            throw InvalidArgument("conditional tables differ in size");
        }
        const double q = priors[k];
        const auto& p = conditionals[k].probs();
        for (std::size_t i = 0; i < mix.size(); ++i) {
            mix[i] += q * p[i];
        }
        r.conditional_entropy_bits += q * shannon_entropy(p);
        r.truncation_mass = std::max(r.truncation_mass, conditionals[k].truncation_mass());
    }
    r.marginal_entropy_bits = shannon_entropy(mix);
    r.mi_bits = r.marginal_entropy_bits - r.conditional_entropy_bits;
    if (r.mi_bits < 0.0) {
        // rounding only; conditioning cannot raise entropy
        r.mi_bits = 0.0;
        r.conditional_entropy_bits = r.marginal_entropy_bits;
    }
    return r;
}

OutcomeCounts::OutcomeCounts(int num_symbols) : num_symbols_(num_symbols)
{
    if (num_symbols < 1) {
        throw InvalidArgument("need at least one symbol");
    }
}

void OutcomeCounts::add(int k, int n, int m, std::uint64_t times)
{
    if (k < 0 || k >= num_symbols_) {
        throw InvalidArgument("symbol index out of range");
    }
    auto& row = table_[{n, m}];
    if (row.empty()) {
        row.assign(static_cast<std::size_t>(num_symbols_), 0);
    }
    row[static_cast<std::size_t>(k)] += times;
    total_ += times;
}

void OutcomeCounts::merge(const OutcomeCounts& other)
{
    if (other.num_symbols_ != num_symbols_) {
        throw InvalidArgument("cannot merge counts over different alphabets");
    }
    for (const auto& [outcome, row] : other.table_) {
        for (int k = 0; k < num_symbols_; ++k) {
            if (row[k] != 0) {
                add(k, outcome.first, outcome.second, row[k]);
            }
        }
    }
}

std::uint64_t OutcomeCounts::count(int k, int n, int m) const
{
    auto it = table_.find({n, m});
    if (it == table_.end() || k < 0 || k >= num_symbols_) {
        return 0;
    }
    return it->second[static_cast<std::size_t>(k)];
}

namespace {

double plugin_mi_flat(const std::vector<std::uint64_t>& cells, int num_symbols)
{
    // cells laid out outcome-major, num_symbols per outcome
    double total = 0.0;
    for (auto c : cells) {
        total += static_cast<double>(c);
    }
    std::vector<double> per_symbol(static_cast<std::size_t>(num_symbols), 0.0);
    double h_joint = 0.0;
    double h_outcome = 0.0;
    for (std::size_t i = 0; i < cells.size(); i += num_symbols) {
        double row = 0.0;
        for (int k = 0; k < num_symbols; ++k) {
            const double p = static_cast<double>(cells[i + k]) / total;
            h_joint += entropy_term(p);
            per_symbol[k] += p;
            row += p;
        }
        h_outcome += entropy_term(row);
    }
    double h_symbol = 0.0;
    for (double p : per_symbol) {
        h_symbol += entropy_term(p);
    }
    return std::max(0.0, h_symbol + h_outcome - h_joint);
}

std::vector<std::uint64_t> flatten(const OutcomeCounts& counts)
{
    std::vector<std::uint64_t> cells;
    cells.reserve(counts.table().size() * counts.num_symbols());
    for (const auto& [outcome, row] : counts.table()) {
        cells.insert(cells.end(), row.begin(), row.end());
    }
    return cells;
}

}  // namespace

double plugin_mi_estimate(const OutcomeCounts& counts)
{
    if (counts.total() == 0) {
        throw InvalidArgument("plug-in MI needs at least one counted shot");
    }
    return plugin_mi_flat(flatten(counts), counts.num_symbols());
}

double plugin_mi_bootstrap_se(const OutcomeCounts& counts, int replicates, std::uint64_t seed)
{
    if (counts.total() == 0) {
        throw InvalidArgument("bootstrap needs at least one counted shot");
    }
    if (replicates < 2) {
        throw InvalidArgument("bootstrap needs at least two replicates");
    }
    const auto cells = flatten(counts);
    const double n = static_cast<double>(counts.total());
    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> draw(cells.size());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int b = 0; b < replicates; ++b) {
        // multinomial redraw by sequential conditional binomials
        std::uint64_t left = counts.total();
        double mass_left = n;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (left == 0 || cells[i] == 0) {
                draw[i] = 0;
                continue;
            }
            const double p = std::min(1.0, static_cast<double>(cells[i]) / mass_left);
            std::binomial_distribution<std::uint64_t> binom(left, p);
            draw[i] = binom(rng);
            left -= draw[i];
            mass_left -= static_cast<double>(cells[i]);
        }
        const double mi = plugin_mi_flat(draw, counts.num_symbols());
        sum += mi;
        sum_sq += mi * mi;
    }
    const double mean = sum / replicates;
    const double var = (sum_sq - replicates * mean * mean) / (replicates - 1);
    return std::sqrt(std::max(0.0, var));
}

}  // namespace wfqpsk
