#include "wfqpsk/wf_receiver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wfqpsk/error.hpp"
#include "wfqpsk/numeric.hpp"

namespace wfqpsk {

void WfReceiverParams::validate() const
{
    if (!(lo_amplitude >= 0.0) || !std::isfinite(lo_amplitude)) {
        throw InvalidArgument("receiver.lo_amplitude must be finite and >= 0");
    }
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw InvalidArgument("receiver.visibility must lie in [0, 1]");
    }
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
        throw InvalidArgument("channel transmissivity must lie in [0, 1]");
    }
    if (n_max && *n_max < 1) {
        throw InvalidArgument("receiver.n_max must be >= 1");
    }
    if (!(phase_jitter_rms >= 0.0) || !std::isfinite(phase_jitter_rms)) {
        throw InvalidArgument("receiver.phase_jitter_rms must be finite and >= 0");
    }
}

BranchMeans branch_means_at(double amplitude, double phase, const WfReceiverParams& params)
{
    const double t = params.transmissivity;
    const double z = params.lo_amplitude;
    const double total = t * amplitude * amplitude + z * z;
    const double cross = 2.0 * params.visibility * std::sqrt(t) * amplitude * z * std::cos(phase);
    // cross <= total by AM-GM, clamp only guards rounding
    return {std::max(0.0, 0.5 * (total + cross)), std::max(0.0, 0.5 * (total - cross))};
}

BranchMeans branch_means(const CoherentSymbol& symbol, const WfReceiverParams& params)
{
    params.validate();
    return branch_means_at(symbol.amplitude, symbol.phase, params);
}

int auto_n_max(const Constellation& c, const WfReceiverParams& params)
{
    double mu_big = 0.0;
    for (const auto& s : c.symbols()) {
        double mu;
        if (params.phase_jitter_rms > 0.0) {
            mu = branch_means_at(s.amplitude, 0.0, params).transmitted;
        } else {
            const auto b = branch_means_at(s.amplitude, s.phase, params);
            mu = std::max(b.transmitted, b.reflected);
        }
        mu_big = std::max(mu_big, mu);
    }
    return poisson_cutoff(mu_big);
}

int resolve_n_max(const Constellation& c, const WfReceiverParams& params)
{
    return params.n_max ? *params.n_max : auto_n_max(c, params);
}

bool within_homodyne_limit(const Constellation& c, const WfReceiverParams& params)
{
    const double a = c.max_amplitude();
    const double z = params.lo_amplitude;
    return z * z >= 3.0 * params.transmissivity * a * a;
}

JointPnrDistribution::JointPnrDistribution(int n_max)
    : n_max_(n_max), probs_(static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(n_max + 1), 0.0)
{
}

double JointPnrDistribution::total() const
{
    double s = 0.0;
    for (double p : probs_) {
        s += p;
    }
    return s;
}

double JointPnrDistribution::truncation_mass() const
{
    return std::max(0.0, 1.0 - total());
}

std::vector<double> JointPnrDistribution::marginal_n() const
{
    std::vector<double> out(dim(), 0.0);
    for (int n = 0; n <= n_max_; ++n) {
        for (int m = 0; m <= n_max_; ++m) {
            out[n] += (*this)(n, m);
        }
    }
    return out;
}

std::vector<double> JointPnrDistribution::marginal_m() const
{
    std::vector<double> out(dim(), 0.0);
    for (int n = 0; n <= n_max_; ++n) {
        for (int m = 0; m <= n_max_; ++m) {
            out[m] += (*this)(n, m);
        }
    }
    return out;
}

namespace {

void accumulate_product(JointPnrDistribution& table, const BranchMeans& mu, double weight)
{
    const int n_max = table.n_max();
    const auto pt = poisson_pmf_table(mu.transmitted, n_max);
    const auto pr = poisson_pmf_table(mu.reflected, n_max);
    for (int n = 0; n <= n_max; ++n) {
        const double a = weight * pt[n];
        if (a == 0.0) {
            continue;
        }
        for (int m = 0; m <= n_max; ++m) {
            table.at(n, m) += a * pr[m];
        }
    }
}

}  // namespace

JointPnrDistribution joint_pnr_conditional(const CoherentSymbol& symbol, const WfReceiverParams& params, int n_max)
{
    params.validate();
    if (n_max < 1) {
        throw InvalidArgument("n_max must be >= 1");
    }
    JointPnrDistribution table(n_max);
    if (params.phase_jitter_rms > 0.0) {
        const auto& rule = gauss_hermite_normal(kJitterNodes);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double phase = symbol.phase + params.phase_jitter_rms * rule.nodes[i];
            accumulate_product(table, branch_means_at(symbol.amplitude, phase, params), rule.weights[i]);
        }
    } else {
        accumulate_product(table, branch_means_at(symbol.amplitude, symbol.phase, params), 1.0);
    }
    const double lost = table.truncation_mass();
    if (lost > kMaxTruncationMass) {
        throw TruncationError("joint PNR table loses " + std::to_string(lost) + " of its mass at n_max = " +
                              std::to_string(n_max) + "; increase n_max");
    }
    return table;
}

JointPnrDistribution joint_pnr_conditional(const CoherentSymbol& symbol, const WfReceiverParams& params)
{
    const Constellation single({CoherentSymbol{symbol.amplitude, symbol.phase, 1.0}});
    return joint_pnr_conditional(symbol, params, resolve_n_max(single, params));
}

std::vector<JointPnrDistribution> joint_pnr_conditionals(const Constellation& c, const WfReceiverParams& params)
{
    params.validate();
    const int n_max = resolve_n_max(c, params);
    std::vector<JointPnrDistribution> out;
    out.reserve(c.size());
    for (const auto& s : c.symbols()) {
        out.push_back(joint_pnr_conditional(s, params, n_max));
    }
    return out;
}

JointPnrDistribution joint_pnr_marginal(const Constellation& c, const WfReceiverParams& params)
{
    const auto conditionals = joint_pnr_conditionals(c, params);
    JointPnrDistribution mix(conditionals.front().n_max());
    for (std::size_t k = 0; k < conditionals.size(); ++k) {
        const double q = c[k].prior;
        const auto& src = conditionals[k].probs();
        auto& dst = mix.probs();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] += q * src[i];
        }
    }
    return mix;
}

DiffDistribution::DiffDistribution(int d_max) : d_max_(d_max), probs_(static_cast<std::size_t>(2 * d_max + 1), 0.0)
{
    if (d_max < 0) {
        throw InvalidArgument("d_max must be >= 0");
    }
}

DiffDistribution::DiffDistribution(int d_max, std::vector<double> probs) : d_max_(d_max), probs_(std::move(probs))
{
    if (d_max < 0 || probs_.size() != static_cast<std::size_t>(2 * d_max + 1)) {
        throw InvalidArgument("difference distribution needs 2 d_max + 1 entries");
    }
    for (double p : probs_) {
        if (!(p >= 0.0)) {
            throw InvalidArgument("difference distribution entries must be >= 0");
        }
    }
}

double DiffDistribution::operator()(int d) const
{
    if (d < -d_max_ || d > d_max_) {
        return 0.0;
    }
    return probs_[static_cast<std::size_t>(d + d_max_)];
}

double DiffDistribution::total() const
{
    double s = 0.0;
    for (double p : probs_) {
        s += p;
    }
    return s;
}

double DiffDistribution::mean() const
{
    double s = 0.0;
    for (int d = -d_max_; d <= d_max_; ++d) {
        s += d * (*this)(d);
    }
    return s / total();
}

double DiffDistribution::variance() const
{
    const double mu = mean();
    double s = 0.0;
    for (int d = -d_max_; d <= d_max_; ++d) {
        s += (d - mu) * (d - mu) * (*this)(d);
    }
    return s / total();
}

DiffDistribution DiffDistribution::padded(int d_max) const
{
    if (d_max < d_max_) {
        throw InvalidArgument("cannot pad a difference distribution to a smaller support");
    }
    DiffDistribution out(d_max);
    for (int d = -d_max_; d <= d_max_; ++d) {
        out.at(d) = (*this)(d);
    }
    return out;
}

DiffDistribution difference_from_joint(const JointPnrDistribution& joint)
{
    const int n_max = joint.n_max();
    DiffDistribution out(n_max);
    for (int n = 0; n <= n_max; ++n) {
        for (int m = 0; m <= n_max; ++m) {
            out.at(n - m) += joint(n, m);
        }
    }
    return out;
}

int skellam_d_max(double mu_t, double mu_r)
{
    return static_cast<int>(std::ceil(std::fabs(mu_t - mu_r) + 12.0 * std::sqrt(mu_t + mu_r) + 20.0));
}

DiffDistribution difference_dist(double mu_t, double mu_r, int d_max)
{
    if (!(mu_t >= 0.0) || !(mu_r >= 0.0)) {
        throw InvalidArgument("Poisson means must be >= 0");
    }
    if (d_max < 0) {
        throw InvalidArgument("d_max must be >= 0");
    }
    const int n_hi = poisson_cutoff(mu_t);
    const int m_hi = poisson_cutoff(mu_r);
    const auto pt = poisson_pmf_table(mu_t, n_hi);
    const auto pr = poisson_pmf_table(mu_r, m_hi);
    DiffDistribution out(d_max);
    for (int d = -d_max; d <= d_max; ++d) {
        double s = 0.0;
        const int m_lo = std::max(0, -d);
        const int m_top = std::min(m_hi, n_hi - d);
        for (int m = m_lo; m <= m_top; ++m) {
            s += pt[m + d] * pr[m];
        }
        out.at(d) = s;
    }
    const double lost = 1.0 - out.total();
    if (lost > 1e-9) {
        throw TruncationError("difference support [-" + std::to_string(d_max) + ", " + std::to_string(d_max) +
                              "] misses " + format_real(lost) + " of the mass");
    }
    return out;
}

double skellam_pmf(int d, double mu_t, double mu_r)
{
    if (!(mu_t >= 0.0) || !(mu_r >= 0.0)) {
        throw InvalidArgument("Poisson means must be >= 0");
    }
    if (mu_r == 0.0) {
        return d >= 0 ? std::exp(poisson_log_pmf(d, mu_t)) : 0.0;
    }
    if (mu_t == 0.0) {
        return d <= 0 ? std::exp(poisson_log_pmf(-d, mu_r)) : 0.0;
    }
    const double x = 2.0 * std::sqrt(mu_t * mu_r);
    if (x > 600.0) {
        throw NumericalError("Skellam closed form overflows for these means");
    }
    const double bessel = std::cyl_bessel_i(static_cast<double>(std::abs(d)), x);
    return std::exp(-(mu_t + mu_r) + 0.5 * d * std::log(mu_t / mu_r)) * bessel;
}

}  // namespace wfqpsk
