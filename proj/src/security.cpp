#include "wfqpsk/security.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wfqpsk/error.hpp"
#include "wfqpsk/info_metrics.hpp"
#include "wfqpsk/numeric.hpp"

namespace wfqpsk {

namespace {

constexpr double kJacobiTol = 1e-14;
constexpr double kNegativeEigenTol = 1e-10;
constexpr double kSkipProbability = 1e-15;

std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n)
{
    auto idx = [n](int i, int j) { return static_cast<std::size_t>(i) * n + j; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        double scale = 0.0;
        for (int i = 0; i < n; ++i) {
            scale += a[idx(i, i)] * a[idx(i, i)];
            for (int j = i + 1; j < n; ++j) {
                off += a[idx(i, j)] * a[idx(i, j)];
            }
        }
        if (std::sqrt(off) <= kJacobiTol * std::max(1.0, std::sqrt(scale))) {
            break;
        }
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[idx(p, q)];
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a[idx(q, q)] - a[idx(p, p)]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[idx(k, p)];
                    const double akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[idx(p, k)];
                    const double aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ev[i] = a[idx(i, i)];
    }
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace

void Ensemble::validate() const
{
    if (amplitudes.size() != weights.size() || amplitudes.empty()) {
        throw InvalidArgument("ensemble needs matching, nonempty amplitude and weight lists");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) {
            throw InvalidArgument("ensemble weights must be >= 0");
        }
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
        throw InvalidArgument("ensemble weights must sum to 1");
    }
}

Ensemble eve_ensemble(const Constellation& c, double transmissivity)
{
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
        throw InvalidArgument("transmissivity must lie in [0, 1]");
    }
    Ensemble e;
    const double leak = std::sqrt(1.0 - transmissivity);
    for (const auto& s : c.symbols()) {
        e.amplitudes.push_back(leak * s.complex_amplitude());
        e.weights.push_back(s.prior);
    }
    return e;
}

std::complex<double> coherent_overlap(std::complex<double> a, std::complex<double> b)
{
    return std::exp(-0.5 * std::norm(a) - 0.5 * std::norm(b) + std::conj(a) * b);
}

std::vector<double> hermitian_eigenvalues(const std::vector<std::complex<double>>& a, int n)
{
    if (n < 1 || a.size() != static_cast<std::size_t>(n) * n) {
        throw InvalidArgument("Hermitian matrix must be n x n");
    }
    const int m = 2 * n;
    std::vector<double> big(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            // symmetrize so rounding in the input cannot break the embedding
            const auto h = 0.5 * (a[static_cast<std::size_t>(i) * n + j] + std::conj(a[static_cast<std::size_t>(j) * n + i]));
            big[static_cast<std::size_t>(i) * m + j] = h.real();
            big[static_cast<std::size_t>(i + n) * m + j + n] = h.real();
            big[static_cast<std::size_t>(i) * m + j + n] = -h.imag();
            big[static_cast<std::size_t>(i + n) * m + j] = h.imag();
        }
    }
    const auto doubled = symmetric_eigenvalues(std::move(big), m);
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ev[i] = 0.5 * (doubled[2 * i] + doubled[2 * i + 1]);
    }
    return ev;
}

namespace {

double gram_entropy(const std::vector<std::complex<double>>& beta, const std::vector<double>& w)
{
    const int n = static_cast<int>(beta.size());
    if (n == 1) {
        return 0.0;
    }
    std::vector<std::complex<double>> g(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            g[static_cast<std::size_t>(j) * n + k] = std::sqrt(w[j] * w[k]) * coherent_overlap(beta[j], beta[k]);
        }
    }
    double h = 0.0;
    for (double lambda : hermitian_eigenvalues(g, n)) {
        if (lambda < -kNegativeEigenTol) {
            throw NumericalError("Gram spectrum has a negative eigenvalue " + std::to_string(lambda));
        }
        h += entropy_term(std::max(0.0, lambda));
    }
    return h;
}

}  // namespace

double vn_entropy(const Ensemble& e)
{
    e.validate();
    return gram_entropy(e.amplitudes, e.weights);
}

EveConditionalEntropy conditional_eve_entropy(const Constellation& c, const WfReceiverParams& params)
{
    const auto eve = eve_ensemble(c, params.transmissivity);
    const auto conditionals = joint_pnr_conditionals(c, params);
    const std::size_t cells = conditionals.front().probs().size();
    const std::size_t k_count = c.size();

    EveConditionalEntropy out;
    std::vector<double> w(k_count);
    for (std::size_t i = 0; i < cells; ++i) {
        double p = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
            w[k] = c[k].prior * conditionals[k].probs()[i];
            p += w[k];
        }
        if (p < kSkipProbability) {
            out.skipped_mass += p;
            continue;
        }
        for (auto& x : w) {
            x /= p;
        }
        out.bits += p * gram_entropy(eve.amplitudes, w);
    }
    return out;
}

KgrResult kgr(const Constellation& c, const WfReceiverParams& params)
{
    KgrResult r;
    r.mi_bits = wf_mutual_information(c, params).mi_bits;
    r.s_e_bits = vn_entropy(eve_ensemble(c, params.transmissivity));
    const auto cond = conditional_eve_entropy(c, params);
    r.s_e_given_b_bits = cond.bits;
    r.skipped_mass = cond.skipped_mass;
    r.holevo_bits = r.s_e_bits - r.s_e_given_b_bits;
    r.kgr_bits = r.mi_bits - r.holevo_bits;
    r.insecure = r.kgr_bits < 0.0;
    return r;
}

}  // namespace wfqpsk
