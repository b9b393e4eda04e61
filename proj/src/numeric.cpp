#include "wfqpsk/numeric.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "wfqpsk/error.hpp"

namespace wfqpsk {

double poisson_log_pmf(int n, double mu)
{
    if (n < 0) {
        return -std::numeric_limits<double>::infinity();
    }
    if (mu == 0.0) {
        return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    return -mu + n * std::log(mu) - std::lgamma(n + 1.0);
}

std::vector<double> poisson_pmf_table(double mu, int n_max)
{
    std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        p[n] = std::exp(poisson_log_pmf(n, mu));
    }
    return p;
}

int poisson_cutoff(double mu)
{
    return static_cast<int>(std::ceil(mu + 12.0 * std::sqrt(mu) + 20.0));
}

namespace {

GaussRule build_gauss_hermite(int n)
{
    // Physicists' Hermite nodes (weight exp(-x^2)), Newton refinement from the
    // classic asymptotic starting guesses; roots are symmetric.
    constexpr double kPim4 = 0.7511255444649425;  // pi^(-1/4)
    std::vector<double> x(n), w(n);
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * x[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * x[1];
        } else {
            z = 2.0 * z - x[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = kPim4;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) <= 1e-15) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // ascending order, rescaled: X = sqrt(2) x, weight / sqrt(pi)
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = std::sqrt(2.0) * x[n - 1 - i];
        rule.weights[i] = w[n - 1 - i] / std::sqrt(3.14159265358979323846);
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_hermite_normal(int n)
{
    if (n < 1 || n > 200) {
        throw InvalidArgument("Gauss-Hermite order must lie in [1, 200]");
    }
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, build_gauss_hermite(n)).first;
    }
    return it->second;
}

std::vector<double> simpson_weights(int intervals, double h)
{
    if (intervals < 2 || intervals % 2 != 0) {
        throw InvalidArgument("Simpson rule needs an even number of intervals");
    }
    std::vector<double> w(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) {
        double c = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        w[i] = c * h / 3.0;
    }
    return w;
}

std::string format_real(double x)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

double entropy_term(double p)
{
    return p > 0.0 ? -p * std::log2(p) : 0.0;
}

}  // namespace wfqpsk
