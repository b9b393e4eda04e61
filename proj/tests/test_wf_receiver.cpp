#include <doctest.h>

#include <cmath>
#include <vector>

#include "wfqpsk/constellation.hpp"
#include "wfqpsk/error.hpp"
#include "wfqpsk/numeric.hpp"
#include "wfqpsk/wf_receiver.hpp"

using namespace wfqpsk;

namespace {

// Poisson table by the multiplicative recurrence, independent of the log-space code.
std::vector<double> poisson_recurrence(double mu, int n_max)
{
    std::vector<double> p(n_max + 1);
    p[0] = std::exp(-mu);
    for (int n = 1; n <= n_max; ++n) {
        p[n] = p[n - 1] * mu / n;
    }
    return p;
}

WfReceiverParams operating_point()
{
    WfReceiverParams p;
    p.lo_amplitude = 3.53;
    p.visibility = 1.0;
    p.transmissivity = 1.0;
    return p;
}

}  // namespace

TEST_CASE("Gauss-Hermite rule integrates normal moments")
{
    const auto& r = gauss_hermite_normal(21);
    double m0 = 0, m2 = 0, m4 = 0, m6 = 0, m1 = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double x = r.nodes[i];
        m0 += r.weights[i];
        m1 += r.weights[i] * x;
        m2 += r.weights[i] * x * x;
        m4 += r.weights[i] * std::pow(x, 4);
        m6 += r.weights[i] * std::pow(x, 6);
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::fabs(m1) < 1e-13);
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m6 == doctest::Approx(15.0).epsilon(1e-12));
    double c = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        c += r.weights[i] * std::cos(0.25 * r.nodes[i]);
    }
    CHECK(c == doctest::Approx(std::exp(-0.25 * 0.25 / 2)).epsilon(1e-14));
    CHECK_THROWS_AS(gauss_hermite_normal(0), InvalidArgument);
}

TEST_CASE("Poisson helpers")
{
    const auto a = poisson_pmf_table(15.512, 80);
    const auto b = poisson_recurrence(15.512, 80);
    for (int n = 0; n <= 80; ++n) {
        CHECK(a[n] == doctest::Approx(b[n]).epsilon(1e-12));
    }
    CHECK(poisson_pmf_table(0.0, 3)[0] == 1.0);
    CHECK(poisson_pmf_table(0.0, 3)[2] == 0.0);
    CHECK(poisson_cutoff(15.512) == static_cast<int>(std::ceil(15.512 + 12 * std::sqrt(15.512) + 20)));
}

TEST_CASE("branch means")
{
    const auto m = branch_means({2.04, 0.0, 1.0}, operating_point());
    CHECK(m.transmitted == doctest::Approx(15.512).epsilon(1e-4));
    CHECK(m.reflected == doctest::Approx(1.110).epsilon(1e-3));
    // hand evaluation: (2.04^2 + 3.53^2 +- 2 * 2.04 * 3.53) / 2
    CHECK(m.transmitted == doctest::Approx(0.5 * (4.1616 + 12.4609 + 14.4024)).epsilon(1e-14));
    CHECK(m.reflected == doctest::Approx(0.5 * (4.1616 + 12.4609 - 14.4024)).epsilon(1e-12));

    WfReceiverParams vac;
    vac.lo_amplitude = 0.0;
    vac.visibility = 0.3;
    vac.transmissivity = 0.4;
    const auto v = branch_means({0.0, 1.0, 1.0}, vac);
    CHECK(v.transmitted == 0.0);
    CHECK(v.reflected == 0.0);

    const auto q = branch_means({2.04, kPi / 2, 1.0}, operating_point());
    CHECK(q.transmitted == doctest::Approx(q.reflected).epsilon(1e-12));
    CHECK(q.transmitted == doctest::Approx(8.31125).epsilon(1e-12));

    WfReceiverParams bad = operating_point();
    bad.visibility = 1.2;
    CHECK_THROWS_AS(branch_means({1.0, 0.0, 1.0}, bad), InvalidArgument);
    bad = operating_point();
    bad.transmissivity = -0.1;
    CHECK_THROWS_AS(branch_means({1.0, 0.0, 1.0}, bad), InvalidArgument);
    bad = operating_point();
    bad.n_max = 0;
    CHECK_THROWS_AS(branch_means({1.0, 0.0, 1.0}, bad), InvalidArgument);
}

TEST_CASE("branch mean invariants over a parameter grid")
{
    for (double a : {0.0, 0.5, 2.04, 4.0}) {
        for (double t : {0.0, 0.1, 0.5, 1.0}) {
            for (double phi : {0.0, 0.7, 2.0, 3.5}) {
                WfReceiverParams p = operating_point();
                p.transmissivity = t;
                double last_gap = -1.0;
                for (double xi : {0.0, 0.25, 0.5, 0.845, 1.0}) {
                    p.visibility = xi;
                    const auto m = branch_means({a, phi, 1.0}, p);
                    CHECK(m.transmitted + m.reflected == doctest::Approx(t * a * a + 3.53 * 3.53).epsilon(1e-14));
                    const double gap = std::fabs(m.transmitted - m.reflected);
                    CHECK(gap >= last_gap - 1e-12);
                    last_gap = gap;
                }
            }
        }
    }
}

TEST_CASE("joint table of a single symbol")
{
    WfReceiverParams p = operating_point();
    p.lo_amplitude = 0.0;
    p.n_max = 10;
    const auto vac = joint_pnr_conditional({0.0, 0.0, 1.0}, p);
    CHECK(vac(0, 0) == 1.0);
    CHECK(vac.total() == 1.0);

    // mu_t = 1, mu_r = 2: a = 1.5 + ... pick a, z, phi with those means
    // mu_t + mu_r = a^2 + z^2 = 3, mu_t - mu_r = 2 a z cos(phi) = -1
    WfReceiverParams q;
    q.lo_amplitude = std::sqrt(1.5);
    q.n_max = 60;
    const double a = std::sqrt(1.5);
    const double phi = std::acos(-1.0 / (2 * a * q.lo_amplitude));
    const auto mb = branch_means({a, phi, 1.0}, q);
    CHECK(mb.transmitted == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mb.reflected == doctest::Approx(2.0).epsilon(1e-12));
    const auto t = joint_pnr_conditional({a, phi, 1.0}, q);
    CHECK(t(0, 0) == doctest::Approx(0.049787068367863944).epsilon(1e-12));

    const auto big = joint_pnr_conditional({2.04, 0.3, 1.0}, operating_point());
    const auto mn = big.marginal_n();
    const auto mm = big.marginal_m();
    double worst = 0.0;
    for (int n = 0; n <= big.n_max(); ++n) {
        for (int m = 0; m <= big.n_max(); ++m) {
            worst = std::max(worst, std::fabs(big(n, m) - mn[n] * mm[m]));
        }
    }
    CHECK(worst < 1e-12);
    CHECK(std::fabs(big.total() - 1.0) < 1e-9);
}

TEST_CASE("automatic truncation and truncation errors")
{
    const auto c = build_psk(4, 2.04);
    const int n = auto_n_max(c, operating_point());
    CHECK(n == poisson_cutoff(branch_means({2.04, kPi / 8, 1.0}, operating_point()).transmitted));
    const double mu = branch_means({2.04, kPi / 8, 1.0}, operating_point()).transmitted;
    CHECK(n == static_cast<int>(std::ceil(mu + 12.0 * std::sqrt(mu) + 20.0)));
    WfReceiverParams p = operating_point();
    p.n_max = 12;
    CHECK_THROWS_AS(joint_pnr_conditional({2.04, 0.0, 1.0}, p), TruncationError);
    p.phase_jitter_rms = 0.25;
    p.n_max.reset();
    // with jitter the table must cover a symbol rotated onto the x axis
    CHECK(auto_n_max(c, p) == poisson_cutoff(branch_means({2.04, 0.0, 1.0}, operating_point()).transmitted));
}

TEST_CASE("mixture table")
{
    const Constellation single({{2.04, 0.4, 1.0}});
    const auto mix = joint_pnr_marginal(single, operating_point());
    const auto cond = joint_pnr_conditional(single[0], operating_point(), mix.n_max());
    for (std::size_t i = 0; i < mix.probs().size(); ++i) {
        CHECK(mix.probs()[i] == cond.probs()[i]);
    }

    const auto bpsk = joint_pnr_marginal(build_psk(2, 2.04, 0.0), operating_point());
    double worst = 0.0;
    for (int n = 0; n <= bpsk.n_max(); ++n) {
        for (int m = 0; m <= bpsk.n_max(); ++m) {
            worst = std::max(worst, std::fabs(bpsk(n, m) - bpsk(m, n)));
        }
    }
    CHECK(worst < 1e-15);
}

TEST_CASE("jitter averaging reduces to the plain table as sigma -> 0")
{
    WfReceiverParams p = operating_point();
    p.n_max = 80;
    const auto plain = joint_pnr_conditional({2.04, kPi / 8, 1.0}, p);
    p.phase_jitter_rms = 1e-7;
    const auto jit = joint_pnr_conditional({2.04, kPi / 8, 1.0}, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < plain.probs().size(); ++i) {
        worst = std::max(worst, std::fabs(plain.probs()[i] - jit.probs()[i]));
    }
    CHECK(worst < 1e-10);

    // independent check of the average at sigma = 0.25 by brute-force
    // trapezoid integration over the jitter density
    p.phase_jitter_rms = 0.25;
    const auto avg = joint_pnr_conditional({2.04, kPi / 8, 1.0}, p);
    const int n = 15, m = 2;
    double ref = 0.0;
    const int steps = 4000;
    const double lim = 10.0 * 0.25;
    const double h = 2 * lim / steps;
    for (int i = 0; i <= steps; ++i) {
        const double d = -lim + i * h;
        const double w = std::exp(-d * d / (2 * 0.0625)) / std::sqrt(2 * kPi * 0.0625) * (i == 0 || i == steps ? 0.5 : 1.0);
        const auto mu = branch_means_at(2.04, kPi / 8 + d, p);
        ref += h * w * poisson_recurrence(mu.transmitted, n)[n] * poisson_recurrence(mu.reflected, m)[m];
    }
    CHECK(avg(n, m) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("difference distribution")
{
    const auto sym = difference_dist(8.311, 8.311, 80);
    for (int d = 0; d <= 80; ++d) {
        CHECK(sym(d) == doctest::Approx(sym(-d)).epsilon(1e-14));
    }

    const auto one = difference_dist(3.0, 0.0, 40);
    const auto ref = poisson_recurrence(3.0, 40);
    for (int d = -40; d <= 40; ++d) {
        CHECK(one(d) == doctest::Approx(d >= 0 ? ref[d] : 0.0).epsilon(1e-13));
    }

    const auto fig = difference_dist(15.512, 1.110, skellam_d_max(15.512, 1.110));
    CHECK(fig.mean() == doctest::Approx(14.402).epsilon(1e-10));
    CHECK(fig.variance() == doctest::Approx(16.622).epsilon(1e-10));
    CHECK(fig.total() == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS_AS(difference_dist(15.5, 1.1, 5), TruncationError);
    CHECK_THROWS_AS(difference_dist(-1.0, 1.1, 5), InvalidArgument);
    CHECK(fig(1000) == 0.0);
}

TEST_CASE("difference distribution equals brute-force double sum")
{
    for (double mt : {0.5, 3.0, 12.0, 20.0}) {
        for (double mr : {0.0, 1.0, 7.5, 20.0}) {
            const int nmax = poisson_cutoff(std::max(mt, mr));
            const auto pt = poisson_recurrence(mt, nmax);
            const auto pr = poisson_recurrence(mr, nmax);
            std::vector<double> brute(2 * nmax + 1, 0.0);
            for (int n = 0; n <= nmax; ++n) {
                for (int m = 0; m <= nmax; ++m) {
                    brute[n - m + nmax] += pt[n] * pr[m];
                }
            }
            const auto d = difference_dist(mt, mr, nmax);
            double worst = 0.0;
            for (int k = -nmax; k <= nmax; ++k) {
                worst = std::max(worst, std::fabs(d(k) - brute[k + nmax]));
            }
            CHECK(worst < 1e-12);
        }
    }
}

TEST_CASE("Skellam closed form and joint-table diagonal sums")
{
    for (int d = -30; d <= 40; ++d) {
        const auto conv = difference_dist(15.512, 1.110, 60);
        CHECK(std::fabs(skellam_pmf(d, 15.512, 1.110) - conv(d)) < 1e-13);
    }
    CHECK(skellam_pmf(-2, 3.0, 0.0) == 0.0);
    CHECK(skellam_pmf(-2, 0.0, 3.0) == doctest::Approx(4.5 * std::exp(-3.0)));

    const auto joint = joint_pnr_conditional({2.04, 0.0, 1.0}, operating_point());
    const auto diag = difference_from_joint(joint);
    const auto mu = branch_means({2.04, 0.0, 1.0}, operating_point());
    const auto conv = difference_dist(mu.transmitted, mu.reflected, diag.d_max());
    for (int d = -diag.d_max(); d <= diag.d_max(); ++d) {
        CHECK(std::fabs(diag(d) - conv(d)) < 1e-12);
    }
    const auto wide = conv.padded(diag.d_max() + 5);
    CHECK(wide(diag.d_max() + 5) == 0.0);
    CHECK_THROWS_AS(conv.padded(1), InvalidArgument);
}
