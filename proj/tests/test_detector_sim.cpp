#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "wfqpsk/constellation.hpp"
#include "wfqpsk/detector_sim.hpp"
#include "wfqpsk/error.hpp"
#include "wfqpsk/wf_receiver.hpp"

using namespace wfqpsk;

namespace {

WfReceiverParams lo(double z = 3.53)
{
    WfReceiverParams p;
    p.lo_amplitude = z;
    return p;
}

double total_variation(const DiffDistribution& a, const DiffDistribution& b)
{
    const int d = std::max(a.d_max(), b.d_max());
    double s = 0.0;
    for (int i = -d; i <= d; ++i) {
        s += std::fabs(a(i) - b(i));
    }
    return 0.5 * s;
}

DiffDistribution mirrored(const DiffDistribution& x)
{
    DiffDistribution out(x.d_max());
    for (int d = -x.d_max(); d <= x.d_max(); ++d) {
        out.at(d) = x(-d);
    }
    return out;
}

}  // namespace

TEST_CASE("count statistics with dark counts and crosstalk")
{
    const DetectorImperfections imp{0.3, 0.1};
    const CoherentSymbol s{2.04, 0.7, 1.0};
    const auto p = lo();
    const auto mu = branch_means(s, p);
    std::mt19937_64 rng(5);
    const int shots = 400000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < shots; ++i) {
        const auto shot = sample_shot(0, s, p, imp, rng);
        sum += shot.record.n;
        sq += double(shot.record.n) * shot.record.n;
    }
    const double lam = mu.transmitted + 0.3;
    const double mean = sum / shots;
    const double var = sq / shots - mean * mean;
    // n + Binomial(n, p) on a Poisson n: mean lam (1 + p), variance lam (1 + 3 p)
    const double expect_var = lam * 1.3;
    CHECK(std::fabs(mean - lam * 1.1) < 4.0 * std::sqrt(expect_var / shots));
    CHECK(var == doctest::Approx(expect_var).epsilon(0.02));
}

TEST_CASE("range warning outside the reliable branch means")
{
    std::mt19937_64 rng(1);
    const DetectorImperfections imp;
    CHECK_FALSE(sample_shot(0, {2.04, 0.4, 1.0}, lo(), imp, rng).range_warning);
    CHECK(sample_shot(0, {2.04, 0.0, 1.0}, lo(6.0), imp, rng).range_warning);
    CHECK_THROWS_AS((DetectorImperfections{-1.0, 0.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((DetectorImperfections{0.0, 1.0}.validate()), InvalidArgument);
}

TEST_CASE("empirical histograms converge to the analytic law")
{
    const auto c = build_psk(4, 2.04);
    const auto p = lo();
    double prev = 1.0;
    for (std::uint64_t shots : {4000ULL, 40000ULL, 400000ULL}) {
        const auto r = run_experiment(c, p, {}, shots, 17, true);
        double worst = 0.0;
        for (int k = 0; k < 4; ++k) {
            const auto emp = empirical_difference_dist(r.records, k);
            const auto mu = branch_means(c[k], p);
            const auto theory = difference_dist(mu.transmitted, mu.reflected, skellam_d_max(mu.transmitted, mu.reflected));
            worst = std::max(worst, total_variation(emp, theory));
        }
        CHECK(worst < prev);
        prev = worst;
    }
    CHECK(prev < 0.01);
}

TEST_CASE("experiments are reproducible and independent of worker count")
{
    const auto c = build_psk(4, 2.04);
    auto p = lo();
    p.phase_jitter_rms = 0.2;
    const DetectorImperfections imp{0.003, 0.02};
    const std::uint64_t shots = 3 * kShotBlock + 77;
    const auto a = run_experiment(c, p, imp, shots, 99, true, 1);
    const auto b = run_experiment(c, p, imp, shots, 99, true, 3);
    CHECK(a.records == b.records);
    CHECK(a.counts.table() == b.counts.table());
    CHECK(a.counts.total() == shots);
    CHECK(a.records.size() == shots);
    const auto other = run_experiment(c, p, imp, shots, 100, true, 1);
    CHECK(other.records != a.records);
    CHECK(run_experiment(c, p, imp, 10, 99).records.empty());
    CHECK_THROWS_AS(run_experiment(c, p, imp, 0, 99), InvalidArgument);
}

TEST_CASE("mirror symbols give mirrored histograms")
{
    const auto c = build_psk(4, 2.04);  // symbols 0 and 2 sit at phi and phi + pi
    const auto r = run_experiment(c, lo(), {}, 400000, 3, true);
    const auto h0 = empirical_difference_dist(r.records, 0);
    const auto h2 = empirical_difference_dist(r.records, 2);
    const int d = std::max(h0.d_max(), h2.d_max());
    CHECK(fidelity(h0.padded(d), mirrored(h2.padded(d))) > 0.999);
    CHECK(fidelity(h0.padded(d), h2.padded(d)) < 0.5);
}

TEST_CASE("fidelity and overlap")
{
    const auto a = difference_dist(15.512, 1.110, 60);
    const auto b = difference_dist(1.110, 15.512, 60);
    const auto c = difference_dist(8.0, 8.0, 60);
    CHECK(fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(a, b) == doctest::Approx(fidelity(b, a)).epsilon(1e-14));
    CHECK(fidelity(a, b) < fidelity(a, c));
    CHECK(fidelity(a, c) <= 1.0);
    CHECK(histogram_overlap(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(histogram_overlap(a, b) < fidelity(a, b));

    double prod = 0.0;
    for (int d = -60; d <= 60; ++d) {
        prod += a(d) * c(d);
    }
    CHECK(fidelity(a, c, FidelityMetric::product) == doctest::Approx(prod).epsilon(1e-14));

    CHECK_THROWS_AS(fidelity(a, difference_dist(15.512, 1.110, 61)), InvalidArgument);
    DiffDistribution half(2);
    half.at(0) = 0.5;
    DiffDistribution unit(2);
    unit.at(0) = 1.0;
    CHECK_THROWS_AS(fidelity(half, unit), InvalidArgument);
    CHECK(histogram_overlap(unit, difference_dist(0.0, 0.0, 5)) == doctest::Approx(1.0));
}

TEST_CASE("histogram from records")
{
    const std::vector<ShotRecord> rec{{0, 3, 1}, {0, 0, 2}, {1, 5, 5}, {0, 3, 1}};
    const auto all = empirical_difference_dist(rec);
    CHECK(all.d_max() == 2);
    CHECK(all(2) == 0.5);
    CHECK(all(-2) == 0.25);
    CHECK(all(0) == 0.25);
    const auto one = empirical_difference_dist(rec, 1);
    CHECK(one(0) == 1.0);
    CHECK_THROWS_AS(empirical_difference_dist(rec, 3), InvalidArgument);
}

TEST_CASE("record file round trips")
{
    const auto r = run_experiment(build_psk(2, 2.04, 0.0), lo(), {0.003, 0.0}, 500, 1, true);
    std::stringstream csv;
    write_records_csv(csv, r.records);
    CHECK(read_records_csv(csv) == r.records);

    std::stringstream bin;
    write_records_binary(bin, r.records);
    CHECK(bin.str().substr(0, 8) == "WFQREC1\n");
    CHECK(bin.str().size() == 16 + 12 * r.records.size());
    CHECK(read_records_binary(bin) == r.records);

    std::stringstream cut(bin.str().substr(0, 40));
    CHECK_THROWS_AS(read_records_binary(cut), InvalidArgument);
    std::stringstream neg("k,n,m\n0,-1,2\n");
    CHECK_THROWS_AS(read_records_csv(neg), InvalidArgument);
}

TEST_CASE("detected-count law")
{
    const CoherentSymbol s{2.04, 0.7, 1.0};
    const auto p = lo();
    const auto ideal = joint_pnr_conditional(s, p);
    const auto same = detected_joint(s, p, {});
    CHECK(same.n_max() == ideal.n_max());
    CHECK(same.probs() == ideal.probs());

    const DetectorImperfections imp{0.3, 0.1};
    const auto det = detected_joint(s, p, imp);
    CHECK(det.total() == doctest::Approx(ideal.total()).epsilon(1e-12));
    const auto mu = branch_means(s, p);
    const auto mn = det.marginal_n();
    double mean = 0.0, sq = 0.0;
    for (std::size_t n = 0; n < mn.size(); ++n) {
        mean += n * mn[n];
        sq += double(n) * n * mn[n];
    }
    const double lam = mu.transmitted + 0.3;
    CHECK(mean == doctest::Approx(lam * 1.1).epsilon(1e-10));
    CHECK(sq - mean * mean == doctest::Approx(lam * 1.3).epsilon(1e-9));

    // simulated shots follow the detected law
    const auto c = build_psk(2, 2.04, 0.0);
    const auto r = run_experiment(c, p, imp, 400000, 21, true);
    for (int k = 0; k < 2; ++k) {
        const auto theory = difference_from_joint(detected_joint(c[k], p, imp));
        CHECK(total_variation(empirical_difference_dist(r.records, k), theory) < 0.01);
    }
}

TEST_CASE("detector noise cannot add information")
{
    const auto c = build_psk(4, 2.04);
    const auto p = lo();
    const std::vector<double> priors(4, 0.25);
    const double ideal = wf_mutual_information(c, p).mi_bits;
    CHECK(mutual_information(priors, detected_conditionals(c, p, {})).mi_bits ==
          doctest::Approx(ideal).epsilon(1e-13));
    double last = ideal;
    for (double dark : {0.003, 0.1, 1.0}) {
        const double mi = mutual_information(priors, detected_conditionals(c, p, {dark, 0.01})).mi_bits;
        CHECK(mi <= last + 1e-12);
        last = mi;
    }
}
