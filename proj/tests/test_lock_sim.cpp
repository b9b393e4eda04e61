#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <set>
#include <vector>

#include "wfqpsk/constellation.hpp"
#include "wfqpsk/error.hpp"
#include "wfqpsk/lock_sim.hpp"

using namespace wfqpsk;

namespace {

// Open-loop transfer (kp + ki / s) * g / (1 + s / wa) at s = j 2 pi f.
std::complex<double> loop_gain(const PiConfig& pi, const ActuatorModel& act, double f)
{
    const std::complex<double> s(0.0, kTwoPi * f);
    return (pi.kp + pi.ki / s) * act.gain / (1.0 + s / (kTwoPi * act.bandwidth_hz));
}

double phase_margin_deg(const PiConfig& pi, const ActuatorModel& act)
{
    double lo = 1e-3, hi = 1e4;  // |L| falls monotonically through 1
    for (int i = 0; i < 200; ++i) {
        const double mid = std::sqrt(lo * hi);
        (std::abs(loop_gain(pi, act, mid)) > 1.0 ? lo : hi) = mid;
    }
    return 180.0 + std::arg(loop_gain(pi, act, lo)) * 180.0 / kPi;
}

double tail_mean(const PhaseTrace& t, std::size_t n)
{
    return std::accumulate(t.samples.end() - n, t.samples.end(), 0.0) / static_cast<double>(n);
}

double tail_rms(const std::vector<double>& x, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = x.size() - n; i < x.size(); ++i) {
        s += x[i] * x[i];
    }
    return std::sqrt(s / static_cast<double>(n));
}

}  // namespace

TEST_CASE("PI step")
{
    PiConfig cfg;
    cfg.kp = 2.0;
    cfg.ki = 10.0;
    const auto a = pi_step({}, 0.5, 0.1, cfg);
    CHECK(a.state.integral == doctest::Approx(0.05));
    CHECK(a.actuation == doctest::Approx(1.5));
    const auto b = pi_step(a.state, -0.2, 0.1, cfg);
    CHECK(b.state.integral == doctest::Approx(0.03));
    CHECK(b.actuation == doctest::Approx(-0.4 + 0.3));

    cfg.output_max = 1.0;
    const auto c = pi_step({0.2}, 0.5, 0.1, cfg);
    CHECK(c.actuation == 1.0);
    CHECK(c.state.integral == 0.2);  // frozen while saturated
    cfg.output_min = -1.0;
    const auto d = pi_step({0.2}, -5.0, 0.1, cfg);
    CHECK(d.actuation == -1.0);
    CHECK(d.state.integral == 0.2);

    PiConfig bad;
    bad.ki = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    PiConfig inverted;
    inverted.output_min = 1.0;
    inverted.output_max = 0.0;
    CHECK_THROWS_AS(inverted.validate(), InvalidArgument);
}

TEST_CASE("fast lock design reaches the requested margin")
{
    const ActuatorModel act;
    const auto pi = design_fast_lock(12.0, act);
    CHECK(pi.kp == doctest::Approx(0.53923).epsilon(1e-4));
    CHECK(pi.ki == doctest::Approx(110.536).epsilon(1e-4));
    CHECK(std::abs(loop_gain(pi, act, 12.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(phase_margin_deg(pi, act) == doctest::Approx(60.0).epsilon(1e-9));

    ActuatorModel other{25.0, 3.0};
    for (double fc : {30.0, 60.0, 150.0}) {
        for (double pm : {45.0, 60.0}) {
            CHECK(phase_margin_deg(design_fast_lock(fc, other, pm), other) == doctest::Approx(pm).epsilon(1e-9));
        }
    }
    // a PI zero only adds lag: below fa tan(90 - PM) the margin is out of reach
    CHECK_THROWS_AS(design_fast_lock(5.0, other, 60.0), InvalidArgument);
    CHECK_THROWS_AS(design_fast_lock(0.0, act), InvalidArgument);
}

TEST_CASE("slow lock design is integral-only at the requested margin")
{
    const ActuatorModel act;
    const auto pi = design_slow_lock(act);
    CHECK(pi.kp == 0.0);
    CHECK(pi.ki > 0.0);
    CHECK(phase_margin_deg(pi, act) == doctest::Approx(60.0).epsilon(1e-9));
    CHECK(pi.ki < design_fast_lock(12.0, act).ki);
    CHECK_THROWS_AS(design_slow_lock(act, 95.0), InvalidArgument);
}

TEST_CASE("lock removes a static offset and tracks a ramp with the type-1 error")
{
    const ActuatorModel act;
    const auto pi = design_fast_lock(12.0, act);
    const double dt = 1e-4;
    std::vector<double> offset(50000, 1.0);
    const auto held = run_loop(offset, dt, pi, act);
    CHECK(std::fabs(tail_mean(held, 5000)) < 1e-6);

    const double slope = 0.8;  // rad / s
    std::vector<double> ramp(60000);
    for (std::size_t i = 0; i < ramp.size(); ++i) {
        ramp[i] = slope * i * dt;
    }
    const auto tracked = run_loop(ramp, dt, pi, act);
    CHECK(tail_mean(tracked, 5000) == doctest::Approx(slope / (pi.ki * act.gain)).epsilon(0.01));

    // residual slope over the last second, least squares
    const std::size_t n = 10000;
    double st = 0.0, sp = 0.0, stt = 0.0, stp = 0.0;
    for (std::size_t i = tracked.samples.size() - n; i < tracked.samples.size(); ++i) {
        const double t = i * dt;
        st += t;
        sp += tracked.samples[i];
        stt += t * t;
        stp += t * tracked.samples[i];
    }
    const double fit = (n * stp - st * sp) / (n * stt - st * st);
    CHECK(std::fabs(fit) < 1e-6);
}

TEST_CASE("drift-only disturbance under the fast lock gives a falling Allan curve")
{
    const ActuatorModel act;
    NoiseModel drift;
    drift.drift_rate = 0.1;
    drift.drift_slope = 0.05;
    std::vector<double> mean;
    for (std::uint64_t s = 0; s < 5; ++s) {
        drift.seed = s;
        const auto curve = overlapping_allan(simulate_lock(10.0, 1e-4, design_fast_lock(12.0, act), act, drift));
        mean.resize(curve.adev.size(), 0.0);
        for (std::size_t i = 0; i < curve.adev.size(); ++i) {
            mean[i] += curve.adev[i] / 5.0;
        }
    }
    for (std::size_t i = 1; i < mean.size(); ++i) {
        CHECK(mean[i] <= mean[i - 1]);
    }
}

TEST_CASE("a 200 Hz line passes the 12 Hz lock almost untouched")
{
    const ActuatorModel act;
    const auto pi = design_fast_lock(12.0, act);
    const double dt = 1e-4;
    std::vector<double> tone(40000);
    for (std::size_t i = 0; i < tone.size(); ++i) {
        tone[i] = 0.3 * std::sin(kTwoPi * 200.0 * i * dt);
    }
    const auto out = run_loop(tone, dt, pi, act);
    const double ratio = tail_rms(out.samples, 20000) / tail_rms(tone, 20000);
    CHECK(std::fabs(ratio - 1.0) < 0.05);
    // matches the sensitivity function
    const double s = 1.0 / std::abs(1.0 + loop_gain(pi, act, 200.0));
    CHECK(ratio == doctest::Approx(s).epsilon(0.01));
}

TEST_CASE("disturbance model")
{
    NoiseModel n;
    n.seed = 4;
    const double dt = 1e-4;
    const std::size_t len = 400000;

    n.white_rms = 0.08;
    auto x = generate_noise(n, len, dt);
    CHECK(rms_phase({x, dt}) == doctest::Approx(0.08).epsilon(0.01));

    NoiseModel tone;
    tone.tone_rms = 0.12;
    x = generate_noise(tone, len, dt);
    CHECK(rms_phase({x, dt}) == doctest::Approx(0.12).epsilon(1e-3));

    NoiseModel band;
    band.band_rms = 0.2;
    band.seed = 8;
    double var = 0.0;
    for (std::uint64_t s = 0; s < 8; ++s) {
        band.seed = s;
        const auto b = generate_noise(band, len, dt);
        var += rms_phase({b, dt}) * rms_phase({b, dt}) / 8.0;
    }
    CHECK(std::sqrt(var) == doctest::Approx(0.2).epsilon(0.05));

    NoiseModel ramp;
    ramp.drift_slope = 0.5;
    x = generate_noise(ramp, 1001, 1e-3);
    CHECK(x.back() == doctest::Approx(0.5).epsilon(1e-12));
    ramp.box_closed = true;
    ramp.box_drift_factor = 0.4;
    CHECK(generate_noise(ramp, 1001, 1e-3).back() == doctest::Approx(0.2).epsilon(1e-12));

    // components draw from independent streams
    NoiseModel both = n;
    both.tone_rms = 0.12;
    const auto w = generate_noise(n, 1000, dt);
    const auto wt = generate_noise(both, 1000, dt);
    const auto t_only = generate_noise(NoiseModel{.tone_rms = 0.12, .seed = 4}, 1000, dt);
    for (std::size_t i = 0; i < 1000; ++i) {
        CHECK(wt[i] == doctest::Approx(w[i] + t_only[i]).epsilon(1e-12));
    }
}

TEST_CASE("simulation is deterministic and lock-off returns the disturbance")
{
    NoiseModel n{.drift_rate = 0.1, .band_rms = 0.2, .tone_rms = 0.12, .white_rms = 0.08, .seed = 11};
    const ActuatorModel act;
    const auto pi = design_fast_lock(12.0, act);
    const auto a = simulate_lock(1.0, 1e-4, pi, act, n);
    const auto b = simulate_lock(1.0, 1e-4, pi, act, n);
    CHECK(a.samples == b.samples);
    n.seed = 12;
    CHECK(simulate_lock(1.0, 1e-4, pi, act, n).samples != a.samples);

    const auto off = simulate_lock(1.0, 1e-4, std::nullopt, act, n);
    CHECK(off.samples == generate_noise(n, 10000, 1e-4));

    CHECK_THROWS_AS(simulate_lock(1.0, 1e-3, pi, act, n), InvalidArgument);  // 200 Hz needs dt <= 250 us
    CHECK_THROWS_AS(simulate_lock(1e-3, 1e-4, pi, act, n), InvalidArgument);
}

TEST_CASE("an unstable loop raises DivergenceError")
{
    const ActuatorModel act;
    PiConfig hot;
    hot.kp = 1e5;
    std::vector<double> d(20000, 1.0);
    CHECK_THROWS_AS(run_loop(d, 1e-4, hot, act), DivergenceError);
}

TEST_CASE("operating conditions")
{
    NoiseModel n{.drift_rate = 0.1, .band_rms = 0.2, .white_rms = 0.08, .box_drift_factor = 0.5,
                 .box_band_factor = 0.9, .seed = 3};
    const ActuatorModel act;
    const auto fast = design_fast_lock(12.0, act);
    const auto four = four_conditions(n, fast, std::nullopt, act, 0.5, 1e-4);
    REQUIRE(four.size() == 4);
    CHECK(four[0].label == "off/open");
    CHECK(four[1].label == "off/closed");
    CHECK(four[2].label == "fast/open");
    CHECK(four[3].label == "fast/closed");
    std::set<std::vector<double>> distinct;
    for (const auto& c : four) {
        CHECK(c.trace.samples.size() == 5000);
        distinct.insert(c.trace.samples);
    }
    CHECK(distinct.size() == 4);

    NoiseModel open = n;
    open.seed = derive_seed(n.seed, 100);
    CHECK(four[0].trace.samples == generate_noise(open, 5000, 1e-4));
    NoiseModel closed = n;
    closed.seed = derive_seed(n.seed, 101);
    closed.box_closed = true;
    CHECK(four[1].trace.samples == generate_noise(closed, 5000, 1e-4));

    const auto six = four_conditions(n, fast, design_slow_lock(act), act, 0.5, 1e-4);
    REQUIRE(six.size() == 6);
    CHECK(six[5].label == "slow/closed");
    CHECK(six[3].trace.samples == four[3].trace.samples);
}

TEST_CASE("derived seeds")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t base : {0ULL, 1ULL, 2ULL}) {
        for (std::uint64_t s = 0; s < 200; ++s) {
            seen.insert(derive_seed(base, s));
        }
    }
    CHECK(seen.size() == 600);
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}
