#include "wfqpsk/lock_sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "wfqpsk/constellation.hpp"
#include "wfqpsk/error.hpp"
#include "wfqpsk/numeric.hpp"

namespace wfqpsk {

void PiConfig::validate() const
{
    if (!(kp >= 0.0) || !(ki >= 0.0)) {
        throw InvalidArgument("PI gains must be >= 0");
    }
    if (!(output_min < output_max)) {
        throw InvalidArgument("PI output limits need min < max");
    }
}

PiOutput pi_step(const PiState& state, double error, double dt, const PiConfig& cfg)
{
    const double candidate = state.integral + error * dt;
    const double u = cfg.kp * error + cfg.ki * candidate;
    PiOutput out;
    out.state = state;
    if (u > cfg.output_max) {
        out.actuation = cfg.output_max;
    } else if (u < cfg.output_min) {
        out.actuation = cfg.output_min;
    } else {
        out.actuation = u;
        out.state.integral = candidate;
    }
    return out;
}

void ActuatorModel::validate() const
{
    if (!(bandwidth_hz > 0.0)) {
        throw InvalidArgument("actuator bandwidth must be > 0");
    }
    if (!std::isfinite(gain) || gain == 0.0) {
        throw InvalidArgument("actuator gain must be finite and nonzero");
    }
}

void NoiseModel::validate() const
{
    for (double v : {drift_rate, band_rms, tone_rms, white_rms, box_drift_factor, box_band_factor}) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw InvalidArgument("noise amplitudes and box factors must be finite and >= 0");
        }
    }
    if (!std::isfinite(drift_slope)) {
        throw InvalidArgument("drift slope must be finite");
    }
    if (!(band_center_hz >= 0.0) || !(band_linewidth_hz > 0.0) || !(tone_hz >= 0.0)) {
        throw InvalidArgument("noise frequencies must be >= 0 and the linewidth > 0");
    }
}

double NoiseModel::max_frequency() const
{
    double f = 0.0;
    if (band_rms > 0.0) {
        f = std::max(f, band_center_hz + band_linewidth_hz);
    }
    if (tone_rms > 0.0) {
        f = std::max(f, tone_hz);
    }
    return f;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<double> generate_noise(const NoiseModel& noise, std::size_t samples, double dt)
{
    noise.validate();
    if (!(dt > 0.0)) {
        throw InvalidArgument("dt must be > 0");
    }
    std::vector<double> out(samples, 0.0);
    // separate streams so turning one component off leaves the others unchanged
    std::mt19937_64 rng_drift(derive_seed(noise.seed, 0));
    std::mt19937_64 rng_band(derive_seed(noise.seed, 1));
    std::mt19937_64 rng_tone(derive_seed(noise.seed, 2));
    std::mt19937_64 rng_white(derive_seed(noise.seed, 3));
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double drift_scale = noise.box_closed ? noise.box_drift_factor : 1.0;
    const double band_scale = noise.box_closed ? noise.box_band_factor : 1.0;

    double walk = 0.0;
    const double step = noise.drift_rate * std::sqrt(dt) * drift_scale;
    for (std::size_t i = 0; i < samples; ++i) {
        walk += step * gauss(rng_drift);
        out[i] += walk + noise.drift_slope * drift_scale * static_cast<double>(i) * dt;
    }

    if (noise.band_rms > 0.0) {
        // complex Ornstein-Uhlenbeck rotating at the band center: Lorentzian
        // line of FWHM band_linewidth_hz, stationary E|z|^2 = 1
        const double gamma = kPi * noise.band_linewidth_hz;
        const std::complex<double> decay = std::exp(std::complex<double>(-gamma, kTwoPi * noise.band_center_hz) * dt);
        const double kick = std::sqrt(1.0 - std::exp(-2.0 * gamma * dt));
        const double amp = std::sqrt(2.0) * noise.band_rms * band_scale;
        auto unit = [&] { return std::complex<double>(gauss(rng_band), gauss(rng_band)) / std::sqrt(2.0); };
        std::complex<double> z = unit();
        for (std::size_t i = 0; i < samples; ++i) {
            if (i > 0) {
                z = z * decay + kick * unit();
            }
            out[i] += amp * z.real();
        }
    }

    if (noise.tone_rms > 0.0) {
        const double phase0 = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng_tone);
        const double amp = std::sqrt(2.0) * noise.tone_rms;
        for (std::size_t i = 0; i < samples; ++i) {
            out[i] += amp * std::sin(kTwoPi * noise.tone_hz * static_cast<double>(i) * dt + phase0);
        }
    }

    if (noise.white_rms > 0.0) {
        for (std::size_t i = 0; i < samples; ++i) {
            out[i] += noise.white_rms * gauss(rng_white);
        }
    }
    return out;
}

PhaseTrace run_loop(const std::vector<double>& disturbance, double dt, const std::optional<PiConfig>& pi,
                    const ActuatorModel& actuator)
{
    actuator.validate();
    PhaseTrace trace;
    trace.dt = dt;
    if (!pi) {
        trace.samples = disturbance;
        return trace;
    }
    pi->validate();
    trace.samples.resize(disturbance.size());
    const double wa = kTwoPi * actuator.bandwidth_hz;
    PiState state;
    double a = 0.0;
    for (std::size_t i = 0; i < disturbance.size(); ++i) {
        const double phi = disturbance[i] + actuator.gain * a;
        if (!(std::fabs(phi) <= 1e3)) {
            throw DivergenceError("phase lock diverged (|phi| > 1e3 rad) with kp = " + format_real(pi->kp) +
                                  ", ki = " + format_real(pi->ki) + " at t = " + format_real(dt * i) + " s");
        }
        trace.samples[i] = phi - pi->setpoint;
        const auto step = pi_step(state, pi->setpoint - phi, dt, *pi);
        state = step.state;
        a += dt * wa * (step.actuation - a);
    }
    return trace;
}

PhaseTrace simulate_lock(double duration, double dt, const std::optional<PiConfig>& pi, const ActuatorModel& actuator,
                         const NoiseModel& noise)
{
    if (!(dt > 0.0)) {
        throw InvalidArgument("dt must be > 0");
    }
    if (!(duration >= 100.0 * dt)) {
        throw InvalidArgument("duration must cover at least 100 steps");
    }
    noise.validate();
    const double f_max = noise.max_frequency();
    if (f_max > 0.0 && dt > 1.0 / (20.0 * f_max)) {
        throw InvalidArgument("dt too coarse: need dt <= 1 / (20 * " + format_real(f_max) + " Hz)");
    }
    const auto samples = static_cast<std::size_t>(std::llround(duration / dt));
    return run_loop(generate_noise(noise, samples, dt), dt, pi, actuator);
}

PiConfig design_fast_lock(double crossover_hz, const ActuatorModel& actuator, double phase_margin_deg)
{
    actuator.validate();
    const double wc = kTwoPi * crossover_hz;
    const double wa = kTwoPi * actuator.bandwidth_hz;
    // phase of (kp + ki / s) must be PM - 180 + 90 + atan(wc / wa) at wc
    const double theta = (phase_margin_deg - 90.0) * kPi / 180.0 + std::atan(wc / wa);
    if (!(crossover_hz > 0.0) || !(theta > 0.0 && theta < kPi / 2)) {
        throw InvalidArgument("no PI controller reaches that phase margin at this crossover");
    }
    const double r = std::tan(theta);  // wc kp / ki
    const double plant = std::fabs(actuator.gain) / std::sqrt(1.0 + (wc / wa) * (wc / wa));
    PiConfig cfg;
    cfg.kp = 1.0 / (plant * std::sqrt(1.0 + 1.0 / (r * r)));
    cfg.ki = wc * cfg.kp / r;
    return cfg;
}

PiConfig design_slow_lock(const ActuatorModel& actuator, double phase_margin_deg)
{
    actuator.validate();
    const double wa = kTwoPi * actuator.bandwidth_hz;
    if (!(phase_margin_deg > 0.0 && phase_margin_deg < 90.0)) {
        throw InvalidArgument("integral-only lock needs a phase margin in (0, 90) degrees");
    }
    // -90 - atan(wc / wa) = PM - 180
    const double wc = wa * std::tan((90.0 - phase_margin_deg) * kPi / 180.0);
    PiConfig cfg;
    cfg.ki = wc * std::sqrt(1.0 + (wc / wa) * (wc / wa)) / std::fabs(actuator.gain);
    return cfg;
}

std::vector<LabeledTrace> four_conditions(const NoiseModel& noise, const PiConfig& pi_fast,
                                          const std::optional<PiConfig>& pi_slow, const ActuatorModel& actuator,
                                          double duration, double dt)
{
    struct Condition {
        const char* label;
        std::optional<PiConfig> pi;
        bool closed;
    };
    std::vector<Condition> plan = {
        {"off/open", std::nullopt, false},
        {"off/closed", std::nullopt, true},
        {"fast/open", pi_fast, false},
        {"fast/closed", pi_fast, true},
    };
    if (pi_slow) {
        plan.push_back({"slow/open", pi_slow, false});
        plan.push_back({"slow/closed", pi_slow, true});
    }
    std::vector<LabeledTrace> out;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        NoiseModel n = noise;
        n.box_closed = plan[i].closed;
        n.seed = derive_seed(noise.seed, 100 + i);
        out.push_back({plan[i].label, simulate_lock(duration, dt, plan[i].pi, actuator, n)});
    }
    return out;
}

}  // namespace wfqpsk
