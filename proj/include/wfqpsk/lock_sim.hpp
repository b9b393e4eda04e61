#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wfqpsk/phase_metrology.hpp"

namespace wfqpsk {

struct PiConfig {
    double kp = 0.0;
    double ki = 0.0;  // 1/s
    double setpoint = 0.0;
    double output_min = -1e9;
    double output_max = 1e9;

    void validate() const;
};

struct PiState {
    double integral = 0.0;  // accumulated error * dt
};

struct PiOutput {
    double actuation = 0.0;
    PiState state;
};

/// One controller update. The integral only advances when the clamped
/// output is not saturated (conditional-integration anti-windup).
PiOutput pi_step(const PiState& state, double error, double dt, const PiConfig& cfg);

/// Piezo response: first-order low-pass on the controller output.
struct ActuatorModel {
    double bandwidth_hz = 10.0;
    double gain = 1.0;  // rad per unit actuation

    void validate() const;
};

/// Additive phase disturbance seen by the interferometer.
struct NoiseModel {
    double drift_rate = 0.0;    // random-walk phase, rad / sqrt(s)
    double drift_slope = 0.0;   // deterministic ramp, rad / s
    double band_rms = 0.0;      // narrow-band acoustic peak, rad
    double band_center_hz = 20.0;
    double band_linewidth_hz = 5.0;  // Lorentzian FWHM
    double tone_rms = 0.0;      // mechanical line, rad
    double tone_hz = 200.0;
    double white_rms = 0.0;
    bool box_closed = false;
    double box_drift_factor = 1.0;  // applied to drift when the box is closed
    double box_band_factor = 1.0;   // applied to the narrow band when closed
    std::uint64_t seed = 0;

    void validate() const;
    double max_frequency() const;
};

/// Disturbance samples phi_n[i] at t = i dt; deterministic in noise.seed.
std::vector<double> generate_noise(const NoiseModel& noise, std::size_t samples, double dt);

/// Explicit-Euler loop phi_i = n_i + gain * a_i, error = setpoint - phi_i,
/// a <- a + dt 2 pi f_a (u - a). Returns phi - setpoint; with the lock off
/// (pi == nullopt) the raw disturbance. DivergenceError if |phi| > 1e3.
PhaseTrace simulate_lock(double duration, double dt, const std::optional<PiConfig>& pi, const ActuatorModel& actuator,
                         const NoiseModel& noise);

/// Same loop driven by a caller-supplied disturbance.
PhaseTrace run_loop(const std::vector<double>& disturbance, double dt, const std::optional<PiConfig>& pi,
                    const ActuatorModel& actuator);

/// PI gains with crossover at crossover_hz and the requested phase margin
/// against the single-pole actuator.
PiConfig design_fast_lock(double crossover_hz, const ActuatorModel& actuator, double phase_margin_deg = 60.0);

/// Integral-only gain with the requested phase margin against the actuator.
PiConfig design_slow_lock(const ActuatorModel& actuator, double phase_margin_deg = 60.0);

struct LabeledTrace {
    std::string label;  // e.g. "off/open", "fast/closed"
    PhaseTrace trace;
};

/// off/open, off/closed, fast/open, fast/closed (plus slow/open, slow/closed
/// when a slow lock is given). Each condition draws its noise from its own
/// seed derived from noise.seed; box state comes from the label.
std::vector<LabeledTrace> four_conditions(const NoiseModel& noise, const PiConfig& pi_fast,
                                          const std::optional<PiConfig>& pi_slow, const ActuatorModel& actuator,
                                          double duration, double dt);

/// splitmix64 finalizer, used to derive independent stream seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace wfqpsk
