#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wfqpsk/detector_sim.hpp"
#include "wfqpsk/lock_sim.hpp"
#include "wfqpsk/wf_receiver.hpp"

namespace wfqpsk {

/// Every knob of a run. Defaults give the baseline operating point
/// (alpha = 2.04, z = 3.53, xi = 1) and the calibrated lock model; config
/// files and --set override them key by key.
struct RunConfig {
    // constellation.*
    std::vector<int> orders{2, 4};
    double alpha = 2.04;
    std::optional<double> phi0;  // nullopt: 0 for BPSK, pi/(2M) otherwise

    // receiver.*
    double lo_amplitude = 3.53;
    std::vector<double> visibilities{1.0};
    double phase_jitter_rms = 0.0;
    std::optional<int> n_max;

    // channel.*
    std::string loss_db = "0:10:0.25";  // list "a, b, c" or range "start:stop:step"

    // montecarlo.*
    std::vector<int> mc_orders{2, 4};
    std::vector<double> signal_means{4.13, 1.78};
    double lo_mean = 12.5;
    double mc_visibility = 1.0;
    double mc_phase_jitter_rms = 0.0;
    std::uint64_t shots = 200000;
    int repetitions = 4;
    std::uint64_t mi_shots = 50000;
    int bootstrap = 200;
    double dark_mean = 0.003;
    double crosstalk_prob = 0.0;
    std::string fidelity = "bhattacharyya";
    std::string records = "none";  // none | csv | binary

    // lock.*
    std::optional<double> kp;  // nullopt: designed from crossover and phase margin
    std::optional<double> ki;
    double crossover_hz = 12.0;
    double phase_margin_deg = 60.0;
    bool include_slow = false;
    std::optional<double> slow_ki;
    double setpoint = 0.0;
    double output_min = -50.0;
    double output_max = 50.0;
    double actuator_bandwidth_hz = 10.0;
    double actuator_gain = 1.0;
    NoiseModel noise = default_noise();
    double duration_s = 20.0;
    double dt_s = 1e-4;
    int lock_seeds = 10;
    int lock_segment = 16384;
    double lock_overlap = 0.5;
    bool write_traces = true;

    // analysis.* (allan / asd on an input trace)
    std::string input;
    int segment = 16384;
    double overlap = 0.5;

    // skellam.*
    double mu_t = 15.512;
    double mu_r = 1.110;
    std::optional<int> d_max;

    // run.* / output.*
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::string format = "csv";

    static NoiseModel default_noise();

    std::vector<double> loss_grid() const;
    ActuatorModel actuator() const;
    PiConfig fast_lock() const;
    std::optional<PiConfig> slow_lock() const;
    FidelityMetric fidelity_metric() const;

    /// Rechecks every module invariant; throws ConfigError naming the key.
    void validate() const;
};

struct ConfigKey {
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

/// All accepted keys in file order.
const std::vector<ConfigKey>& config_keys();

/// Applies `key = value` lines (# comments, blank lines allowed) on top of cfg.
/// Unknown or repeated keys and bad values raise ConfigError with the line.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source = "<config>");
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Applies one `key=value` override.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// key -> value text for every key, as written by render_config.
std::map<std::string, std::string> resolved_config(const RunConfig& cfg);

/// Full config file text for cfg, one key per line, grouped by section.
std::string render_config(const RunConfig& cfg);

}  // namespace wfqpsk
