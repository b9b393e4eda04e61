#include "wfqpsk/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "wfqpsk/error.hpp"
#include "wfqpsk/numeric.hpp"

namespace wfqpsk {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

double to_double(const std::string& s)
{
    const std::string t = trim(s);
    double v = 0.0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw ConfigError("expected a finite number, got '" + s + "'");
    }
    return v;
}

template <class Int>
Int to_integer(const std::string& s)
{
    const std::string t = trim(s);
    Int v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
        throw ConfigError("expected an integer, got '" + s + "'");
    }
    return v;
}

bool to_bool(const std::string& s)
{
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "on") {
        return true;
    }
    if (t == "false" || t == "0" || t == "off") {
        return false;
    }
    throw ConfigError("expected true/false, got '" + s + "'");
}

std::string short_real(double x)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

template <class T>
std::string join(const std::vector<T>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) {
            out += ", ";
        }
        if constexpr (std::is_floating_point_v<T>) {
            out += short_real(v[i]);
        } else {
            out += std::to_string(v[i]);
        }
    }
    return out;
}

// Member-pointer adapters, one per field type.
ConfigKey field(std::string key, double RunConfig::*p)
{
    return {std::move(key), [p](const RunConfig& c) { return short_real(c.*p); },
            [p](RunConfig& c, const std::string& v) { c.*p = to_double(v); }};
}

ConfigKey field(std::string key, int RunConfig::*p)
{
    return {std::move(key), [p](const RunConfig& c) { return std::to_string(c.*p); },
            [p](RunConfig& c, const std::string& v) { c.*p = to_integer<int>(v); }};
}

ConfigKey field(std::string key, std::uint64_t RunConfig::*p)
{
    return {std::move(key), [p](const RunConfig& c) { return std::to_string(c.*p); },
            [p](RunConfig& c, const std::string& v) { c.*p = to_integer<std::uint64_t>(v); }};
}

ConfigKey field(std::string key, bool RunConfig::*p)
{
    return {std::move(key), [p](const RunConfig& c) { return std::string(c.*p ? "true" : "false"); },
            [p](RunConfig& c, const std::string& v) { c.*p = to_bool(v); }};
}

ConfigKey field(std::string key, std::string RunConfig::*p)
{
    return {std::move(key), [p](const RunConfig& c) { return c.*p; },
            [p](RunConfig& c, const std::string& v) { c.*p = trim(v); }};
}

ConfigKey field(std::string key, std::vector<double> RunConfig::*p)
{
    return {std::move(key), [p](const RunConfig& c) { return join(c.*p); },
            [p](RunConfig& c, const std::string& v) {
                std::vector<double> out;
                for (const auto& item : split(v, ',')) {
                    out.push_back(to_double(item));
                }
                c.*p = out;
            }};
}

ConfigKey field(std::string key, std::vector<int> RunConfig::*p)
{
    return {std::move(key), [p](const RunConfig& c) { return join(c.*p); },
            [p](RunConfig& c, const std::string& v) {
                std::vector<int> out;
                for (const auto& item : split(v, ',')) {
                    out.push_back(to_integer<int>(item));
                }
                c.*p = out;
            }};
}

ConfigKey field(std::string key, std::optional<double> RunConfig::*p)
{
    return {std::move(key), [p](const RunConfig& c) { return c.*p ? short_real(*(c.*p)) : std::string("auto"); },
            [p](RunConfig& c, const std::string& v) {
                if (trim(v) == "auto") {
                    c.*p = std::nullopt;
                } else {
                    c.*p = to_double(v);
                }
            }};
}

ConfigKey field(std::string key, std::optional<int> RunConfig::*p)
{
    return {std::move(key), [p](const RunConfig& c) { return c.*p ? std::to_string(*(c.*p)) : std::string("auto"); },
            [p](RunConfig& c, const std::string& v) {
                if (trim(v) == "auto") {
                    c.*p = std::nullopt;
                } else {
                    c.*p = to_integer<int>(v);
                }
            }};
}

ConfigKey noise_field(std::string key, double NoiseModel::*p)
{
    return {std::move(key), [p](const RunConfig& c) { return short_real(c.noise.*p); },
            [p](RunConfig& c, const std::string& v) { c.noise.*p = to_double(v); }};
}

std::vector<ConfigKey> build_keys()
{
    return {
        field("constellation.orders", &RunConfig::orders),
        field("constellation.alpha", &RunConfig::alpha),
        field("constellation.phi0", &RunConfig::phi0),

        field("receiver.lo_amplitude", &RunConfig::lo_amplitude),
        field("receiver.visibility", &RunConfig::visibilities),
        field("receiver.phase_jitter_rms", &RunConfig::phase_jitter_rms),
        field("receiver.n_max", &RunConfig::n_max),

        field("channel.loss_db", &RunConfig::loss_db),

        field("montecarlo.orders", &RunConfig::mc_orders),
        field("montecarlo.signal_means", &RunConfig::signal_means),
        field("montecarlo.lo_mean", &RunConfig::lo_mean),
        field("montecarlo.visibility", &RunConfig::mc_visibility),
        field("montecarlo.phase_jitter_rms", &RunConfig::mc_phase_jitter_rms),
        field("montecarlo.shots", &RunConfig::shots),
        field("montecarlo.repetitions", &RunConfig::repetitions),
        field("montecarlo.mi_shots", &RunConfig::mi_shots),
        field("montecarlo.bootstrap", &RunConfig::bootstrap),
        field("montecarlo.dark_mean", &RunConfig::dark_mean),
        field("montecarlo.crosstalk_prob", &RunConfig::crosstalk_prob),
        field("montecarlo.fidelity", &RunConfig::fidelity),
        field("montecarlo.records", &RunConfig::records),

        field("lock.kp", &RunConfig::kp),
        field("lock.ki", &RunConfig::ki),
        field("lock.crossover_hz", &RunConfig::crossover_hz),
        field("lock.phase_margin_deg", &RunConfig::phase_margin_deg),
        field("lock.include_slow", &RunConfig::include_slow),
        field("lock.slow_ki", &RunConfig::slow_ki),
        field("lock.setpoint", &RunConfig::setpoint),
        field("lock.output_min", &RunConfig::output_min),
        field("lock.output_max", &RunConfig::output_max),
        field("lock.actuator.bandwidth_hz", &RunConfig::actuator_bandwidth_hz),
        field("lock.actuator.gain", &RunConfig::actuator_gain),
        noise_field("lock.noise.drift_rate", &NoiseModel::drift_rate),
        noise_field("lock.noise.drift_slope", &NoiseModel::drift_slope),
        noise_field("lock.noise.band_rms", &NoiseModel::band_rms),
        noise_field("lock.noise.band_center_hz", &NoiseModel::band_center_hz),
        noise_field("lock.noise.band_linewidth_hz", &NoiseModel::band_linewidth_hz),
        noise_field("lock.noise.tone_rms", &NoiseModel::tone_rms),
        noise_field("lock.noise.tone_hz", &NoiseModel::tone_hz),
        noise_field("lock.noise.white_rms", &NoiseModel::white_rms),
        noise_field("lock.noise.box_drift_factor", &NoiseModel::box_drift_factor),
        noise_field("lock.noise.box_band_factor", &NoiseModel::box_band_factor),
        field("lock.duration_s", &RunConfig::duration_s),
        field("lock.dt_s", &RunConfig::dt_s),
        field("lock.seeds", &RunConfig::lock_seeds),
        field("lock.segment", &RunConfig::lock_segment),
        field("lock.overlap", &RunConfig::lock_overlap),
        field("lock.write_traces", &RunConfig::write_traces),

        field("analysis.input", &RunConfig::input),
        field("analysis.segment", &RunConfig::segment),
        field("analysis.overlap", &RunConfig::overlap),

        field("skellam.mu_t", &RunConfig::mu_t),
        field("skellam.mu_r", &RunConfig::mu_r),
        field("skellam.d_max", &RunConfig::d_max),

        field("run.seed", &RunConfig::seed),
        field("output.dir", &RunConfig::out_dir),
        field("output.format", &RunConfig::format),
    };
}

const ConfigKey& find_key(const std::string& key)
{
    for (const auto& k : config_keys()) {
        if (k.key == key) {
            return k;
        }
    }
    throw ConfigError("unknown key '" + key + "'");
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value)
{
    const auto& k = find_key(key);
    try {
        k.set(cfg, value);
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

[[noreturn]] void bad(const std::string& key, const std::string& why)
{
    throw ConfigError(key + ": " + why);
}

}  // namespace

NoiseModel RunConfig::default_noise()
{
    NoiseModel n;
    n.drift_rate = 0.10;
    n.band_rms = 0.20;
    n.band_center_hz = 20.0;
    n.band_linewidth_hz = 5.0;
    n.tone_rms = 0.12;
    n.tone_hz = 200.0;
    n.white_rms = 0.08;
    n.box_drift_factor = 0.5;
    n.box_band_factor = 0.9;
    return n;
}

std::vector<double> RunConfig::loss_grid() const
{
    const std::string spec = trim(loss_db);
    if (spec.empty()) {
        bad("channel.loss_db", "empty loss grid");
    }
    std::vector<double> grid;
    try {
        if (spec.find(':') != std::string::npos) {
            const auto parts = split(spec, ':');
            if (parts.size() != 3) {
                bad("channel.loss_db", "range must read start:stop:step");
            }
            const double start = to_double(parts[0]);
            const double stop = to_double(parts[1]);
            const double step = to_double(parts[2]);
            if (!(step > 0.0) || stop < start) {
                bad("channel.loss_db", "range needs step > 0 and stop >= start");
            }
            const long count = std::lround(std::floor((stop - start) / step + 1e-9));
            for (long i = 0; i <= count; ++i) {
                grid.push_back(start + static_cast<double>(i) * step);
            }
        } else {
            for (const auto& item : split(spec, ',')) {
                grid.push_back(to_double(item));
            }
        }
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        if (what.rfind("channel.loss_db", 0) == 0) {
            throw;
        }
        bad("channel.loss_db", what);
    }
    for (double x : grid) {
        if (x < 0.0) {
            bad("channel.loss_db", "losses must be >= 0 dB");
        }
    }
    return grid;
}

ActuatorModel RunConfig::actuator() const
{
    return {actuator_bandwidth_hz, actuator_gain};
}

PiConfig RunConfig::fast_lock() const
{
    PiConfig pi;
    if (!kp || !ki) {
        pi = design_fast_lock(crossover_hz, actuator(), phase_margin_deg);
    }
    if (kp) {
        pi.kp = *kp;
    }
    if (ki) {
        pi.ki = *ki;
    }
    pi.setpoint = setpoint;
    pi.output_min = output_min;
    pi.output_max = output_max;
    return pi;
}

std::optional<PiConfig> RunConfig::slow_lock() const
{
    if (!include_slow) {
        return std::nullopt;
    }
    PiConfig pi = slow_ki ? PiConfig{} : design_slow_lock(actuator(), phase_margin_deg);
    if (slow_ki) {
        pi.ki = *slow_ki;
    }
    pi.kp = 0.0;
    pi.setpoint = setpoint;
    pi.output_min = output_min;
    pi.output_max = output_max;
    return pi;
}

FidelityMetric RunConfig::fidelity_metric() const
{
    if (fidelity == "bhattacharyya") {
        return FidelityMetric::bhattacharyya;
    }
    if (fidelity == "product") {
        return FidelityMetric::product;
    }
    bad("montecarlo.fidelity", "expected bhattacharyya or product, got '" + fidelity + "'");
}

void RunConfig::validate() const
{
    auto check_orders = [](const std::string& key, const std::vector<int>& v) {
        if (v.empty()) {
            bad(key, "needs at least one order");
        }
        for (int m : v) {
            if (m < 2 || m > 16) {
                bad(key, "orders must lie in [2, 16]");
            }
        }
    };
    check_orders("constellation.orders", orders);
    check_orders("montecarlo.orders", mc_orders);
    if (!(alpha >= 0.0)) {
        bad("constellation.alpha", "must be >= 0");
    }
    if (!(lo_amplitude >= 0.0)) {
        bad("receiver.lo_amplitude", "must be >= 0");
    }
    if (visibilities.empty()) {
        bad("receiver.visibility", "needs at least one value");
    }
    for (double v : visibilities) {
        if (!(v >= 0.0 && v <= 1.0)) {
            bad("receiver.visibility", "values must lie in [0, 1]");
        }
    }
    if (!(phase_jitter_rms >= 0.0)) {
        bad("receiver.phase_jitter_rms", "must be >= 0");
    }
    if (n_max && *n_max < 1) {
        bad("receiver.n_max", "must be >= 1 or auto");
    }
    (void)loss_grid();

    if (signal_means.empty()) {
        bad("montecarlo.signal_means", "needs at least one value");
    }
    for (double v : signal_means) {
        if (!(v >= 0.0)) {
            bad("montecarlo.signal_means", "values must be >= 0");
        }
    }
    if (!(lo_mean >= 0.0)) {
        bad("montecarlo.lo_mean", "must be >= 0");
    }
    if (!(mc_visibility >= 0.0 && mc_visibility <= 1.0)) {
        bad("montecarlo.visibility", "must lie in [0, 1]");
    }
    if (!(mc_phase_jitter_rms >= 0.0)) {
        bad("montecarlo.phase_jitter_rms", "must be >= 0");
    }
    if (shots < 1) {
        bad("montecarlo.shots", "must be >= 1");
    }
    if (repetitions < 1) {
        bad("montecarlo.repetitions", "must be >= 1");
    }
    if (mi_shots < 1) {
        bad("montecarlo.mi_shots", "must be >= 1");
    }
    if (bootstrap < 2) {
        bad("montecarlo.bootstrap", "must be >= 2");
    }
    try {
        DetectorImperfections{dark_mean, crosstalk_prob}.validate();
    } catch (const InvalidArgument& e) {
        bad("montecarlo.dark_mean/crosstalk_prob", e.what());
    }
    (void)fidelity_metric();
    if (records != "none" && records != "csv" && records != "binary") {
        bad("montecarlo.records", "expected none, csv or binary");
    }

    try {
        actuator().validate();
    } catch (const InvalidArgument& e) {
        bad("lock.actuator", e.what());
    }
    try {
        noise.validate();
    } catch (const InvalidArgument& e) {
        bad("lock.noise", e.what());
    }
    try {
        fast_lock().validate();
        if (const auto slow = slow_lock()) {
            slow->validate();
        }
    } catch (const InvalidArgument& e) {
        bad("lock", e.what());
    }
    if (!(dt_s > 0.0)) {
        bad("lock.dt_s", "must be > 0");
    }
    if (!(duration_s >= 100.0 * dt_s)) {
        bad("lock.duration_s", "must cover at least 100 steps of lock.dt_s");
    }
    if (noise.max_frequency() > 0.0 && dt_s > 1.0 / (20.0 * noise.max_frequency())) {
        bad("lock.dt_s", "must be <= 1 / (20 * highest noise frequency)");
    }
    if (lock_seeds < 1) {
        bad("lock.seeds", "must be >= 1");
    }
    if (lock_segment < 2 || static_cast<double>(lock_segment) * dt_s > duration_s * (1.0 + 1e-9)) {
        bad("lock.segment", "must be >= 2 samples and fit in one trace");
    }
    if (!(lock_overlap >= 0.0 && lock_overlap <= 0.9)) {
        bad("lock.overlap", "must lie in [0, 0.9]");
    }
    if (segment < 2) {
        bad("analysis.segment", "must be >= 2");
    }
    if (!(overlap >= 0.0 && overlap <= 0.9)) {
        bad("analysis.overlap", "must lie in [0, 0.9]");
    }
    if (!(mu_t >= 0.0) || !(mu_r >= 0.0)) {
        bad("skellam.mu_t/mu_r", "means must be >= 0");
    }
    if (d_max && *d_max < 0) {
        bad("skellam.d_max", "must be >= 0 or auto");
    }
    if (out_dir.empty()) {
        bad("output.dir", "must not be empty");
    }
    if (format != "csv" && format != "json") {
        bad("output.format", "expected csv or json");
    }
}

const std::vector<ConfigKey>& config_keys()
{
    static const std::vector<ConfigKey> keys = build_keys();
    return keys;
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source)
{
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(number);
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (!seen.insert(key).second) {
            throw ConfigError(where + ": key '" + key + "' given twice");
        }
        try {
            set_key(cfg, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
}

void apply_config_file(RunConfig& cfg, const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(cfg, buf.str(), path);
}

void apply_override(RunConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override '" + assignment + "' must read key=value");
    }
    set_key(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

std::map<std::string, std::string> resolved_config(const RunConfig& cfg)
{
    std::map<std::string, std::string> out;
    for (const auto& k : config_keys()) {
        out[k.key] = k.get(cfg);
    }
    return out;
}

std::string render_config(const RunConfig& cfg)
{
    std::string out;
    std::string section;
    for (const auto& k : config_keys()) {
        const std::string head = k.key.substr(0, k.key.find('.'));
        if (head != section) {
            if (!section.empty()) {
                out += '\n';
            }
            section = head;
        }
        out += k.key + " = " + k.get(cfg) + '\n';
    }
    return out;
}

}  // namespace wfqpsk
