#include "wfqpsk/phase_metrology.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>

#include "wfqpsk/constellation.hpp"
#include "wfqpsk/error.hpp"
#include "wfqpsk/numeric.hpp"

namespace wfqpsk {

static_assert(std::endian::native == std::endian::little, "binary trace IO assumes a little-endian host");

void PhaseTrace::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidArgument("trace dt must be finite and > 0");
    }
    for (double x : samples) {
        if (std::isnan(x)) {
            throw InvalidArgument("trace contains NaN");
        }
    }
}

FringePhase fringe_to_phase(std::span<const double> intensity, double i_min, double i_max, double dt)
{
    if (!(i_max > i_min)) {
        throw InvalidArgument("fringe normalization needs i_max > i_min");
    }
    FringePhase out;
    out.trace.dt = dt;
    out.trace.samples.reserve(intensity.size());
    std::size_t clipped = 0;
    for (double v : intensity) {
        if (v < i_min || v > i_max) {
            ++clipped;
            v = std::clamp(v, i_min, i_max);
        }
        const double u = std::clamp(2.0 * (v - i_min) / (i_max - i_min) - 1.0, -1.0, 1.0);
        out.trace.samples.push_back(std::acos(u));
    }
    out.trace.validate();
    if (!intensity.empty()) {
        out.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(intensity.size());
    }
    out.clip_warning = out.clipped_fraction > 0.05;
    return out;
}

std::vector<double> default_allan_taus(std::size_t n, double dt)
{
    std::vector<double> taus;
    for (std::size_t m = 1; m <= n / 8; m *= 2) {
        taus.push_back(static_cast<double>(m) * dt);
    }
    return taus;
}

AllanCurve overlapping_allan(const PhaseTrace& trace, std::span<const double> taus)
{
    trace.validate();
    const auto& phi = trace.samples;
    const long n = static_cast<long>(phi.size());

    std::vector<double> sorted(taus.begin(), taus.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    AllanCurve curve;
    for (double tau : sorted) {
        const double ratio = tau / trace.dt;
        const long m = std::lround(ratio);
        if (!(tau > 0.0) || m < 1 || std::fabs(ratio - static_cast<double>(m)) > 1e-9 * std::max(1.0, ratio)) {
            curve.rejected.push_back({tau, "tau is not a positive integer multiple of dt"});
            continue;
        }
        if (2 * m >= n) {
            curve.rejected.push_back({tau, "tau too large: needs 2m < sample count"});
            continue;
        }
        const long terms = n - 2 * m;
        double sum = 0.0;
        for (long i = 0; i < terms; ++i) {
            const double d = phi[i + 2 * m] - 2.0 * phi[i + m] + phi[i];
            sum += d * d;
        }
        const double t = static_cast<double>(m) * trace.dt;
        curve.taus.push_back(t);
        curve.adev.push_back(std::sqrt(sum / (2.0 * t * t * static_cast<double>(terms))));
        curve.counts.push_back(terms);
    }
    return curve;
}

AllanCurve overlapping_allan(const PhaseTrace& trace)
{
    const auto taus = default_allan_taus(trace.samples.size(), trace.dt);
    return overlapping_allan(trace, taus);
}

namespace {

// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

}  // namespace

SpectrumCurve asd(const PhaseTrace& trace, int segment_length, double overlap_fraction)
{
    trace.validate();
    if (!(overlap_fraction >= 0.0 && overlap_fraction <= 0.9)) {
        throw InvalidArgument("overlap fraction must lie in [0, 0.9]");
    }
    const std::size_t n = trace.samples.size();
    if (segment_length < 2 || static_cast<std::size_t>(segment_length) > n) {
        throw InvalidArgument("need at least one full segment of >= 2 samples");
    }
    const int len = segment_length;
    const int step = std::max(1, len - static_cast<int>(std::lround(overlap_fraction * len)));
    const double fs = 1.0 / trace.dt;

    std::vector<double> window(static_cast<std::size_t>(len));
    double w_sq = 0.0;
    double w_sum = 0.0;
    for (int i = 0; i < len; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / len);  // periodic Hann
        w_sq += window[i] * window[i];
        w_sum += window[i];
    }

    const int bins = len / 2 + 1;
    double* in = fftw_alloc_real(static_cast<std::size_t>(len));
    fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(bins));
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(len, in, spec, FFTW_ESTIMATE);
    }

    std::vector<double> psd(static_cast<std::size_t>(bins), 0.0);
    int segments = 0;
    for (std::size_t start = 0; start + len <= n; start += step) {
        const double* seg = trace.samples.data() + start;
        const double mean = std::accumulate(seg, seg + len, 0.0) / len;
        for (int i = 0; i < len; ++i) {
            in[i] = (seg[i] - mean) * window[i];
        }
        fftw_execute(plan);
        for (int k = 0; k < bins; ++k) {
            psd[k] += spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
        }
        ++segments;
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(spec);

    SpectrumCurve out;
    out.segments = segments;
    out.resolution_bw = fs * w_sq / (w_sum * w_sum);
    out.freqs.resize(static_cast<std::size_t>(bins));
    out.asd.resize(static_cast<std::size_t>(bins));
    for (int k = 0; k < bins; ++k) {
        const bool edge = k == 0 || (len % 2 == 0 && k == len / 2);
        const double scale = (edge ? 1.0 : 2.0) / (fs * w_sq * segments);
        out.freqs[k] = k * fs / len;
        out.asd[k] = std::sqrt(psd[k] * scale);
    }
    return out;
}

double rms_phase(const PhaseTrace& trace)
{
    trace.validate();
    const auto& x = trace.samples;
    if (x.size() < 2) {
        throw InvalidArgument("RMS needs at least two samples");
    }
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(x.size()));
}

PhaseTrace read_trace_csv(std::istream& in)
{
    std::vector<double> t;
    PhaseTrace trace;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("t_s", 0) == 0) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InvalidArgument("trace CSV row without a comma: " + line);
        }
        try {
            t.push_back(std::stod(line.substr(0, comma)));
            trace.samples.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::logic_error&) {
            throw InvalidArgument("unparseable trace CSV row: " + line);
        }
    }
    if (t.size() < 2) {
        throw InvalidArgument("trace CSV needs at least two rows to infer dt");
    }
    trace.dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (std::fabs((t[i] - t[i - 1]) - trace.dt) > 1e-6 * trace.dt) {
            throw InvalidArgument("trace CSV is not uniformly sampled");
        }
    }
    trace.validate();
    return trace;
}

void write_trace_csv(std::ostream& out, const PhaseTrace& trace)
{
    out << "t_s,value\n";
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        out << format_real(static_cast<double>(i) * trace.dt) << ',' << format_real(trace.samples[i]) << '\n';
    }
}

PhaseTrace read_trace_binary(std::istream& in)
{
    std::string header;
    if (!std::getline(in, header) || header.rfind("dt=", 0) != 0) {
        throw InvalidArgument("binary trace must start with a 'dt=<seconds>' line");
    }
    PhaseTrace trace;
    try {
        trace.dt = std::stod(header.substr(3));
    } catch (const std::logic_error&) {
        throw InvalidArgument("bad dt in binary trace header: " + header);
    }
    char buf[sizeof(double)];
    while (in.read(buf, sizeof buf)) {
        double v;
        std::memcpy(&v, buf, sizeof v);
        trace.samples.push_back(v);
    }
    if (in.gcount() != 0) {
        throw InvalidArgument("binary trace payload is not a whole number of float64 values");
    }
    trace.validate();
    return trace;
}

void write_trace_binary(std::ostream& out, const PhaseTrace& trace)
{
    out << "dt=" << format_real(trace.dt) << '\n';
    out.write(reinterpret_cast<const char*>(trace.samples.data()),
              static_cast<std::streamsize>(trace.samples.size() * sizeof(double)));
}

PhaseTrace read_trace_file(const std::string& path)
{
    const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    std::ifstream in(path, csv ? std::ios::in : std::ios::in | std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open trace file " + path);
    }
    return csv ? read_trace_csv(in) : read_trace_binary(in);
}

void write_allan_csv(std::ostream& out, const AllanCurve& curve, const std::string& label)
{
    out << "# estimator=overlapping_second_difference";
    if (!label.empty()) {
        out << " condition=" << label;
    }
    out << '\n' << "tau_s,adev_rad_per_s,terms\n";
    for (std::size_t i = 0; i < curve.taus.size(); ++i) {
        out << format_real(curve.taus[i]) << ',' << format_real(curve.adev[i]) << ',' << curve.counts[i] << '\n';
    }
}

void write_asd_csv(std::ostream& out, const SpectrumCurve& curve, int segment_length, double overlap,
                   const std::string& label)
{
    out << "# window=hann overlap=" << format_real(overlap) << " segment=" << segment_length
        << " segments=" << curve.segments << " enbw_hz=" << format_real(curve.resolution_bw) << " onesided=1";
    if (!label.empty()) {
        out << " condition=" << label;
    }
    out << '\n' << "f_hz,asd_rad_per_rthz\n";
    for (std::size_t i = 0; i < curve.freqs.size(); ++i) {
        out << format_real(curve.freqs[i]) << ',' << format_real(curve.asd[i]) << '\n';
    }
}

}  // namespace wfqpsk
