#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace wfqpsk {

struct PhaseTrace {
    std::vector<double> samples;  // rad
    double dt = 1.0;              // s

    /// Throws InvalidArgument for dt <= 0 or NaN samples.
    void validate() const;
    double duration() const { return dt * static_cast<double>(samples.size()); }
};

struct FringePhase {
    PhaseTrace trace;
    double clipped_fraction = 0.0;
    bool clip_warning = false;  // more than 5% of samples clipped
};

/// phi = arccos(2 (I - i_min) / (i_max - i_min) - 1), I clipped into [i_min, i_max].
FringePhase fringe_to_phase(std::span<const double> intensity, double i_min, double i_max, double dt);

struct AllanError {
    double tau = 0.0;
    std::string message;
};

struct AllanCurve {
    std::vector<double> taus;
    std::vector<double> adev;         // rad/s: phase second differences over tau
    std::vector<long> counts;         // second-difference terms per tau
    std::vector<AllanError> rejected; // taus that could not be evaluated
};

/// Octave grid m = 1, 2, 4, ... <= n/8 in units of dt.
std::vector<double> default_allan_taus(std::size_t n, double dt);

/// Overlapping Allan deviation on phase second differences:
/// sigma^2(m dt) = sum_i (phi[i+2m] - 2 phi[i+m] + phi[i])^2 / (2 tau^2 (N - 2m)).
/// Bad taus go to `rejected` instead of throwing; output taus ascend.
AllanCurve overlapping_allan(const PhaseTrace& trace, std::span<const double> taus);
AllanCurve overlapping_allan(const PhaseTrace& trace);

struct SpectrumCurve {
    std::vector<double> freqs;  // Hz
    std::vector<double> asd;    // rad / sqrt(Hz)
    double resolution_bw = 0.0; // equivalent noise bandwidth of the window, Hz
    int segments = 0;
};

/// Welch ASD: mean-removed, Hann-windowed segments, one-sided PSD scaled so
/// that sum(PSD) * df equals the windowed variance. Throws InvalidArgument
/// when no full segment fits or overlap is outside [0, 0.9].
SpectrumCurve asd(const PhaseTrace& trace, int segment_length, double overlap_fraction = 0.5);

/// Population standard deviation about the mean.
double rms_phase(const PhaseTrace& trace);

/// `t_s,value` CSV with a header row; dt is taken from the first two rows.
PhaseTrace read_trace_csv(std::istream& in);
void write_trace_csv(std::ostream& out, const PhaseTrace& trace);

/// Text line `dt=<seconds>` followed by little-endian float64 samples.
PhaseTrace read_trace_binary(std::istream& in);
void write_trace_binary(std::ostream& out, const PhaseTrace& trace);

/// Reads either format, chosen by extension (.csv vs anything else).
PhaseTrace read_trace_file(const std::string& path);

void write_allan_csv(std::ostream& out, const AllanCurve& curve, const std::string& label = "");
void write_asd_csv(std::ostream& out, const SpectrumCurve& curve, int segment_length, double overlap,
                   const std::string& label = "");

}  // namespace wfqpsk
