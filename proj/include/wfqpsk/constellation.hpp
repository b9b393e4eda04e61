#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

namespace wfqpsk {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Tolerance used for phase, amplitude and prior comparisons.
inline constexpr double kConstellationTol = 1e-12;

/// Wraps an angle into [0, 2pi).
double normalize_phase(double phase);

/// Smallest absolute angular distance between two phases, in [0, pi].
double phase_distance(double a, double b);

/// One coherent state |amplitude * exp(i phase)> sent with probability `prior`.
struct CoherentSymbol {
    double amplitude = 0.0;  // sqrt(photons), >= 0
    double phase = 0.0;      // radians, stored in [0, 2pi)
    double prior = 1.0;

    std::complex<double> complex_amplitude() const { return std::polar(amplitude, phase); }
    double mean_photons() const { return amplitude * amplitude; }

    static CoherentSymbol from_complex(std::complex<double> beta, double prior);
};

/// Alice's alphabet. Any symbol list is representable; PSK builders guarantee
/// geometrically uniform symmetry.
class Constellation {
public:
    /// Validates amplitudes, priors (sum to 1 within 1e-12) and normalizes phases.
    explicit Constellation(std::vector<CoherentSymbol> symbols);

    std::span<const CoherentSymbol> symbols() const { return symbols_; }
    const CoherentSymbol& operator[](std::size_t k) const { return symbols_[k]; }
    std::size_t size() const { return symbols_.size(); }
    int order() const { return static_cast<int>(symbols_.size()); }
    /// Phase of the reference symbol.
    double phi0() const { return symbols_.front().phase; }
    double max_amplitude() const;

private:
    std::vector<CoherentSymbol> symbols_;
};

/// pi / (2M): the reference phase that spreads PSK(M) projections on the x axis.
double default_phi0(int order_m);

/// Reference phase used for the x-quadrature receiver: 0 for BPSK (|+-alpha>),
/// pi/(2M) otherwise.
double x_quadrature_phi0(int order_m);

/// PSK(M): M equal-amplitude states at phi0 + 2 pi k / M with priors 1/M.
/// Throws InvalidArgument for order_m < 2 or amplitude < 0.
Constellation build_psk(int order_m, double amplitude, std::optional<double> phi0 = std::nullopt);

/// True iff the constellation is invariant as a set under rotation by 2pi/M
/// with equal amplitudes and equal priors.
bool check_gus(const Constellation& c);

/// Pure-loss channel: amplitudes scaled by sqrt(T). Throws for T outside [0, 1].
Constellation apply_loss(const Constellation& c, double transmissivity);

/// T = 10^(-loss_db / 10). Throws for negative loss.
double loss_db_to_transmissivity(double loss_db);

/// -10 log10(T). Throws for T outside (0, 1].
double transmissivity_to_loss_db(double transmissivity);

}  // namespace wfqpsk
