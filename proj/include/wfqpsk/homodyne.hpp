#pragma once

#include <optional>

#include "wfqpsk/constellation.hpp"

namespace wfqpsk {

struct IntegrationGrid {
    double x_min = 0.0;
    double x_max = 0.0;
    double step = 0.0;
};

/// Ideal homodyne detection of the x quadrature, in shot-noise units.
struct HomodyneParams {
    double shot_noise_variance = 1.0;  // sigma_0^2
    double transmissivity = 1.0;
    /// Mode overlap with the LO; scales the conditional means. 1 is the ideal receiver.
    double visibility = 1.0;
    /// Gaussian phase jitter averaged like in the weak-field receiver. 0 = none.
    double phase_jitter_rms = 0.0;
    /// nullopt: [-(max mean) - 10 sigma_0, (max mean) + 10 sigma_0], step sigma_0 / 200.
    std::optional<IntegrationGrid> grid;

    void validate() const;
};

/// Mean of p_HD(x | symbol): 2 sigma_0 sqrt(T) xi alpha cos(phi).
double hd_conditional_mean(const CoherentSymbol& symbol, const HomodyneParams& params);

/// Gaussian conditional density p_HD(x | symbol) with variance sigma_0^2
/// (jitter-averaged when phase_jitter_rms > 0).
double hd_conditional_pdf(double x, const CoherentSymbol& symbol, const HomodyneParams& params);

/// Grid used when params.grid is unset.
IntegrationGrid default_hd_grid(const Constellation& c, const HomodyneParams& params);

/// I_HD = h[sum_k q_k p_HD(x|k)] - sum_k q_k h[p_HD(x|k)], in bits, by
/// composite Simpson quadrature. The conditional term is the Gaussian
/// entropy 0.5 log2(2 pi e sigma_0^2) without jitter. Clamped at 0.
/// Throws NumericalError when halving the step moves the result by > 1e-6.
double hd_mutual_information(const Constellation& c, const HomodyneParams& params);

}  // namespace wfqpsk
