#include "wfqpsk/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wfqpsk/error.hpp"
#include "wfqpsk/numeric.hpp"
#include "wfqpsk/wf_receiver.hpp"

namespace wfqpsk {

namespace {

constexpr double kDensityFloor = 1e-300;

double gaussian(double x, double mean, double variance)
{
    const double u = x - mean;
    return std::exp(-u * u / (2.0 * variance)) / std::sqrt(kTwoPi * variance);
}

double mean_at(double amplitude, double phase, const HomodyneParams& p)
{
    return 2.0 * std::sqrt(p.shot_noise_variance) * std::sqrt(p.transmissivity) * p.visibility * amplitude *
           std::cos(phase);
}

/// Differential entropy (bits) of density samples on an equally spaced grid.
double differential_entropy(const std::vector<double>& density, const std::vector<double>& weights)
{
    double h = 0.0;
    for (std::size_t i = 0; i < density.size(); ++i) {
        const double p = density[i];
        if (p >= kDensityFloor) {
            h -= weights[i] * p * std::log2(p);
        }
    }
    return h;
}

double mi_on_grid(const Constellation& c, const HomodyneParams& p, const IntegrationGrid& g)
{
    int intervals = static_cast<int>(std::ceil((g.x_max - g.x_min) / g.step));
    intervals += intervals % 2;
    const double h = (g.x_max - g.x_min) / intervals;
    const auto weights = simpson_weights(intervals, h);

    std::vector<double> mix(static_cast<std::size_t>(intervals) + 1, 0.0);
    std::vector<double> cond(mix.size());
    double conditional_entropy = 0.0;
    const double gaussian_entropy = 0.5 * std::log2(kTwoPi * std::exp(1.0) * p.shot_noise_variance);
    for (const auto& s : c.symbols()) {
        for (std::size_t i = 0; i < mix.size(); ++i) {
            cond[i] = hd_conditional_pdf(g.x_min + h * static_cast<double>(i), s, p);
            mix[i] += s.prior * cond[i];
        }
        if (p.phase_jitter_rms > 0.0) {
            conditional_entropy += s.prior * differential_entropy(cond, weights);
        } else {
            conditional_entropy += s.prior * gaussian_entropy;
        }
    }
    return differential_entropy(mix, weights) - conditional_entropy;
}

}  // namespace

void HomodyneParams::validate() const
{
    if (!(shot_noise_variance > 0.0)) {
        throw InvalidArgument("shot-noise variance must be > 0");
    }
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
        throw InvalidArgument("transmissivity must lie in [0, 1]");
    }
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw InvalidArgument("visibility must lie in [0, 1]");
    }
    if (!(phase_jitter_rms >= 0.0)) {
        throw InvalidArgument("phase jitter must be >= 0");
    }
    if (grid && !(grid->step > 0.0 && grid->x_max > grid->x_min)) {
        throw InvalidArgument("integration grid needs x_max > x_min and step > 0");
    }
}

double hd_conditional_mean(const CoherentSymbol& symbol, const HomodyneParams& params)
{
    return mean_at(symbol.amplitude, symbol.phase, params);
}

double hd_conditional_pdf(double x, const CoherentSymbol& symbol, const HomodyneParams& params)
{
    if (params.phase_jitter_rms > 0.0) {
        const auto& rule = gauss_hermite_normal(kJitterNodes);
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double phase = symbol.phase + params.phase_jitter_rms * rule.nodes[i];
            s += rule.weights[i] * gaussian(x, mean_at(symbol.amplitude, phase, params), params.shot_noise_variance);
        }
        return s;
    }
    return gaussian(x, hd_conditional_mean(symbol, params), params.shot_noise_variance);
}

IntegrationGrid default_hd_grid(const Constellation& c, const HomodyneParams& params)
{
    const double sigma = std::sqrt(params.shot_noise_variance);
    // jitter can move any mean up to the full amplitude projection
    const double reach = 2.0 * sigma * std::sqrt(params.transmissivity) * params.visibility * c.max_amplitude();
    double max_mean = 0.0;
    for (const auto& s : c.symbols()) {
        max_mean = std::max(max_mean, std::fabs(hd_conditional_mean(s, params)));
    }
    if (params.phase_jitter_rms > 0.0) {
        max_mean = reach;
    }
    return {-max_mean - 10.0 * sigma, max_mean + 10.0 * sigma, sigma / 200.0};
}

double hd_mutual_information(const Constellation& c, const HomodyneParams& params)
{
    params.validate();
    const IntegrationGrid grid = params.grid.value_or(default_hd_grid(c, params));
    const double coarse = mi_on_grid(c, params, grid);
    IntegrationGrid fine = grid;
    fine.step *= 0.5;
    const double refined = mi_on_grid(c, params, fine);
    if (std::fabs(refined - coarse) > 1e-6) {
        throw NumericalError("homodyne entropy grid too coarse: halving the step moved I_HD by " +
                             std::to_string(std::fabs(refined - coarse)) + " bits");
    }
    return std::max(0.0, refined);
}

}  // namespace wfqpsk
