#include "wfqpsk/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wfqpsk/error.hpp"

namespace wfqpsk {

double normalize_phase(double phase)
{
    double r = std::fmod(phase, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    // fmod can land exactly on 2pi after the shift for tiny negative inputs
    if (r >= kTwoPi) {
        r = 0.0;
    }
    return r;
}

double phase_distance(double a, double b)
{
    double d = std::fabs(normalize_phase(a) - normalize_phase(b));
    return std::min(d, kTwoPi - d);
}

CoherentSymbol CoherentSymbol::from_complex(std::complex<double> beta, double prior)
{
    return CoherentSymbol{std::abs(beta), normalize_phase(std::arg(beta)), prior};
}

Constellation::Constellation(std::vector<CoherentSymbol> symbols) : symbols_(std::move(symbols))
{
    if (symbols_.empty()) {
        throw InvalidArgument("constellation needs at least one symbol");
    }
    double total = 0.0;
    for (auto& s : symbols_) {
        if (!(s.amplitude >= 0.0) || !std::isfinite(s.amplitude)) {
            throw InvalidArgument("symbol amplitude must be finite and >= 0");
        }
        if (!(s.prior >= 0.0 && s.prior <= 1.0)) {
            throw InvalidArgument("symbol prior must lie in [0, 1]");
        }
        if (!std::isfinite(s.phase)) {
            throw InvalidArgument("symbol phase must be finite");
        }
        s.phase = normalize_phase(s.phase);
        total += s.prior;
    }
    if (std::fabs(total - 1.0) > kConstellationTol) {
        throw InvalidArgument("symbol priors must sum to 1 (got " + std::to_string(total) + ")");
    }
}

double Constellation::max_amplitude() const
{
    double a = 0.0;
    for (const auto& s : symbols_) {
        a = std::max(a, s.amplitude);
    }
    return a;
}

double default_phi0(int order_m)
{
    if (order_m < 2) {
        throw InvalidArgument("PSK order must be >= 2 (got " + std::to_string(order_m) + ")");
    }
    return kPi / (2.0 * order_m);
}

double x_quadrature_phi0(int order_m)
{
    return order_m == 2 ? 0.0 : default_phi0(order_m);
}

Constellation build_psk(int order_m, double amplitude, std::optional<double> phi0)
{
    if (order_m < 2) {
        throw InvalidArgument("PSK order must be >= 2 (got " + std::to_string(order_m) + ")");
    }
    if (!(amplitude >= 0.0)) {
        throw InvalidArgument("PSK amplitude must be >= 0");
    }
    const double ref = phi0.value_or(default_phi0(order_m));
    std::vector<CoherentSymbol> symbols;
    symbols.reserve(order_m);
    const double q = 1.0 / order_m;
    for (int k = 0; k < order_m; ++k) {
        symbols.push_back({amplitude, normalize_phase(ref + kTwoPi * k / order_m), q});
    }
    return Constellation(std::move(symbols));
}

bool check_gus(const Constellation& c)
{
    const auto syms = c.symbols();
    const std::size_t m = syms.size();
    const auto& ref = syms.front();
    for (const auto& s : syms) {
        if (std::fabs(s.amplitude - ref.amplitude) > kConstellationTol) {
            return false;
        }
        if (std::fabs(s.prior - ref.prior) > kConstellationTol) {
            return false;
        }
    }
    if (ref.amplitude == 0.0 || m == 1) {
        return true;
    }
    // Each rotation ref * exp(2 pi i k / M) must be matched by a distinct symbol.
    std::vector<bool> used(m, false);
    for (std::size_t k = 0; k < m; ++k) {
        const double target = ref.phase + kTwoPi * static_cast<double>(k) / static_cast<double>(m);
        bool found = false;
        for (std::size_t j = 0; j < m; ++j) {
            if (!used[j] && phase_distance(syms[j].phase, target) <= kConstellationTol) {
                used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) {
            return false;
        }
    }
    return true;
}

Constellation apply_loss(const Constellation& c, double transmissivity)
{
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
        throw InvalidArgument("transmissivity must lie in [0, 1] (got " + std::to_string(transmissivity) + ")");
    }
    const double scale = std::sqrt(transmissivity);
    std::vector<CoherentSymbol> out(c.symbols().begin(), c.symbols().end());
    for (auto& s : out) {
        s.amplitude *= scale;
    }
    return Constellation(std::move(out));
}

double loss_db_to_transmissivity(double loss_db)
{
    if (!(loss_db >= 0.0)) {
        throw InvalidArgument("loss in dB must be >= 0 (got " + std::to_string(loss_db) + ")");
    }
    return std::pow(10.0, -loss_db / 10.0);
}

double transmissivity_to_loss_db(double transmissivity)
{
    if (!(transmissivity > 0.0 && transmissivity <= 1.0)) {
        throw InvalidArgument("transmissivity must lie in (0, 1] to express as dB loss");
    }
    return -10.0 * std::log10(transmissivity);
}

}  // namespace wfqpsk
