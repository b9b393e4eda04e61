#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "wfqpsk/cli.hpp"
#include "wfqpsk/constellation.hpp"
#include "wfqpsk/detector_sim.hpp"
#include "wfqpsk/error.hpp"
#include "wfqpsk/homodyne.hpp"
#include "wfqpsk/info_metrics.hpp"
#include "wfqpsk/lock_sim.hpp"
#include "wfqpsk/numeric.hpp"
#include "wfqpsk/parallel.hpp"
#include "wfqpsk/phase_metrology.hpp"
#include "wfqpsk/security.hpp"

namespace wfqpsk {

namespace {

std::string short_real(double x)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

Constellation sweep_constellation(const RunConfig& cfg, int order)
{
    return build_psk(order, cfg.alpha, cfg.phi0 ? *cfg.phi0 : x_quadrature_phi0(order));
}

struct SweepPoint {
    int order;
    double visibility;
    double loss_db;
};

std::vector<SweepPoint> sweep_points(const RunConfig& cfg)
{
    std::vector<SweepPoint> pts;
    for (int m : cfg.orders) {
        for (double xi : cfg.visibilities) {
            for (double loss : cfg.loss_grid()) {
                pts.push_back({m, xi, loss});
            }
        }
    }
    return pts;
}

WfReceiverParams receiver_at(const RunConfig& cfg, const SweepPoint& p)
{
    WfReceiverParams r;
    r.lo_amplitude = cfg.lo_amplitude;
    r.visibility = p.visibility;
    r.transmissivity = loss_db_to_transmissivity(p.loss_db);
    r.n_max = cfg.n_max;
    r.phase_jitter_rms = cfg.phase_jitter_rms;
    return r;
}

std::string homodyne_limit_warning(const RunConfig& cfg)
{
    for (int m : cfg.orders) {
        WfReceiverParams r;
        r.lo_amplitude = cfg.lo_amplitude;
        if (!within_homodyne_limit(sweep_constellation(cfg, m), r)) {
            return "z^2 < 3 alpha^2 at 0 dB: the photon-number difference is outside the homodyne limit";
        }
    }
    return "";
}

std::string label_stem(const std::string& label)
{
    std::string s = label;
    std::replace(s.begin(), s.end(), '/', '_');
    return s;
}

double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v)
{
    if (v.size() < 2) {
        return 0.0;
    }
    const double mu = mean_of(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - mu) * (x - mu);
    }
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

CommandOutput cmd_sweep_mi(const RunConfig& cfg, int workers)
{
    const auto pts = sweep_points(cfg);
    std::vector<std::pair<double, double>> values(pts.size());
    std::vector<double> truncation(pts.size());
    parallel_for(pts.size(), workers, [&](std::size_t i) {
        const auto c = sweep_constellation(cfg, pts[i].order);
        const auto wf = wf_mutual_information(c, receiver_at(cfg, pts[i]));
        HomodyneParams hd;
        hd.transmissivity = loss_db_to_transmissivity(pts[i].loss_db);
        hd.visibility = pts[i].visibility;
        hd.phase_jitter_rms = cfg.phase_jitter_rms;
        values[i] = {wf.mi_bits, hd_mutual_information(c, hd)};
        truncation[i] = wf.truncation_mass;
    });

    Table t;
    t.columns = {"loss_db", "m", "receiver", "visibility", "sigma_phi", "mi_bits"};
    t.sort_keys = {1, 3, 2, 0};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        t.rows.push_back({p.loss_db, std::int64_t{p.order}, std::string("wf"), p.visibility, cfg.phase_jitter_rms,
                          values[i].first});
        t.rows.push_back({p.loss_db, std::int64_t{p.order}, std::string("hd"), p.visibility, cfg.phase_jitter_rms,
                          values[i].second});
    }
    CommandOutput out;
    out.files.push_back(render_table(cfg, "mi", std::move(t)));
    if (auto w = homodyne_limit_warning(cfg); !w.empty()) {
        out.warnings.push_back(w);
    }
    const double worst = *std::max_element(truncation.begin(), truncation.end());
    if (worst > 1e-9) {
        out.warnings.push_back("largest truncated mass " + format_real(worst));
    }
    return out;
}

CommandOutput cmd_sweep_kgr(const RunConfig& cfg, int workers)
{
    const auto pts = sweep_points(cfg);
    std::vector<KgrResult> values(pts.size());
    parallel_for(pts.size(), workers, [&](std::size_t i) {
        values[i] = kgr(sweep_constellation(cfg, pts[i].order), receiver_at(cfg, pts[i]));
    });

    Table t;
    t.columns = {"loss_db",  "m",          "kgr_bits",  "mi_bits",  "holevo_bits",
                 "insecure", "visibility", "sigma_phi", "s_e_bits", "s_e_given_b_bits"};
    t.sort_keys = {1, 6, 0};
    int insecure = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        const auto& r = values[i];
        insecure += r.insecure ? 1 : 0;
        t.rows.push_back({p.loss_db, std::int64_t{p.order}, r.kgr_bits, r.mi_bits, r.holevo_bits, r.insecure,
                          p.visibility, cfg.phase_jitter_rms, r.s_e_bits, r.s_e_given_b_bits});
    }
    CommandOutput out;
    out.files.push_back(render_table(cfg, "kgr", std::move(t)));
    if (insecure > 0) {
        out.warnings.push_back(std::to_string(insecure) + " grid points have a negative key rate");
    }
    return out;
}

std::vector<LockConditionStats> lock_study(const RunConfig& cfg, int workers)
{
    const auto fast = cfg.fast_lock();
    const auto slow = cfg.slow_lock();
    const auto actuator = cfg.actuator();

    struct SeedResult {
        std::vector<std::string> labels;
        std::vector<double> rms;
        std::vector<AllanCurve> allan;
        std::vector<SpectrumCurve> spectra;
        std::vector<PhaseTrace> traces;
    };
    std::vector<SeedResult> per_seed(static_cast<std::size_t>(cfg.lock_seeds));
    parallel_for(per_seed.size(), workers, [&](std::size_t s) {
        NoiseModel noise = cfg.noise;
        noise.seed = cfg.seed + s;
        auto traces = four_conditions(noise, fast, slow, actuator, cfg.duration_s, cfg.dt_s);
        auto& r = per_seed[s];
        for (auto& lt : traces) {
            r.labels.push_back(lt.label);
            r.rms.push_back(rms_phase(lt.trace));
            r.allan.push_back(overlapping_allan(lt.trace));
            r.spectra.push_back(asd(lt.trace, cfg.lock_segment, cfg.lock_overlap));
            if (s == 0) {
                r.traces.push_back(std::move(lt.trace));
            }
        }
    });

    std::vector<LockConditionStats> out;
    const auto& first = per_seed.front();
    for (std::size_t c = 0; c < first.labels.size(); ++c) {
        LockConditionStats st;
        st.label = first.labels[c];
        st.taus = first.allan[c].taus;
        st.freqs = first.spectra[c].freqs;
        st.first_trace = first.traces[c];
        std::vector<std::vector<double>> adev(st.taus.size()), asd_v(st.freqs.size());
        for (const auto& r : per_seed) {
            st.rms.push_back(r.rms[c]);
            for (std::size_t i = 0; i < st.taus.size(); ++i) {
                adev[i].push_back(r.allan[c].adev[i]);
            }
            for (std::size_t i = 0; i < st.freqs.size(); ++i) {
                asd_v[i].push_back(r.spectra[c].asd[i]);
            }
        }
        for (const auto& v : adev) {
            st.adev_mean.push_back(mean_of(v));
            st.adev_std.push_back(std_of(v));
        }
        for (const auto& v : asd_v) {
            st.asd_mean.push_back(mean_of(v));
            st.asd_std.push_back(std_of(v));
        }
        st.allan_monotone = true;
        for (std::size_t i = 1; i < st.adev_mean.size(); ++i) {
            if (st.adev_mean[i] > st.adev_mean[i - 1]) {
                st.allan_monotone = false;
            }
        }
        out.push_back(std::move(st));
    }
    return out;
}

CommandOutput cmd_lock(const RunConfig& cfg, int workers)
{
    const auto stats = lock_study(cfg, workers);
    const auto fast = cfg.fast_lock();
    CommandOutput out;

    Table summary;
    summary.columns = {"condition", "rms_mean_rad", "rms_std_rad", "allan_monotone", "seeds"};
    summary.sort_keys = {0};
    summary.meta = {{"kp", format_real(fast.kp)}, {"ki", format_real(fast.ki)}, {"dt_s", format_real(cfg.dt_s)},
                    {"duration_s", format_real(cfg.duration_s)}};
    for (const auto& st : stats) {
        summary.rows.push_back({st.label, mean_of(st.rms), std_of(st.rms), st.allan_monotone,
                                static_cast<std::int64_t>(st.rms.size())});

        Table allan;
        allan.columns = {"tau_s", "adev_mean_rad_per_s", "adev_std_rad_per_s"};
        allan.sort_keys = {0};
        allan.meta = {{"estimator", "overlapping_second_difference"}, {"condition", st.label}};
        for (std::size_t i = 0; i < st.taus.size(); ++i) {
            allan.rows.push_back({st.taus[i], st.adev_mean[i], st.adev_std[i]});
        }
        out.files.push_back(render_table(cfg, "allan_" + label_stem(st.label), std::move(allan)));

        Table spec;
        spec.columns = {"f_hz", "asd_mean_rad_per_rthz", "asd_std_rad_per_rthz"};
        spec.sort_keys = {0};
        spec.meta = {{"window", "hann"},
                     {"overlap", format_real(cfg.lock_overlap)},
                     {"segment", std::to_string(cfg.lock_segment)},
                     {"onesided", "1"},
                     {"condition", st.label}};
        for (std::size_t i = 0; i < st.freqs.size(); ++i) {
            spec.rows.push_back({st.freqs[i], st.asd_mean[i], st.asd_std[i]});
        }
        out.files.push_back(render_table(cfg, "asd_" + label_stem(st.label), std::move(spec)));

        if (cfg.write_traces) {
            Table trace;
            trace.columns = {"t_s", "value"};
            trace.sort_keys = {0};
            const auto& tr = st.first_trace;
            for (std::size_t i = 0; i < tr.samples.size(); ++i) {
                trace.rows.push_back({static_cast<double>(i) * tr.dt, tr.samples[i]});
            }
            out.files.push_back(render_table(cfg, "trace_" + label_stem(st.label), std::move(trace)));
        }
    }
    out.files.push_back(render_table(cfg, "lock_summary", std::move(summary)));
    return out;
}

CommandOutput cmd_allan(const RunConfig& cfg, int)
{
    if (cfg.input.empty()) {
        throw ConfigError("analysis.input: allan needs an input trace (--input PATH)");
    }
    const auto trace = read_trace_file(cfg.input);
    const auto curve = overlapping_allan(trace);
    Table t;
    t.columns = {"tau_s", "adev_rad_per_s", "terms"};
    t.sort_keys = {0};
    t.meta = {{"estimator", "overlapping_second_difference"}, {"rms_rad", format_real(rms_phase(trace))}};
    for (std::size_t i = 0; i < curve.taus.size(); ++i) {
        t.rows.push_back({curve.taus[i], curve.adev[i], static_cast<std::int64_t>(curve.counts[i])});
    }
    CommandOutput out;
    out.files.push_back(render_table(cfg, "allan", std::move(t)));
    for (const auto& r : curve.rejected) {
        out.warnings.push_back("tau " + format_real(r.tau) + ": " + r.message);
    }
    return out;
}

CommandOutput cmd_asd(const RunConfig& cfg, int)
{
    if (cfg.input.empty()) {
        throw ConfigError("analysis.input: asd needs an input trace (--input PATH)");
    }
    const auto trace = read_trace_file(cfg.input);
    const auto curve = asd(trace, cfg.segment, cfg.overlap);
    Table t;
    t.columns = {"f_hz", "asd_rad_per_rthz"};
    t.sort_keys = {0};
    t.meta = {{"window", "hann"},
              {"overlap", format_real(cfg.overlap)},
              {"segment", std::to_string(cfg.segment)},
              {"segments", std::to_string(curve.segments)},
              {"enbw_hz", format_real(curve.resolution_bw)},
              {"onesided", "1"}};
    for (std::size_t i = 0; i < curve.freqs.size(); ++i) {
        t.rows.push_back({curve.freqs[i], curve.asd[i]});
    }
    CommandOutput out;
    out.files.push_back(render_table(cfg, "asd", std::move(t)));
    return out;
}

CommandOutput cmd_montecarlo(const RunConfig& cfg, int workers)
{
    CommandOutput out;
    const DetectorImperfections imp{cfg.dark_mean, cfg.crosstalk_prob};
    const auto metric = cfg.fidelity_metric();

    Table fid;
    fid.columns = {"m", "signal_mean", "k", "fidelity", "overlap_next", "shots"};
    fid.sort_keys = {0, 1, 2};
    fid.meta = {{"metric", cfg.fidelity}};
    Table mi;
    mi.columns = {"m", "signal_mean", "repetition", "plugin_mi_bits", "bootstrap_se_bits", "analytic_mi_bits"};
    mi.sort_keys = {0, 1, 2};
    mi.meta = {{"estimator", "plugin"}, {"bootstrap", std::to_string(cfg.bootstrap)}};

    std::uint64_t case_index = 0;
    for (int order : cfg.mc_orders) {
        for (double mean : cfg.signal_means) {
            const auto c = build_psk(order, std::sqrt(mean), x_quadrature_phi0(order));
            WfReceiverParams params;
            params.lo_amplitude = std::sqrt(cfg.lo_mean);
            params.visibility = cfg.mc_visibility;
            params.phase_jitter_rms = cfg.mc_phase_jitter_rms;
            const std::string tag = "m" + std::to_string(order) + "_sig" + short_real(mean);
            const std::uint64_t case_seed = derive_seed(cfg.seed, case_index++);

            const auto run = run_experiment(c, params, imp, cfg.shots, derive_seed(case_seed, 0), true, workers);
            if (run.range_warnings > 0) {
                out.warnings.push_back(tag + ": " + std::to_string(run.range_warnings) +
                                       " shots with a branch mean outside the detector's valid range");
            }
            std::vector<DiffDistribution> empirical;
            std::vector<std::uint64_t> shots_k;
            for (int k = 0; k < order; ++k) {
                const auto n_k = static_cast<std::uint64_t>(
                    std::count_if(run.records.begin(), run.records.end(), [k](const ShotRecord& r) { return r.k == k; }));
                shots_k.push_back(n_k);
                empirical.push_back(n_k > 0 ? empirical_difference_dist(run.records, k) : DiffDistribution(0));
            }
            // theory and analytic MI describe the same imperfect detector the shots come from
            const auto detected = detected_conditionals(c, params, imp);
            for (int k = 0; k < order; ++k) {
                const auto theory = difference_from_joint(detected[k]);
                const int d_max = std::max(theory.d_max(), empirical[k].d_max());
                const auto th = theory.padded(d_max);
                const auto em = empirical[k].padded(d_max);

                Table hist;
                hist.columns = {"d", "probability", "theory"};
                hist.sort_keys = {0};
                hist.meta = {{"m", std::to_string(order)}, {"signal_mean", short_real(mean)}, {"k", std::to_string(k)}};
                for (int d = -d_max; d <= d_max; ++d) {
                    hist.rows.push_back({std::int64_t{d}, em(d), th(d)});
                }
                out.files.push_back(render_table(cfg, "hist_" + tag + "_k" + std::to_string(k), std::move(hist)));

                const double f = shots_k[k] > 0 ? fidelity(em, th, metric) : 0.0;
                const double ov = histogram_overlap(empirical[k], empirical[(k + 1) % order]);
                fid.rows.push_back({std::int64_t{order}, mean, std::int64_t{k}, f, ov,
                                    static_cast<std::int64_t>(shots_k[k])});
            }

            if (cfg.records == "csv") {
                std::ostringstream s;
                write_records_csv(s, run.records);
                out.files.push_back({"records_" + tag + ".csv", s.str()});
            } else if (cfg.records == "binary") {
                std::ostringstream s;
                write_records_binary(s, run.records);
                out.files.push_back({"records_" + tag + ".bin", s.str()});
            }

            std::vector<double> priors;
            for (const auto& s : c.symbols()) {
                priors.push_back(s.prior);
            }
            const double analytic = mutual_information(priors, detected).mi_bits;
            for (int r = 0; r < cfg.repetitions; ++r) {
                const auto rep = run_experiment(c, params, imp, cfg.mi_shots, derive_seed(case_seed, 1 + r), false,
                                                workers);
                const double est = plugin_mi_estimate(rep.counts);
                const double se = plugin_mi_bootstrap_se(rep.counts, cfg.bootstrap, derive_seed(case_seed, 1000 + r));
                mi.rows.push_back({std::int64_t{order}, mean, std::int64_t{r}, est, se, analytic});
            }
        }
    }
    out.files.push_back(render_table(cfg, "fidelity", std::move(fid)));
    out.files.push_back(render_table(cfg, "mi_estimates", std::move(mi)));
    return out;
}

CommandOutput cmd_skellam(const RunConfig& cfg, int)
{
    const int d_max = cfg.d_max ? *cfg.d_max : skellam_d_max(cfg.mu_t, cfg.mu_r);
    const auto dist = difference_dist(cfg.mu_t, cfg.mu_r, d_max);
    Table t;
    t.columns = {"d", "convolution", "closed_form"};
    t.sort_keys = {0};
    t.meta = {{"mu_t", format_real(cfg.mu_t)}, {"mu_r", format_real(cfg.mu_r)}};
    for (int d = -d_max; d <= d_max; ++d) {
        t.rows.push_back({std::int64_t{d}, dist(d), skellam_pmf(d, cfg.mu_t, cfg.mu_r)});
    }
    CommandOutput out;
    out.files.push_back(render_table(cfg, "skellam", std::move(t)));
    return out;
}

}  // namespace wfqpsk
