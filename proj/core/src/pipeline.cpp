#include <mpqkd/pipeline.hpp>

#include <mpqkd/parallel.hpp>

#include <algorithm>
#include <cmath>

namespace mpqkd {

KeyAnalysis analyze_table(const CountTable& table, const ProtocolParams& params) {
    KeyAnalysis out;
    out.m11 = estimate_M11_Z(table, params, params.epsilon);
    out.e11 = estimate_ephase(table, out.m11, params, params.epsilon);
    const ClassCounts& zmm = table.at(CountClass::Z_AmuBmu);
    out.m_mumu = zmm.total;
    out.e_mumu = zmm.total > 0.0 ? zmm.error / zmm.total : 0.0;
    out.key = key_length(out.m11.m11_lower, out.e11.capped_at_half(), out.m_mumu, out.e_mumu,
                         params.f_ec, table.n_pairs());
    return out;
}

PhasePipeline run_phase_pipeline(const SessionData& session, const EstimationConfig& estimation,
                                 int threads, bool run_mle) {
    PhasePipeline out;
    out.groups = assemble_groups(session.events, session.schedule, estimation.group_size);

    const double tau = session.protocol.slot_seconds;
    if (run_mle) {
        out.mle.resize(out.groups.size());
        out.estimates.resize(out.groups.size());
        const FrequencySearch search{estimation.search_lo_rad_s, estimation.search_hi_rad_s,
                                     estimation.coarse_step_rad_s};
        parallel_for(out.groups.size(), threads, [&](std::size_t i) {
            out.mle[i] = mle_delta_omega(out.groups[i], tau, search);
            out.estimates[i] = {out.groups[i].mid_time(tau), out.mle[i].omega_hat};
        });
    }

    const double domain_hi = static_cast<double>(session.schedule.total_slots) * tau;
    if (out.estimates.size() >= 2) {
        out.track = fit_frequency_track(out.estimates, estimation.track_window, 0.0, domain_hi);
    } else {
        // too few reference clicks for a fit: degrade to a constant
        const double level = out.estimates.empty() ? 0.0 : out.estimates.front().second;
        out.track.segments.push_back({0.0, domain_hi, level, 0.0});
        out.track.domain_lo = 0.0;
        out.track.domain_hi = domain_hi;
    }
    return out;
}

PhaseSummary summarize_phase(const SessionData& session, const PhasePipeline& phase) {
    PhaseSummary s;
    s.n_reference_clicks = session.n_strong_valid;
    s.n_groups = phase.groups.size();
    s.n_track_segments = phase.track.segments.size();
    if (!phase.mle.empty()) {
        double acc = 0.0;
        s.omega_min = s.omega_max = phase.mle.front().omega_hat;
        for (const MleResult& m : phase.mle) {
            acc += m.omega_hat;
            s.omega_min = std::min(s.omega_min, m.omega_hat);
            s.omega_max = std::max(s.omega_max, m.omega_hat);
            if (m.ambiguous_sign) ++s.n_ambiguous;
        }
        s.omega_mean = acc / static_cast<double>(phase.mle.size());
    }
    return s;
}

SimulationOutcome run_simulation(const RunConfig& config, int threads) {
    if (config.protocol.n_qkd_rounds == 0)
        throw ConfigError("simulation needs protocol.n_qkd_rounds > 0");

    SimulationOutcome out;
    SimOptions options;
    options.threads = threads;
    out.session = simulate_session(config.protocol, config.channel, config.seed, options);
    out.pairing = pair_clicks(out.session.events, config.protocol.l_min, config.protocol.l_max,
                              &out.session.schedule);
    const bool needs_track = config.estimation.compensation == CompensationMode::Track;
    out.phase = run_phase_pipeline(out.session, config.estimation, threads, needs_track);
    out.phase_summary = summarize_phase(out.session, out.phase);

    const double tau = config.protocol.slot_seconds;
    const CompensationMode mode = config.estimation.compensation;
    std::vector<SiftedPair> sifted(out.pairing.pairs.size());
    parallel_for(out.pairing.pairs.size(), threads, [&](std::size_t i) {
        const PairRecord& pair = out.pairing.pairs[i];
        SiftedPair s = classify_pair(pair);
        double delta_theta = 0.0;
        if (s.pair_class == PairClass::XPair) {
            switch (mode) {
                case CompensationMode::Track:
                    delta_theta =
                        compensation_phase(static_cast<double>(pair.front.slot) * tau,
                                           static_cast<double>(pair.rear.slot) * tau, out.phase.track);
                    break;
                case CompensationMode::Truth:
                    delta_theta = static_cast<double>(pair.rear.theta_true) -
                                  static_cast<double>(pair.front.theta_true);
                    break;
                case CompensationMode::Off:
                    break;
            }
        }
        map_keys(s, delta_theta, config.protocol.phase_slices);
        sifted[i] = s;
    });

    out.table = tally_counts(sifted, config.protocol, config.protocol.n_qkd_rounds);

    double kept_total = 0.0, kept_error = 0.0;
    for (const SiftedPair& s : sifted) {
        const int src_a = s.pair.front.src_photons_a + s.pair.rear.src_photons_a;
        const int src_b = s.pair.front.src_photons_b + s.pair.rear.src_photons_b;
        const bool single = src_a == 1 && src_b == 1;
        if (s.pair_class == PairClass::ZPair && s.sum_code_a == 2 && s.sum_code_b == 2) {
            if (single) ++out.truth.z_mumu_pairs_11;
        } else if (s.pair_class == PairClass::XPair && s.kept && s.sum_code_a > 0 &&
                   s.sum_code_b > 0) {
            const bool err = (s.chi_a ^ s.chi_b ^ s.parity) != 0;
            kept_total += 1.0;
            if (err) kept_error += 1.0;
            if (single) {
                ++out.truth.x_kept_11_total;
                if (err) ++out.truth.x_kept_11_error;
            }
        }
    }
    out.x_kept_total = kept_total;
    out.x_error_sieved = kept_total > 0.0 ? kept_error / kept_total : 0.0;

    out.analysis = analyze_table(out.table, config.protocol);
    return out;
}

PhaseEstimateOutcome run_phase_estimate(const RunConfig& config, int threads) {
    if (config.protocol.n_qkd_rounds == 0)
        throw ConfigError("phase estimation needs protocol.n_qkd_rounds > 0");

    PhaseEstimateOutcome out;
    SimOptions options;
    options.threads = threads;
    out.session = simulate_session(config.protocol, config.channel, config.seed, options);
    out.phase = run_phase_pipeline(out.session, config.estimation, threads);
    out.phase_summary = summarize_phase(out.session, out.phase);

    const std::vector<std::uint64_t> edges = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048};
    out.error_bins = reference_error_by_length(out.session.events, out.session.schedule,
                                               out.phase.track, config.protocol.slot_seconds,
                                               edges);
    return out;
}

KeyLengthResult run_direct(const RunConfig& config) {
    if (!config.direct.present)
        throw ConfigError("direct key-rate mode needs a 'direct' config section");
    const DirectInputs& d = config.direct;
    return key_length(d.m11, d.e11, d.m_mumu, d.e_mumu, config.protocol.f_ec, d.n_rounds / 2.0);
}

namespace {

void echo_protocol(Report& r, const ProtocolParams& p) {
    r.section("protocol");
    r.kv("mu", p.mu);
    r.kv("nu", p.nu);
    r.kv("p_mu", p.p_mu);
    r.kv("p_nu", p.p_nu);
    r.kv("p_vacuum", p.p_vacuum());
    r.kv("phase_slices", p.phase_slices);
    r.kv("l_min", p.l_min);
    r.kv("l_max", p.l_max);
    r.kv("epsilon", p.epsilon);
    r.kv("f_ec", p.f_ec);
    r.kv("slot_seconds", p.slot_seconds);
    r.kv("frame_reference", p.frame.n_reference);
    r.kv("frame_recovery", p.frame.n_recovery);
    r.kv("frame_qkd", p.frame.n_qkd);
    r.kv("n_qkd_rounds", p.n_qkd_rounds);
}

void echo_channel(Report& r, const RunConfig& c) {
    if (c.link.by_distance) {
        r.section("link");
        r.kv("distance_km", c.link.distance_km);
        r.kv("attenuation_db_per_km", c.link.attenuation_db_per_km);
        r.kv("excess_loss_db_per_side", c.link.excess_loss_db);
    }
    r.section("channel");
    r.kv("transmittance_a", c.channel.transmittance_a);
    r.kv("transmittance_b", c.channel.transmittance_b);
    r.kv("detector_efficiency", c.channel.detector_efficiency);
    r.kv("dark_count_prob", c.channel.dark_count_prob);
    r.kv("extinction_ratio", c.channel.extinction_ratio);
    r.kv("strong_intensity", c.channel.strong_intensity);
    r.kv("delta_omega0_rad_s", c.channel.delta_omega0_rad_s);
    r.kv("freq_walk_rate", c.channel.freq_walk_rate);
    r.kv("freq_walk_bound_rad_s", c.channel.freq_walk_bound_rad_s);
    r.kv("fiber_phase_rate", c.channel.fiber_phase_rate);
    r.kv("linewidth_hz", c.channel.linewidth_hz);
}

void echo_estimation(Report& r, const EstimationConfig& e) {
    r.section("estimation");
    r.kv("group_size", static_cast<std::uint64_t>(e.group_size));
    r.kv("track_window", static_cast<std::uint64_t>(e.track_window));
    r.kv("search_lo_rad_s", e.search_lo_rad_s);
    r.kv("search_hi_rad_s", e.search_hi_rad_s);
    r.kv("coarse_step_rad_s", e.coarse_step_rad_s);
    r.kv("compensation", to_string(e.compensation));
}

Report base_report(const RunConfig& config, const char* mode) {
    Report r;
    r.section("run");
    r.kv("mode", mode);
    r.kv("seed", config.seed);
    echo_protocol(r, config.protocol);
    echo_channel(r, config);
    echo_estimation(r, config.estimation);
    return r;
}

void write_counts(Report& r, const CountTable& table) {
    r.section("counts");
    r.kv("n_rounds", table.n_rounds);
    r.kv("n_pairs_possible", table.n_pairs());
    for (int i = 0; i < kNumCountClasses; ++i) {
        const auto cls = static_cast<CountClass>(i);
        const ClassCounts& c = table.at(cls);
        const std::string name(to_string(cls));
        r.kv(name + ".sent", c.sent);
        r.kv(name + ".total", c.total);
        r.kv(name + ".error", c.error);
    }
}

void write_analysis(Report& r, const KeyAnalysis& a, double n_pairs) {
    r.section("estimates");
    r.kv("epsilon", a.m11.epsilon);
    r.kv("chernoff_calls", a.m11.chernoff_calls + a.e11.chernoff_calls);
    r.kv("y11_lower", a.m11.y11_lower);
    r.kv("m11_lower", a.m11.m11_lower);
    r.kv("m11_clamped", a.m11.clamped);
    r.kv("e11_upper", a.e11.e11_upper);
    r.kv("e11_aborted", a.e11.aborted);
    r.kv("e11_clamped", a.e11.clamped);
    r.kv("e11_uninformative", a.e11.uninformative);
    r.kv("m_mumu", a.m_mumu);
    r.kv("e_mumu", a.e_mumu);
    r.section("key");
    r.kv("key_bits", a.key.key_bits);
    r.kv("rate_per_pair", a.key.rate);
    r.kv("clamped", a.key.clamped);
    r.kv("n_pairs_denominator", n_pairs);
}

void write_phase(Report& r, const PhaseSummary& s) {
    r.section("phase");
    r.kv("reference_clicks", s.n_reference_clicks);
    r.kv("groups", s.n_groups);
    r.kv("ambiguous_sign", s.n_ambiguous);
    r.kv("omega_mean_rad_s", s.omega_mean);
    r.kv("omega_min_rad_s", s.omega_min);
    r.kv("omega_max_rad_s", s.omega_max);
    r.kv("track_segments", s.n_track_segments);
}

void write_session(Report& r, const SessionData& s) {
    r.section("session");
    r.kv("total_slots", s.schedule.total_slots);
    r.kv("valid_clicks", s.n_valid);
    r.kv("double_clicks", s.n_double);
    r.kv("qkd_clicks", s.n_qkd_valid);
    r.kv("reference_clicks", s.n_strong_valid);
    r.kv("qkd_click_probability", s.qkd_click_probability());
}

void write_pairing(Report& r, const PairingStats& p, std::uint64_t n_rounds) {
    r.section("pairing");
    r.kv("clicks", p.n_clicks);
    r.kv("pairs", p.n_pairs);
    r.kv("dropped_short", p.n_dropped_short);
    r.kv("dropped_long", p.n_dropped_long);
    r.kv("tail_unpaired", p.n_tail_unpaired);
    r.kv("mean_length", p.mean_length());
    r.kv("empirical_rate", p.empirical_rate(n_rounds));
}

}  // namespace

Report simulate_report(const RunConfig& config, const SimulationOutcome& outcome) {
    Report r = base_report(config, "simulate");
    write_session(r, outcome.session);
    write_pairing(r, outcome.pairing.stats, config.protocol.n_qkd_rounds);
    write_phase(r, outcome.phase_summary);
    r.section("sifting");
    r.kv("x_kept_total", outcome.x_kept_total);
    r.kv("x_error_sieved", outcome.x_error_sieved);
    r.section("truth");
    r.kv("z_mumu_pairs_11", outcome.truth.z_mumu_pairs_11);
    r.kv("x_kept_11_total", outcome.truth.x_kept_11_total);
    r.kv("x_kept_11_error", outcome.truth.x_kept_11_error);
    r.kv("e11_truth", outcome.truth.e11_truth());
    write_counts(r, outcome.table);
    write_analysis(r, outcome.analysis, outcome.table.n_pairs());
    return r;
}

Report analyze_report(const RunConfig& config, const std::string& counts_origin,
                      const CountTable& table, const KeyAnalysis& analysis) {
    Report r = base_report(config, "analyze");
    r.section("input");
    r.kv("counts", counts_origin);
    write_counts(r, table);
    write_analysis(r, analysis, table.n_pairs());
    return r;
}

Report direct_report(const RunConfig& config, const KeyLengthResult& key) {
    Report r = base_report(config, "direct-keyrate");
    const DirectInputs& d = config.direct;
    r.section("direct");
    r.kv("m11", d.m11);
    r.kv("e11", d.e11);
    r.kv("m_mumu", d.m_mumu);
    r.kv("e_mumu", d.e_mumu);
    r.kv("n_rounds", d.n_rounds);
    r.section("key");
    r.kv("key_bits", key.key_bits);
    r.kv("rate_per_pair", key.rate);
    r.kv("clamped", key.clamped);
    r.kv("n_pairs_denominator", d.n_rounds / 2.0);
    return r;
}

Report pairing_rate_report(const RunConfig& config) {
    if (config.pairing_points.empty())
        throw ConfigError("pairing-rate mode needs a non-empty 'pairing_rate' config section");
    Report r = base_report(config, "pairing-rate");
    for (std::size_t i = 0; i < config.pairing_points.size(); ++i) {
        const PairingRatePoint& pt = config.pairing_points[i];
        r.section("point." + std::to_string(i));
        r.kv("p_click", pt.p_click);
        r.kv("l_min", pt.l_min);
        r.kv("l_max", pt.l_max);
        r.kv("rate", pairing_rate(pt.p_click, pt.l_min, pt.l_max));
        r.kv("saturation", expected_pairs_heuristic(pt.p_click, pt.l_max));
    }
    return r;
}

Report phase_estimate_report(const RunConfig& config, const PhaseEstimateOutcome& outcome) {
    Report r = base_report(config, "phase-estimate");
    write_session(r, outcome.session);
    write_phase(r, outcome.phase_summary);
    r.section("track");
    for (std::size_t i = 0; i < outcome.phase.track.segments.size(); ++i) {
        const auto& seg = outcome.phase.track.segments[i];
        const std::string base = "segment." + std::to_string(i);
        r.kv(base + ".t_begin", seg.t_begin);
        r.kv(base + ".t_end", seg.t_end);
        r.kv(base + ".intercept", seg.intercept);
        r.kv(base + ".slope", seg.slope);
    }
    r.section("estimates");
    for (std::size_t i = 0; i < outcome.phase.estimates.size(); ++i) {
        const auto& [t, omega] = outcome.phase.estimates[i];
        r.kv("group." + std::to_string(i),
             format_double(t) + " " + format_double(omega));
    }
    r.section("error_by_length");
    for (const LengthBinStats& bin : outcome.error_bins) {
        const std::string base =
            "bin." + std::to_string(bin.length_lo) + "_" + std::to_string(bin.length_hi);
        r.kv(base + ".total", bin.total);
        r.kv(base + ".mismatches", bin.mismatches);
        r.kv(base + ".rate", bin.rate());
    }
    return r;
}

Report sweep_report(const RunConfig& config, const std::vector<RatePoint>& points) {
    Report r = base_report(config, "sweep");
    r.section("sweep");
    r.kv("distance_lo_km", config.sweep.distance_lo_km);
    r.kv("distance_hi_km", config.sweep.distance_hi_km);
    r.kv("n_points", config.sweep.n_points);
    r.kv("x_error_override", config.sweep.x_error_override);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const RatePoint& p = points[i];
        r.section("point." + std::to_string(i));
        r.kv("distance_km", p.distance_km);
        r.kv("eta", p.eta);
        r.kv("click_probability", p.click_prob);
        r.kv("pair_rate", p.pair_rate);
        r.kv("n_pairs", p.n_pairs);
        r.kv("m11_lower", p.m11_lower);
        r.kv("e11_upper", p.e11_upper);
        r.kv("e_mumu", p.e_mumu);
        r.kv("x_error", p.x_error);
        r.kv("key_bits", p.key_bits);
        r.kv("rate_per_pair", p.rate);
    }
    return r;
}

}  // namespace mpqkd
