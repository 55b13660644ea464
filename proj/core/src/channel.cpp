#include <mpqkd/channel.hpp>

#include <mpqkd/math.hpp>
#include <mpqkd/parallel.hpp>
#include <mpqkd/rng.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mpqkd {

namespace {

void check(std::vector<std::string>& issues, bool ok, const char* message) {
    if (!ok) issues.emplace_back(message);
}

}  // namespace

std::vector<std::string> validate(const ChannelParams& p) {
    std::vector<std::string> issues;
    check(issues, p.transmittance_a >= 0.0 && p.transmittance_a <= 1.0,
          "transmittance_a must lie in [0, 1]");
    check(issues, p.transmittance_b >= 0.0 && p.transmittance_b <= 1.0,
          "transmittance_b must lie in [0, 1]");
    check(issues, p.detector_efficiency >= 0.0 && p.detector_efficiency <= 1.0,
          "detector_efficiency must lie in [0, 1]");
    check(issues, p.dark_count_prob >= 0.0 && p.dark_count_prob < 1.0,
          "dark_count_prob must lie in [0, 1)");
    check(issues, p.extinction_ratio >= 0.0 && p.extinction_ratio <= 1.0,
          "extinction_ratio must lie in [0, 1]");
    check(issues, p.strong_intensity >= 0.0 && p.strong_intensity < 600.0,
          "strong_intensity must lie in [0, 600)");
    check(issues, p.freq_walk_rate >= 0.0, "freq_walk_rate must be non-negative");
    check(issues, p.freq_walk_bound_rad_s >= 0.0, "freq_walk_bound must be non-negative");
    check(issues, p.freq_walk_rate == 0.0 || p.freq_walk_bound_rad_s > 0.0,
          "freq_walk_rate > 0 requires a positive freq_walk_bound");
    check(issues, p.fiber_phase_rate >= 0.0, "fiber_phase_rate must be non-negative");
    check(issues, p.linewidth_hz >= 0.0, "linewidth_hz must be non-negative");
    return issues;
}

void ensure_valid(const ChannelParams& p) {
    auto issues = validate(p);
    if (issues.empty()) return;
    std::ostringstream os;
    os << "invalid channel parameters:";
    for (const auto& s : issues) os << "\n  - " << s;
    throw std::invalid_argument(os.str());
}

std::pair<double, double> port_means(const ChannelParams& ch, double mu_a, double mu_b,
                                     double delta_phi) {
    const double la = ch.transmittance_a * mu_a;
    const double lb = ch.transmittance_b * mu_b;
    const double cross = 2.0 * std::sqrt(la * lb) * std::cos(delta_phi);
    return {(la + lb + cross) / 2.0, (la + lb - cross) / 2.0};
}

ClickProbabilities click_probabilities(const ChannelParams& ch, double mu_a, double mu_b,
                                       double delta_phi) {
    const auto [nl, nr] = port_means(ch, mu_a, mu_b, delta_phi);
    const double survive = 1.0 - ch.dark_count_prob;
    return {1.0 - survive * std::exp(-ch.detector_efficiency * nl),
            1.0 - survive * std::exp(-ch.detector_efficiency * nr)};
}

namespace {

constexpr std::uint64_t kInitBlock = 0;

struct TrajParams {
    double tau = 0.0;
    double sigma_theta = 0.0;  // per-slot phase diffusion
    double sigma_omega = 0.0;  // per-slot frequency step
    double omega_lo = 0.0;
    double omega_hi = 0.0;
    bool stochastic = false;
};

TrajParams make_traj_params(const ChannelParams& ch, double tau) {
    TrajParams t;
    t.tau = tau;
    t.sigma_theta = std::sqrt((ch.fiber_phase_rate + two_pi * ch.linewidth_hz) * tau);
    t.sigma_omega = std::sqrt(ch.freq_walk_rate * tau);
    t.omega_lo = ch.delta_omega0_rad_s - ch.freq_walk_bound_rad_s;
    t.omega_hi = ch.delta_omega0_rad_s + ch.freq_walk_bound_rad_s;
    t.stochastic = t.sigma_theta > 0.0 || t.sigma_omega > 0.0;
    return t;
}

struct TrajState {
    double theta = 0.0;
    double omega = 0.0;
};

inline void advance_slot(TrajState& st, const TrajParams& t, StreamRng& rng) {
    st.theta += st.omega * t.tau;
    if (t.sigma_theta > 0.0) st.theta += t.sigma_theta * rng.normal();
    if (t.sigma_omega > 0.0) {
        double w = st.omega + t.sigma_omega * rng.normal();
        for (int i = 0; i < 4 && (w < t.omega_lo || w > t.omega_hi); ++i) {
            if (w > t.omega_hi)
                w = 2.0 * t.omega_hi - w;
            else
                w = 2.0 * t.omega_lo - w;
        }
        st.omega = std::clamp(w, t.omega_lo, t.omega_hi);
    }
}

double draw_theta0(std::uint64_t seed) {
    StreamRng init(seed, StreamRng::Purpose::generic, kInitBlock);
    return init.uniform() * two_pi;
}

// Block-start states. Noise-free paths have the closed form
// theta = theta0 + omega0 * tau * slot; otherwise a sequential pre-pass
// replays each block's trajectory stream and records the boundary state, so
// the parallel pass can regenerate any block independently.
std::vector<TrajState> block_states(const TrajParams& t, double theta0, double omega0,
                                    std::uint64_t n_blocks, std::uint64_t block_slots,
                                    std::uint64_t total_slots, std::uint64_t seed) {
    std::vector<TrajState> states(static_cast<std::size_t>(n_blocks));
    if (!t.stochastic) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) {
            const double slot = static_cast<double>(b * block_slots);
            states[b] = {theta0 + omega0 * t.tau * slot, omega0};
        }
        return states;
    }
    TrajState st{theta0, omega0};
    for (std::uint64_t b = 0; b < n_blocks; ++b) {
        states[b] = st;
        StreamRng traj(seed, StreamRng::Purpose::trajectory, b);
        const std::uint64_t end = std::min((b + 1) * block_slots, total_slots);
        for (std::uint64_t s = b * block_slots; s < end; ++s) advance_slot(st, t, traj);
    }
    return states;
}

// Poisson sampler with a precomputed exp(-lambda) threshold; falls back to
// the general sampler when lambda is large enough to underflow the product.
struct PoissonSpec {
    double lambda = 0.0;
    double threshold = 1.0;

    void set(double l) {
        lambda = l;
        threshold = std::exp(-l);
    }

    std::uint32_t sample(StreamRng& rng) const {
        if (lambda <= 0.0) return 0;
        if (threshold <= 0.0) return static_cast<std::uint32_t>(rng.poisson(lambda));
        double p = rng.uniform();
        std::uint32_t k = 0;
        while (p > threshold) {
            ++k;
            p *= rng.uniform();
        }
        return k;
    }
};

inline std::uint32_t thin(StreamRng& rng, std::uint32_t n, double keep) {
    if (keep >= 1.0) return n;
    if (keep <= 0.0) return 0;
    std::uint32_t kept = 0;
    for (std::uint32_t i = 0; i < n; ++i) kept += rng.bernoulli(keep) ? 1u : 0u;
    return kept;
}

struct SlotTables {
    // Effective source intensity and arrived mean per intensity label.
    std::array<double, 4> source{};
    std::array<PoissonSpec, 4> source_spec{};
    std::array<double, 4> lam_a{}, lam_b{};
    std::array<std::array<double, 16>, 16> denom{}, cross{};  // label pairs
    std::array<double, 256> phase{};
    int n_phases = 16;
    double eta_d = 1.0;
    double dark = 0.0;
    double survive = 1.0;      // 1 - dark
    double strong_base = 1.0;  // exp(-eta_d * (lam_a + lam_b) / 2) for strong pulses
    double strong_k = 0.0;     // eta_d * sqrt(lam_a * lam_b) for strong pulses
};

SlotTables make_tables(const ProtocolParams& p, const ChannelParams& ch) {
    SlotTables t;
    t.source[static_cast<int>(IntensityLabel::Vacuum)] = ch.extinction_ratio * p.mu;
    t.source[static_cast<int>(IntensityLabel::Decoy)] = p.nu;
    t.source[static_cast<int>(IntensityLabel::Signal)] = p.mu;
    t.source[static_cast<int>(IntensityLabel::Strong)] = ch.strong_intensity;
    for (int l = 0; l < 4; ++l) {
        t.source_spec[l].set(t.source[l]);
        t.lam_a[l] = ch.transmittance_a * t.source[l];
        t.lam_b[l] = ch.transmittance_b * t.source[l];
    }
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            t.denom[a][b] = t.lam_a[a] + t.lam_b[b];
            t.cross[a][b] = 2.0 * std::sqrt(t.lam_a[a] * t.lam_b[b]);
        }
    t.n_phases = p.phase_slices;
    for (int k = 0; k < p.phase_slices; ++k) t.phase[k] = p.phase_of(k);
    t.eta_d = ch.detector_efficiency;
    t.dark = ch.dark_count_prob;
    t.survive = 1.0 - ch.dark_count_prob;
    const int ss = static_cast<int>(IntensityLabel::Strong);
    t.strong_base = std::exp(-t.eta_d * t.denom[ss][ss] / 2.0);
    t.strong_k = t.eta_d * t.cross[ss][ss] / 2.0;
    return t;
}

struct BlockOut {
    std::vector<ClickEvent> events;
    std::uint64_t n_valid = 0;
    std::uint64_t n_double = 0;
    std::uint64_t n_qkd_valid = 0;
    std::uint64_t n_strong_valid = 0;
    std::array<std::uint64_t, 4> sent_a{}, sent_b{};
    std::array<std::uint64_t, 17> src_hist_a{}, src_hist_b{}, arr_hist_a{}, arr_hist_b{};
};

inline void bump(std::array<std::uint64_t, 17>& hist, std::uint32_t n) {
    ++hist[n < 16 ? n : 16];
}

}  // namespace

PhaseTrajectory phase_difference_trajectory(const ChannelParams& ch, std::uint64_t n_slots,
                                            double slot_seconds, std::uint64_t seed) {
    ensure_valid(ch);
    const TrajParams t = make_traj_params(ch, slot_seconds);
    PhaseTrajectory out;
    out.theta0 = draw_theta0(seed);
    out.delta_theta.resize(static_cast<std::size_t>(n_slots));
    out.delta_omega.resize(static_cast<std::size_t>(n_slots));
    TrajState st{out.theta0, ch.delta_omega0_rad_s};
    // Fresh stream per block of slots, mirroring simulate_session so both
    // walk the same path for the same seed and slot duration.
    constexpr std::uint64_t kBlock = 1u << 16;
    for (std::uint64_t b = 0; b * kBlock < n_slots; ++b) {
        StreamRng traj(seed, StreamRng::Purpose::trajectory, b);
        const std::uint64_t end = std::min((b + 1) * kBlock, n_slots);
        for (std::uint64_t s = b * kBlock; s < end; ++s) {
            out.delta_theta[s] = st.theta;
            out.delta_omega[s] = st.omega;
            advance_slot(st, t, traj);
        }
    }
    return out;
}

SessionData simulate_session(const ProtocolParams& params, const ChannelParams& channel,
                             std::uint64_t seed, const SimOptions& options) {
    ensure_valid(params);
    ensure_valid(channel);
    if (options.block_slots == 0) throw std::invalid_argument("block_slots must be positive");

    SessionData out;
    out.schedule = build_schedule(params.frame, params.n_qkd_rounds);
    out.protocol = params;
    out.channel = channel;
    out.seed = seed;

    const std::uint64_t total = out.schedule.total_slots;
    const std::uint64_t block = options.block_slots;
    const std::uint64_t n_blocks = total == 0 ? 0 : (total + block - 1) / block;

    const TrajParams traj_params = make_traj_params(channel, params.slot_seconds);
    const double theta0 = draw_theta0(seed);
    out.ground_truth.theta0 = theta0;
    if (total == 0) return out;

    const auto states = block_states(traj_params, theta0, channel.delta_omega0_rad_s, n_blocks,
                                     block, total, seed);
    const SlotTables tables = make_tables(params, channel);

    if (options.record_rounds) {
        out.rounds.resize(static_cast<std::size_t>(total));
        out.clicks.resize(static_cast<std::size_t>(total));
    }
    if (options.record_trajectory) {
        out.ground_truth.delta_theta.resize(static_cast<std::size_t>(total));
        out.ground_truth.delta_omega.resize(static_cast<std::size_t>(total));
    }
    if (options.record_tags) {
        out.ground_truth.src_a.resize(static_cast<std::size_t>(total));
        out.ground_truth.src_b.resize(static_cast<std::size_t>(total));
        out.ground_truth.arr_a.resize(static_cast<std::size_t>(total));
        out.ground_truth.arr_b.resize(static_cast<std::size_t>(total));
    }

    std::vector<BlockOut> results(static_cast<std::size_t>(n_blocks));
    const double p_mu = params.p_mu;
    const double p_mu_nu = params.p_mu + params.p_nu;

    parallel_for(n_blocks, options.threads, [&](std::uint64_t b) {
        BlockOut& res = results[static_cast<std::size_t>(b)];
        TrajState st = states[static_cast<std::size_t>(b)];
        StreamRng traj(seed, StreamRng::Purpose::trajectory, b);
        StreamRng det(seed, StreamRng::Purpose::detection, b);
        const std::uint64_t end = std::min((b + 1) * block, total);

        for (std::uint64_t s = b * block; s < end; ++s) {
            const SlotRegion region = out.schedule.region_of(s);
            if (options.record_trajectory) {
                out.ground_truth.delta_theta[s] = st.theta;
                out.ground_truth.delta_omega[s] = st.omega;
            }

            IntensityLabel la = IntensityLabel::Vacuum;
            IntensityLabel lb = IntensityLabel::Vacuum;
            std::uint8_t pa = 0, pb = 0;
            std::uint32_t src_a = 0, src_b = 0, arr_a = 0, arr_b = 0;
            bool click_l = false, click_r = false;

            if (region == SlotRegion::Qkd) {
                const double ua = det.uniform();
                la = ua < p_mu ? IntensityLabel::Signal
                               : (ua < p_mu_nu ? IntensityLabel::Decoy : IntensityLabel::Vacuum);
                pa = static_cast<std::uint8_t>(det.uniform_index(tables.n_phases));
                const double ub = det.uniform();
                lb = ub < p_mu ? IntensityLabel::Signal
                               : (ub < p_mu_nu ? IntensityLabel::Decoy : IntensityLabel::Vacuum);
                pb = static_cast<std::uint8_t>(det.uniform_index(tables.n_phases));

                src_a = tables.source_spec[static_cast<int>(la)].sample(det);
                arr_a = thin(det, src_a, channel.transmittance_a);
                src_b = tables.source_spec[static_cast<int>(lb)].sample(det);
                arr_b = thin(det, src_b, channel.transmittance_b);

                ++res.sent_a[static_cast<int>(la)];
                ++res.sent_b[static_cast<int>(lb)];
                bump(res.src_hist_a, src_a);
                bump(res.src_hist_b, src_b);
                bump(res.arr_hist_a, arr_a);
                bump(res.arr_hist_b, arr_b);

                const std::uint32_t n_tot = arr_a + arr_b;
                std::uint32_t det_l = 0, det_r = 0;
                if (n_tot > 0) {
                    const int ia = static_cast<int>(la), ib = static_cast<int>(lb);
                    const double denom = tables.denom[ia][ib];
                    // Total phase difference: encoding plus drift at this slot.
                    const double dphi = tables.phase[pb] + st.theta - tables.phase[pa];
                    const double w_l =
                        denom > 0.0
                            ? (denom + tables.cross[ia][ib] * std::cos(dphi)) / (2.0 * denom)
                            : 0.5;
                    const double to_l = w_l * tables.eta_d;
                    for (std::uint32_t i = 0; i < n_tot; ++i) {
                        const double u = det.uniform();
                        if (u < to_l)
                            ++det_l;
                        else if (u < tables.eta_d)
                            ++det_r;
                    }
                }
                click_l = det_l > 0;
                click_r = det_r > 0;
                if (tables.dark > 0.0) {
                    // One uniform resolves both detectors; the p^2 chance of
                    // a simultaneous double dark count is neglected.
                    const double u = det.uniform();
                    if (u < 2.0 * tables.dark) {
                        if (u < tables.dark)
                            click_l = true;
                        else
                            click_r = true;
                    }
                }
            } else if (region == SlotRegion::Reference) {
                la = lb = IntensityLabel::Strong;
                // Coherent fields split into independent Poisson port means
                // n_LR = (lam_a + lam_b +- 2 sqrt(lam_a lam_b) cos) / 2, so
                // each detector is one Bernoulli draw. Photon counts are not
                // tracked for reference pulses.
                const double shift = std::exp(-tables.strong_k * std::cos(st.theta));
                click_l = det.uniform() < 1.0 - tables.survive * tables.strong_base * shift;
                click_r = det.uniform() < 1.0 - tables.survive * tables.strong_base / shift;
            } else {
                // Recovery slots emit nothing and their clicks are ignored.
                if (options.record_rounds) {
                    out.rounds[s] = RoundSpec{s, region, la, lb, 0, 0};
                    out.clicks[s] = ClickRecord{s, 0, false};
                }
                if (options.record_tags) {
                    out.ground_truth.src_a[s] = 0;
                    out.ground_truth.src_b[s] = 0;
                    out.ground_truth.arr_a[s] = 0;
                    out.ground_truth.arr_b[s] = 0;
                }
                advance_slot(st, traj_params, traj);
                continue;
            }

            const bool valid = click_l != click_r;
            const std::uint8_t outcome = click_r ? 1 : 0;
            if (valid) {
                ++res.n_valid;
                if (region == SlotRegion::Qkd)
                    ++res.n_qkd_valid;
                else
                    ++res.n_strong_valid;
                ClickEvent ev;
                ev.slot = s;
                ev.theta_true = static_cast<float>(wrap_two_pi(st.theta));
                ev.outcome = outcome;
                ev.a_intensity = la;
                ev.b_intensity = lb;
                ev.a_phase_index = pa;
                ev.b_phase_index = pb;
                ev.src_photons_a = static_cast<std::uint8_t>(std::min<std::uint32_t>(src_a, 255));
                ev.src_photons_b = static_cast<std::uint8_t>(std::min<std::uint32_t>(src_b, 255));
                ev.arr_photons_a = static_cast<std::uint8_t>(std::min<std::uint32_t>(arr_a, 255));
                ev.arr_photons_b = static_cast<std::uint8_t>(std::min<std::uint32_t>(arr_b, 255));
                res.events.push_back(ev);
            } else if (click_l && click_r) {
                ++res.n_double;
            }

            if (options.record_rounds) {
                out.rounds[s] = RoundSpec{s, region, la, lb, pa, pb};
                out.clicks[s] = ClickRecord{s, valid ? outcome : std::uint8_t{0}, valid};
            }
            if (options.record_tags) {
                out.ground_truth.src_a[s] = static_cast<std::uint8_t>(std::min<std::uint32_t>(src_a, 255));
                out.ground_truth.src_b[s] = static_cast<std::uint8_t>(std::min<std::uint32_t>(src_b, 255));
                out.ground_truth.arr_a[s] = static_cast<std::uint8_t>(std::min<std::uint32_t>(arr_a, 255));
                out.ground_truth.arr_b[s] = static_cast<std::uint8_t>(std::min<std::uint32_t>(arr_b, 255));
            }
            advance_slot(st, traj_params, traj);
        }
    });

    std::size_t n_events = 0;
    for (const auto& r : results) n_events += r.events.size();
    out.events.reserve(n_events);
    for (auto& r : results) {
        out.events.insert(out.events.end(), r.events.begin(), r.events.end());
        out.n_valid += r.n_valid;
        out.n_double += r.n_double;
        out.n_qkd_valid += r.n_qkd_valid;
        out.n_strong_valid += r.n_strong_valid;
        for (int l = 0; l < 4; ++l) {
            out.sent_a[l] += r.sent_a[l];
            out.sent_b[l] += r.sent_b[l];
        }
        for (int k = 0; k < 17; ++k) {
            out.ground_truth.src_hist_a[k] += r.src_hist_a[k];
            out.ground_truth.src_hist_b[k] += r.src_hist_b[k];
            out.ground_truth.arr_hist_a[k] += r.arr_hist_a[k];
            out.ground_truth.arr_hist_b[k] += r.arr_hist_b[k];
        }
    }
    return out;
}

}  // namespace mpqkd
