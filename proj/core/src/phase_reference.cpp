#include <mpqkd/phase_reference.hpp>

#include <mpqkd/math.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpqkd {

std::pair<double, double> pairwise_outcome_probability(double delta_theta) {
    const double c = std::cos(delta_theta) / 4.0;
    return {0.5 + c, 0.5 - c};
}

std::vector<EstimationGroup> assemble_groups(const std::vector<ClickEvent>& clicks,
                                             const Schedule& schedule, std::size_t group_size) {
    if (group_size < 2) throw std::invalid_argument("group_size must be at least 2");
    const std::uint64_t cycle = schedule.frame.cycle_slots();
    std::vector<EstimationGroup> groups;
    EstimationGroup current;
    std::uint64_t current_block = 0;

    auto flush_if_full = [&] {
        if (current.members.size() == group_size) {
            current.start_slot = current.members.front().slot;
            current.end_slot = current.members.back().slot;
            groups.push_back(std::move(current));
            current = EstimationGroup{};
        }
    };

    for (const auto& ev : clicks) {
        if (schedule.region_of(ev.slot) != SlotRegion::Reference) continue;
        const std::uint64_t block = ev.slot / cycle;
        if (!current.members.empty() && block != current_block) {
            current = EstimationGroup{};  // drop per-block remainder
        }
        current_block = block;
        current.members.push_back({ev.slot, ev.outcome});
        flush_if_full();
    }
    return groups;
}

namespace {

struct GapHistogram {
    std::vector<std::uint32_t> same;  // indexed by gap
    std::vector<std::uint32_t> diff;
    std::vector<std::uint64_t> occupied;  // gaps with any count, ascending
    std::uint64_t max_gap = 0;
    std::uint64_t n_pairs = 0;
};

GapHistogram build_histogram(const EstimationGroup& group) {
    const auto& m = group.members;
    GapHistogram h;
    h.max_gap = m.back().slot - m.front().slot;
    h.same.assign(static_cast<std::size_t>(h.max_gap) + 1, 0);
    h.diff.assign(static_cast<std::size_t>(h.max_gap) + 1, 0);
    for (std::size_t i = 0; i + 1 < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            const std::uint64_t g = m[j].slot - m[i].slot;
            if (m[i].outcome == m[j].outcome)
                ++h.same[g];
            else
                ++h.diff[g];
            ++h.n_pairs;
        }
    for (std::uint64_t g = 1; g <= h.max_gap; ++g)
        if (h.same[g] | h.diff[g]) h.occupied.push_back(g);
    return h;
}

// Likelihood over occupied gaps only; one cosine per distinct gap.
double log_likelihood(const GapHistogram& h, double omega, double tau) {
    double ll = 0.0;
    for (std::uint64_t g : h.occupied) {
        const double c = std::cos(omega * tau * static_cast<double>(g)) / 4.0;
        if (h.same[g]) ll += h.same[g] * std::log(0.5 + c);
        if (h.diff[g]) ll += h.diff[g] * std::log(0.5 - c);
    }
    return ll;
}

// Likelihood truncated to gaps <= cap, evaluated with the Chebyshev
// recurrence cos(kx) = 2cos(x)cos((k-1)x) - cos((k-2)x): two multiplies per
// gap instead of a cosine call, which makes dense grid scans affordable.
double log_likelihood_capped(const GapHistogram& h, double omega, double tau,
                             std::uint64_t cap) {
    const double x = omega * tau;
    const double c1 = std::cos(x);
    double prev = 1.0, cur = c1;
    double ll = 0.0;
    for (std::uint64_t g = 1; g <= cap; ++g) {
        if (h.same[g] | h.diff[g]) {
            const double c = cur / 4.0;
            if (h.same[g]) ll += h.same[g] * std::log(0.5 + c);
            if (h.diff[g]) ll += h.diff[g] * std::log(0.5 - c);
        }
        const double next = 2.0 * c1 * cur - prev;
        prev = cur;
        cur = next;
    }
    return ll;
}

struct GridBest {
    double omega = 0.0;
    double value = -1e300;
};

template <typename F>
GridBest scan(double lo, double hi, double step, F&& f) {
    GridBest best;
    const double width = hi - lo;
    const std::uint64_t n = static_cast<std::uint64_t>(std::ceil(width / step)) + 1;
    for (std::uint64_t k = 0; k <= n; ++k) {
        const double w = std::min(lo + static_cast<double>(k) * step, hi);
        const double v = f(w);
        if (v > best.value) {
            best.omega = w;
            best.value = v;
        }
        if (w >= hi) break;
    }
    return best;
}

}  // namespace

MleResult mle_delta_omega(const EstimationGroup& group, double tau,
                          const FrequencySearch& search) {
    if (group.members.size() < 2)
        throw std::invalid_argument("estimation group needs at least two clicks");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    if (!(search.omega_hi > search.omega_lo))
        throw std::invalid_argument("degenerate frequency search interval");
    for (std::size_t i = 1; i < group.members.size(); ++i)
        if (group.members[i].slot <= group.members[i - 1].slot)
            throw std::invalid_argument("group members must be strictly ordered by slot");

    const double width = search.omega_hi - search.omega_lo;
    if (width >= two_pi / tau)
        throw std::invalid_argument(
            "search interval spans a full alias period; the offset is only "
            "identifiable modulo 2*pi/tau");

    const GapHistogram hist = build_histogram(group);
    MleResult out;
    out.n_pairs = hist.n_pairs;
    out.max_gap = hist.max_gap;
    out.ambiguous_sign = search.omega_lo < 0.0 && search.omega_hi > 0.0;

    auto step_for = [&](std::uint64_t cap) {
        double s = pi / (8.0 * tau * static_cast<double>(cap));
        if (search.coarse_step > 0.0) s = std::min(s, search.coarse_step);
        return s;
    };

    // Coarse-to-fine: scan with short gaps only (cheap and alias-tolerant at
    // wide intervals), then raise the gap cap while narrowing the interval
    // around the running maximizer.
    double lo = search.omega_lo, hi = search.omega_hi;
    std::uint64_t cap = std::min<std::uint64_t>(256, hist.max_gap);
    double step = step_for(cap);
    for (;;) {
        const GridBest best =
            scan(lo, hi, step, [&](double w) { return log_likelihood_capped(hist, w, tau, cap); });
        if (cap == hist.max_gap) {
            lo = std::max(search.omega_lo, best.omega - step);
            hi = std::min(search.omega_hi, best.omega + step);
            break;
        }
        lo = std::max(search.omega_lo, best.omega - 4.0 * step);
        hi = std::min(search.omega_hi, best.omega + 4.0 * step);
        cap = std::min(cap * 8, hist.max_gap);
        step = step_for(cap);
    }
    out.coarse_step = step;

    const double tol = 1e-6 * width;
    out.omega_hat =
        golden_section_max([&](double w) { return log_likelihood(hist, w, tau); }, lo, hi, tol);
    out.log_likelihood = log_likelihood(hist, out.omega_hat, tau);
    return out;
}

double FrequencyTrack::evaluate(double t) const {
    if (segments.empty()) throw std::out_of_range("empty frequency track");
    const double span = std::max(1.0, std::abs(domain_hi) + std::abs(domain_lo));
    const double eps = 1e-12 * span;
    if (t < domain_lo - eps || t > domain_hi + eps)
        throw std::out_of_range("time outside the fitted track domain");
    // Last segment whose start is not after t.
    std::size_t lo = 0, hi = segments.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (segments[mid].t_begin <= t)
            lo = mid;
        else
            hi = mid - 1;
    }
    return segments[lo].intercept + segments[lo].slope * t;
}

FrequencyTrack fit_frequency_track(const std::vector<std::pair<double, double>>& estimates,
                                   std::size_t window_size, double domain_lo, double domain_hi) {
    if (estimates.size() < 2)
        throw std::invalid_argument("track fitting needs at least two estimates");
    if (window_size < 1) throw std::invalid_argument("window_size must be positive");
    std::vector<std::pair<double, double>> pts = estimates;
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    FrequencyTrack track;
    if (domain_hi < domain_lo) {
        domain_lo = pts.front().first;
        domain_hi = pts.back().first;
    }
    track.domain_lo = domain_lo;
    track.domain_hi = domain_hi;

    struct Fit {
        double first_t, last_t, intercept, slope;
    };
    std::vector<Fit> fits;
    for (std::size_t begin = 0; begin < pts.size(); begin += window_size) {
        const std::size_t end = std::min(begin + window_size, pts.size());
        const std::size_t n = end - begin;
        double tm = 0.0, wm = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            tm += pts[i].first;
            wm += pts[i].second;
        }
        tm /= static_cast<double>(n);
        wm /= static_cast<double>(n);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double dt = pts[i].first - tm;
            sxx += dt * dt;
            sxy += dt * (pts[i].second - wm);
        }
        const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
        fits.push_back({pts[begin].first, pts[end - 1].first, wm - slope * tm, slope});
    }

    for (std::size_t k = 0; k < fits.size(); ++k) {
        FrequencyTrack::Segment seg;
        seg.t_begin = k == 0 ? domain_lo : 0.5 * (fits[k - 1].last_t + fits[k].first_t);
        seg.t_end = k + 1 == fits.size() ? domain_hi
                                         : 0.5 * (fits[k].last_t + fits[k + 1].first_t);
        seg.intercept = fits[k].intercept;
        seg.slope = fits[k].slope;
        track.segments.push_back(seg);
    }
    return track;
}

double compensation_phase(double t_i, double t_j, const FrequencyTrack& track) {
    if (t_i > t_j) throw std::invalid_argument("compensation interval must be ordered");
    if (track.segments.empty()) throw std::out_of_range("empty frequency track");
    const double span = std::max(1.0, std::abs(track.domain_hi) + std::abs(track.domain_lo));
    const double eps = 1e-12 * span;
    if (t_i < track.domain_lo - eps || t_j > track.domain_hi + eps)
        throw std::out_of_range("time outside the fitted track domain");
    if (t_i == t_j) return 0.0;

    double integral = 0.0;
    for (const auto& seg : track.segments) {
        const double lo = std::max(t_i, seg.t_begin);
        const double hi = std::min(t_j, seg.t_end);
        if (hi <= lo) continue;
        integral += seg.intercept * (hi - lo) + 0.5 * seg.slope * (hi * hi - lo * lo);
    }
    return integral;
}

std::vector<LengthBinStats> reference_error_by_length(const std::vector<ClickEvent>& clicks,
                                                      const Schedule& schedule,
                                                      const FrequencyTrack& track, double tau,
                                                      const std::vector<std::uint64_t>& bin_edges) {
    if (bin_edges.size() < 2) throw std::invalid_argument("need at least two bin edges");
    for (std::size_t i = 1; i < bin_edges.size(); ++i)
        if (bin_edges[i] <= bin_edges[i - 1])
            throw std::invalid_argument("bin edges must be strictly increasing");

    std::vector<LengthBinStats> bins(bin_edges.size() - 1);
    for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i) {
        bins[i].length_lo = bin_edges[i];
        bins[i].length_hi = bin_edges[i + 1];
    }
    const std::uint64_t l_min = bin_edges.front();
    const std::uint64_t l_max = bin_edges.back();  // exclusive
    const std::uint64_t cycle = schedule.frame.cycle_slots();

    std::vector<EstimationGroup::Member> block;
    std::uint64_t block_id = 0;
    auto process_block = [&] {
        for (std::size_t i = 0; i < block.size(); ++i)
            for (std::size_t j = i + 1; j < block.size(); ++j) {
                const std::uint64_t l = block[j].slot - block[i].slot;
                if (l >= l_max) break;
                if (l < l_min) continue;
                const auto bin = std::upper_bound(bin_edges.begin(), bin_edges.end(), l) -
                                 bin_edges.begin() - 1;
                auto& st = bins[static_cast<std::size_t>(bin)];
                const double phase = compensation_phase(static_cast<double>(block[i].slot) * tau,
                                                        static_cast<double>(block[j].slot) * tau,
                                                        track);
                const bool predict_same = std::cos(phase) > 0.0;
                const bool observed_same = block[i].outcome == block[j].outcome;
                ++st.total;
                if (predict_same != observed_same) ++st.mismatches;
            }
        block.clear();
    };

    for (const auto& ev : clicks) {
        if (schedule.region_of(ev.slot) != SlotRegion::Reference) continue;
        const std::uint64_t b = ev.slot / cycle;
        if (!block.empty() && b != block_id) process_block();
        block_id = b;
        block.push_back({ev.slot, ev.outcome});
    }
    process_block();
    return bins;
}

}  // namespace mpqkd
