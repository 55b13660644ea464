// Microbenchmarks for the hot paths: session simulation, the pairing scan,
// group frequency estimation, and the finite-size analysis chain.

#include <mpqkd/channel.hpp>
#include <mpqkd/decoy.hpp>
#include <mpqkd/pairing.hpp>
#include <mpqkd/phase_reference.hpp>
#include <mpqkd/pipeline.hpp>
#include <mpqkd/protocol.hpp>
#include <mpqkd/rng.hpp>
#include <mpqkd/table_io.hpp>

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

using namespace mpqkd;

namespace {

// 101 km operating point; the protocol defaults already match it
ChannelParams operating_channel() {
    ChannelParams ch;
    ch.transmittance_a = 0.06916426513;
    ch.transmittance_b = 0.06916426513;
    ch.detector_efficiency = 0.6246;
    ch.dark_count_prob = 2.72e-8;
    ch.extinction_ratio = 1e-4;
    ch.strong_intensity = 30.0;
    ch.delta_omega0_rad_s = 2.0 * M_PI * 1e7;
    ch.freq_walk_rate = 3.2e13;
    ch.freq_walk_bound_rad_s = M_PI * 1e7;
    ch.fiber_phase_rate = 1000.0;
    ch.linewidth_hz = 4000.0;
    return ch;
}

std::vector<ClickEvent> bernoulli_stream(double p, std::uint64_t n_slots) {
    StreamRng rng(99, StreamRng::generic, 0);
    std::vector<ClickEvent> clicks;
    for (std::uint64_t slot = 0; slot < n_slots; ++slot) {
        if (rng.bernoulli(p)) {
            ClickEvent e{};
            e.slot = slot;
            clicks.push_back(e);
        }
    }
    return clicks;
}

void BM_SimulateSession(benchmark::State& state) {
    ProtocolParams params;
    params.n_qkd_rounds = static_cast<std::uint64_t>(state.range(0));
    const ChannelParams channel = operating_channel();
    std::uint64_t slots = 0;
    for (auto _ : state) {
        const SessionData session = simulate_session(params, channel, 1);
        benchmark::DoNotOptimize(session.n_valid);
        slots += session.schedule.total_slots;
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(slots));
}
BENCHMARK(BM_SimulateSession)->Arg(1 << 16)->Arg(1 << 19)->Unit(benchmark::kMillisecond);

void BM_PairClicks(benchmark::State& state) {
    const std::vector<ClickEvent> clicks = bernoulli_stream(6.35e-3, 1000000);
    for (auto _ : state) {
        const PairingResult res = pair_clicks(clicks, 63, 500);
        benchmark::DoNotOptimize(res.stats.n_pairs);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(clicks.size()));
}
BENCHMARK(BM_PairClicks);

void BM_MleDeltaOmega(benchmark::State& state) {
    const double tau = 1.6e-9;
    const double omega = 2.0 * M_PI * 1e7;
    StreamRng rng(7, StreamRng::generic, 0);
    const double phi0 = rng.uniform() * 2.0 * M_PI;
    EstimationGroup group;
    std::uint64_t slot = 0;
    while (group.members.size() < static_cast<std::size_t>(state.range(0))) {
        if (rng.bernoulli(6.35e-3)) {
            const double p_left = 0.5 * (1.0 + std::cos(phi0 + omega * tau * slot));
            group.members.push_back(
                {slot, rng.bernoulli(p_left) ? std::uint8_t{0} : std::uint8_t{1}});
        }
        ++slot;
    }
    group.start_slot = group.members.front().slot;
    group.end_slot = group.members.back().slot;
    FrequencySearch search;
    search.omega_lo = 0.3 * omega;
    search.omega_hi = 3.0 * omega;
    for (auto _ : state) {
        const MleResult mle = mle_delta_omega(group, tau, search);
        benchmark::DoNotOptimize(mle.omega_hat);
    }
}
BENCHMARK(BM_MleDeltaOmega)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_ChernoffBounds(benchmark::State& state) {
    double chi = 1.0;
    for (auto _ : state) {
        const ChernoffBounds b = chernoff_bounds(chi, 1e-10);
        benchmark::DoNotOptimize(b.lower);
        chi = chi < 1e9 ? chi * 1.7 : 1.0;  // sweep the solver across magnitudes
    }
}
BENCHMARK(BM_ChernoffBounds);

void BM_AnalyzeTable(benchmark::State& state) {
    const CountTable table =
        load_count_table(std::string(MPQKD_FIXTURE_DIR) + "/counts_km101.csv");
    ProtocolParams params;  // defaults match the 101 km table
    for (auto _ : state) {
        const KeyAnalysis analysis = analyze_table(table, params);
        benchmark::DoNotOptimize(analysis.key.rate);
    }
}
BENCHMARK(BM_AnalyzeTable);

}  // namespace

BENCHMARK_MAIN();
