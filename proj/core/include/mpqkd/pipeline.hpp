#pragma once

#include <mpqkd/channel.hpp>
#include <mpqkd/config.hpp>
#include <mpqkd/counts.hpp>
#include <mpqkd/decoy.hpp>
#include <mpqkd/pairing.hpp>
#include <mpqkd/phase_reference.hpp>
#include <mpqkd/rate_model.hpp>
#include <mpqkd/report.hpp>
#include <mpqkd/sifting.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mpqkd {

// Finite-size estimation chain applied to one count table.
struct KeyAnalysis {
    M11Result m11;
    EphaseResult e11;
    KeyLengthResult key;
    double e_mumu = 0.0;
    double m_mumu = 0.0;
};

KeyAnalysis analyze_table(const CountTable& table, const ProtocolParams& params);

// Frequency estimation applied to the reference clicks of one session.
struct PhasePipeline {
    std::vector<EstimationGroup> groups;
    std::vector<MleResult> mle;
    std::vector<std::pair<double, double>> estimates;  // (mid time, omega)
    FrequencyTrack track;
};

// run_mle = false assembles the groups but skips the per-group likelihood
// maximization (estimates stay empty and the track degrades to a constant
// zero). The simulation pipeline uses this when the compensation mode never
// consults the fitted track.
PhasePipeline run_phase_pipeline(const SessionData& session, const EstimationConfig& estimation,
                                 int threads, bool run_mle = true);

struct PhaseSummary {
    std::uint64_t n_reference_clicks = 0;
    std::uint64_t n_groups = 0;
    std::uint64_t n_ambiguous = 0;
    double omega_mean = 0.0;
    double omega_min = 0.0;
    double omega_max = 0.0;
    std::uint64_t n_track_segments = 0;
};

PhaseSummary summarize_phase(const SessionData& session, const PhasePipeline& phase);

// Source-photon bookkeeping of the pairs that actually entered the table,
// for validating estimator bounds against what the simulation really did.
struct TruthStats {
    // (mu,mu) Z pairs whose sides each emitted exactly one photon
    std::uint64_t z_mumu_pairs_11 = 0;
    // sieve-kept X pairs with both sides non-vacuum and exactly one photon
    // per side; physically identical across intensity classes
    std::uint64_t x_kept_11_total = 0;
    std::uint64_t x_kept_11_error = 0;

    double e11_truth() const {
        return x_kept_11_total ? static_cast<double>(x_kept_11_error) /
                                     static_cast<double>(x_kept_11_total)
                               : 0.0;
    }
};

struct SimulationOutcome {
    SessionData session;
    PairingResult pairing;
    PhasePipeline phase;
    PhaseSummary phase_summary;
    CountTable table;
    TruthStats truth;
    KeyAnalysis analysis;
    // pooled error rate of sieve-kept X pairs with both sides non-vacuum
    double x_error_sieved = 0.0;
    double x_kept_total = 0.0;
};

// Full protocol pipeline for one seeded session: simulate, pair, estimate
// the frequency track, map keys under the configured compensation mode,
// tally, and run the finite-size chain.
SimulationOutcome run_simulation(const RunConfig& config, int threads);

struct PhaseEstimateOutcome {
    SessionData session;
    PhasePipeline phase;
    PhaseSummary phase_summary;
    std::vector<LengthBinStats> error_bins;
};

// Reference-pulse subset of the pipeline: frequency estimates, the fitted
// track, and the interference-error-versus-length diagnostic.
PhaseEstimateOutcome run_phase_estimate(const RunConfig& config, int threads);

KeyLengthResult run_direct(const RunConfig& config);

// Report builders. Reports embed the resolved configuration and seed and
// never the worker count, so output is byte-identical across thread counts.
Report simulate_report(const RunConfig& config, const SimulationOutcome& outcome);
Report analyze_report(const RunConfig& config, const std::string& counts_origin,
                      const CountTable& table, const KeyAnalysis& analysis);
Report direct_report(const RunConfig& config, const KeyLengthResult& key);
Report pairing_rate_report(const RunConfig& config);
Report phase_estimate_report(const RunConfig& config, const PhaseEstimateOutcome& outcome);
Report sweep_report(const RunConfig& config, const std::vector<RatePoint>& points);

}  // namespace mpqkd
