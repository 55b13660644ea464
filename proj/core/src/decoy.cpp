#include <mpqkd/decoy.hpp>

#include <mpqkd/math.hpp>

#include <cmath>
#include <stdexcept>

namespace mpqkd {

namespace {

constexpr double kRelTol = 1e-12;

// Solves g(x) = target by bisection. g is strictly decreasing and the
// callers construct brackets with g(lo) >= target >= g(hi), so the only
// escape is a root below lo, where the deviation is effectively zero.
// Returns the upper edge of the final bracket: both tails map larger
// deviations to wider intervals, so rounding this way never overstates
// the confidence.
double bisect(double lo, double hi, double target, auto&& g) {
    if (g(lo) - target <= 0.0) return lo;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((g(mid) - target) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= kRelTol * hi) break;
    }
    return hi;
}

}  // namespace

ChernoffBounds chernoff_bounds(double chi, double epsilon) {
    if (chi < 0.0) throw std::domain_error("observed count must be non-negative");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("failure probability must lie in (0, 1)");
    const double target = std::log(epsilon / 2.0);
    ChernoffBounds out;
    if (chi == 0.0) {
        // P(X = 0) = e^{-E} <= eps/2 fixes the largest consistent mean.
        out.upper = std::log(2.0 / epsilon);
        return out;
    }
    // Lower tail, solved in L = ln(1 + delta), where the defining equation
    //   (chi / (1+delta)) (delta - (1+delta) ln(1+delta)) = ln(eps/2)
    // becomes chi (1 - e^{-L} - L) = ln(eps/2). The root sits below
    // |ln(eps/2)|/chi + 2, so the bracket stays tight even when delta itself
    // overflows; the bound then degrades gracefully to the trivial zero.
    // l + expm1(-l) == l - (1 - e^{-l}) evaluated without cancellation
    const double l_star = bisect(1e-14, -target / chi + 2.0, target, [chi](double l) {
        return -chi * (l + std::expm1(-l));
    });
    out.delta_lower = std::expm1(l_star);  // +inf once past double range
    out.lower = chi * std::exp(-l_star);   // stable companion: underflows to 0

    // Upper tail, solved in M = -ln(1 - delta): the equation
    //   (chi / (1-delta)) (-delta - (1-delta) ln(1-delta)) = ln(eps/2)
    // becomes chi (1 + M - e^{M}) = ln(eps/2), with the root below
    // ln(|ln(eps/2)|/chi + 2) + 2. In this coordinate delta never pins
    // against 1, so the solution meets the equation to near machine
    // precision for any chi.
    const double m_hi = std::log(-target / chi + 2.0) + 2.0;
    // expm1(m) - m == e^{m} - 1 - m, again cancellation-free near zero
    const double m_star = bisect(1e-14, m_hi, target, [chi](double m) {
        return -chi * (std::expm1(m) - m);
    });
    out.delta_upper = -std::expm1(-m_star);
    out.upper = chi * std::exp(m_star);
    return out;
}

namespace {

struct GainBounds {
    double lower = 0.0;
    double upper = 0.0;
};

// Chernoff-bounded detection gain of one class: bound the count, then
// normalize by the sent-pair denominator.
GainBounds bounded_gain(const CountTable& t, CountClass c, double epsilon, int& calls,
                        bool use_error_count = false) {
    const ClassCounts& cc = t.at(c);
    if (cc.sent <= 0.0) return {};
    const double count = use_error_count ? cc.error : cc.total;
    const ChernoffBounds b = chernoff_bounds(count, epsilon);
    ++calls;
    return {b.lower / cc.sent, b.upper / cc.sent};
}

}  // namespace

M11Result estimate_M11_Z(const CountTable& table, const ProtocolParams& params, double epsilon) {
    ensure_valid(table);
    const double mu = params.mu, nu = params.nu;
    if (!(nu > 0.0)) throw std::invalid_argument("decoy bound requires nu > 0");

    M11Result out;
    out.epsilon = epsilon;
    int calls = 0;
    const auto q_nunu = bounded_gain(table, CountClass::Z_AnuBnu, epsilon, calls);
    const auto q_nu0 = bounded_gain(table, CountClass::Z_AnuB0, epsilon, calls);
    const auto q_0nu = bounded_gain(table, CountClass::Z_A0Bnu, epsilon, calls);
    const auto q_00 = bounded_gain(table, CountClass::Z_A0B0, epsilon, calls);
    const auto q_mumu = bounded_gain(table, CountClass::Z_AmuBmu, epsilon, calls);
    const auto q_mu0 = bounded_gain(table, CountClass::Z_AmuB0, epsilon, calls);
    const auto q_0mu = bounded_gain(table, CountClass::Z_A0Bmu, epsilon, calls);

    // Favorable directions: H_nu enters positively, H_mu negatively.
    const double h_nu_low = std::exp(2.0 * nu) * q_nunu.lower -
                            std::exp(nu) * (q_nu0.upper + q_0nu.upper) + q_00.lower;
    const double h_mu_high = std::exp(2.0 * mu) * q_mumu.upper -
                             std::exp(mu) * (q_mu0.lower + q_0mu.lower) + q_00.upper;
    const double y11 =
        (mu * mu * mu * h_nu_low - nu * nu * nu * h_mu_high) / (mu * mu * nu * nu * (mu - nu));

    out.chernoff_calls = calls;
    if (y11 <= 0.0) {
        out.clamped = true;
        return out;
    }
    out.y11_lower = y11;
    const double single = mu * std::exp(-mu);
    out.m11_lower = table.at(CountClass::Z_AmuBmu).sent * single * single * y11;
    return out;
}

EphaseResult estimate_ephase(const CountTable& table, const M11Result& m11,
                             const ProtocolParams& params, double epsilon) {
    ensure_valid(table);
    EphaseResult out;
    out.epsilon = epsilon;
    const ClassCounts& sieved = table.at(CountClass::X_A2nuB2nu);
    if (sieved.sent <= 0.0 || sieved.total <= 0.0) {
        out.aborted = true;
        out.uninformative = true;
        return out;
    }
    if (m11.y11_lower <= 0.0) {
        out.aborted = true;
        out.uninformative = true;
        return out;
    }

    const double s = 2.0 * params.nu;
    const double kappa = 2.0 / params.phase_slices;
    int calls = 0;
    const auto t_ss = bounded_gain(table, CountClass::X_A2nuB2nu, epsilon, calls, true);
    const auto q_0s = bounded_gain(table, CountClass::X_A0B2nu, epsilon, calls);
    const auto q_s0 = bounded_gain(table, CountClass::X_A2nuB0, epsilon, calls);
    const auto q_00 = bounded_gain(table, CountClass::Z_A0B0, epsilon, calls);

    const double vacuum_part = (kappa / 2.0) * (std::exp(s) * q_0s.lower +
                                                std::exp(s) * q_s0.lower - q_00.upper);
    const double numer = std::exp(2.0 * s) * t_ss.upper - vacuum_part;
    double e11 = numer / (s * s * kappa * m11.y11_lower);

    out.chernoff_calls = calls;
    if (e11 < 0.0) {
        e11 = 0.0;
        out.clamped = true;
    } else if (e11 > 1.0) {
        e11 = 1.0;
        out.clamped = true;
    }
    out.e11_upper = e11;
    out.uninformative = e11 >= 0.5;
    return out;
}

KeyLengthResult key_length(double m11_lower, double e11_upper, double m_mumu, double e_mumu,
                           double f_ec, double n_pairs) {
    if (m11_lower < 0.0 || m_mumu < 0.0) throw std::domain_error("counts must be non-negative");
    if (!(e11_upper >= 0.0 && e11_upper <= 1.0) || !(e_mumu >= 0.0 && e_mumu <= 1.0))
        throw std::domain_error("error rates must lie in [0, 1]");
    if (f_ec < 1.0) throw std::domain_error("error-correction efficiency must be at least 1");
    if (!(n_pairs > 0.0)) throw std::domain_error("pair count must be positive");

    const double single_term =
        e11_upper >= 0.5 ? 0.0 : m11_lower * (1.0 - binary_entropy(e11_upper));
    const double raw = single_term - f_ec * m_mumu * binary_entropy(e_mumu);
    KeyLengthResult out;
    out.clamped = raw < 0.0;
    out.key_bits = raw < 0.0 ? 0.0 : raw;
    out.rate = out.key_bits / n_pairs;
    return out;
}

}  // namespace mpqkd
