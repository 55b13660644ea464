#include <mpqkd/decoy.hpp>
#include <mpqkd/rng.hpp>
#include <mpqkd/table_io.hpp>

#include <doctest.h>

#include <cmath>
#include <string>

using namespace mpqkd;

namespace {

double log_eps_half(double eps) { return std::log(eps / 2.0); }

double lower_residual(double chi, double d) {
    return (chi / (1.0 + d)) * (d - (1.0 + d) * std::log(1.0 + d));
}

double upper_residual(double chi, double d) {
    return (chi / (1.0 - d)) * (-d - (1.0 - d) * std::log(1.0 - d));
}

// Gain of one pair class under joint Poisson photon numbers: sum of
// P_n(a) P_m(b) Y[n][m]. Yields above two photons per side are zero in the
// test models, so the 3x3 sum is the exact mixture.
double poisson_gain(double a, double b, const double yield[3][3]) {
    double q = 0.0;
    double pn = std::exp(-a);
    for (int n = 0; n < 3; ++n) {
        double pm = std::exp(-b);
        for (int m = 0; m < 3; ++m) {
            q += pn * pm * yield[n][m];
            pm *= b / (m + 1);
        }
        pn *= a / (n + 1);
    }
    return q;
}

}  // namespace

TEST_CASE("concentration bounds bracket the observation") {
    for (double chi : {1e-3, 1.0, 10.0, 1e2, 1e4, 1e6, 1e9}) {
        for (double eps : {1e-2, 1e-10}) {
            const ChernoffBounds b = chernoff_bounds(chi, eps);
            CHECK(b.lower >= 0.0);
            CHECK(b.lower <= chi);
            CHECK(b.upper >= chi);
            CHECK(b.delta_lower > 0.0);
            CHECK(b.delta_upper > 0.0);
            CHECK(b.delta_upper < 1.0);
            // back-substitute the solved deltas into their defining equations
            const double target = log_eps_half(eps);
            if (std::isinf(b.delta_lower)) {
                // the root exceeds double range (chi far below one count per
                // ln(2/eps)); only the trivial zero lower bound remains
                CHECK(b.lower == 0.0);
            } else {
                CHECK(std::abs(lower_residual(chi, b.delta_lower) - target) <
                      1e-8 * std::abs(target));
                CHECK(b.lower == doctest::Approx(chi / (1.0 + b.delta_lower)).epsilon(1e-12));
            }
            CHECK(std::abs(upper_residual(chi, b.delta_upper) - target) <
                  1e-8 * std::abs(target));
            // recomputing 1 - delta loses ~4 digits when delta approaches 1,
            // so the identity check is looser than the lower-tail one
            CHECK(b.upper == doctest::Approx(chi / (1.0 - b.delta_upper)).epsilon(1e-9));
        }
    }
}

TEST_CASE("smaller failure probability widens the interval") {
    const double chi = 5e4;
    const ChernoffBounds loose = chernoff_bounds(chi, 1e-2);
    const ChernoffBounds tight = chernoff_bounds(chi, 1e-10);
    CHECK(tight.lower < loose.lower);
    CHECK(tight.upper > loose.upper);
    // relative width shrinks like 1/sqrt(chi)
    const ChernoffBounds big = chernoff_bounds(1e9, 1e-10);
    CHECK(big.upper / big.lower < 1.001);
    const ChernoffBounds small = chernoff_bounds(100.0, 1e-10);
    CHECK(small.upper / small.lower > 2.0);
}

TEST_CASE("zero and near-zero observations degenerate cleanly") {
    const double eps = 1e-2;
    const ChernoffBounds z = chernoff_bounds(0.0, eps);
    CHECK(z.lower == 0.0);
    CHECK(z.upper == doctest::Approx(std::log(2.0 / eps)).epsilon(1e-12));
    // observations far below one count sit just above the zero-count
    // ceiling: the exact excess is chi * (1 + delta-log term) = O(1e-11),
    // and the solver rounds the deviation outward
    const ChernoffBounds tiny = chernoff_bounds(1e-12, eps);
    CHECK(tiny.upper >= std::log(2.0 / eps));
    CHECK(tiny.upper <= std::log(2.0 / eps) + 1e-8);
    CHECK(tiny.lower >= 0.0);
}

TEST_CASE("interval coverage on repeated Poisson draws") {
    const double lambda = 50.0;
    const double eps = 1e-2;
    StreamRng rng(2024, StreamRng::generic, 0);
    int covered = 0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
        const double chi = static_cast<double>(rng.poisson(lambda));
        const ChernoffBounds b = chernoff_bounds(chi, eps);
        covered += b.lower <= lambda && lambda <= b.upper;
    }
    CHECK(covered >= static_cast<int>(0.97 * trials));
}

TEST_CASE("single-photon yield recovery from a pure Poisson mixture") {
    ProtocolParams params;  // mu = 0.309, nu = 0.032
    const double eps = 1e-10;

    // yields with nothing above one photon per side: the two-intensity
    // elimination is exact, so only the concentration slack remains
    const double yield[3][3] = {
        {1e-6, 1e-3, 0.0},
        {1e-3, 5e-3, 0.0},
        {0.0, 0.0, 0.0},
    };
    CountTable table;
    table.n_rounds = 2e14;
    const double intens[3] = {0.0, params.nu, params.mu};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            auto& c = table.at(z_count_class(a, b));
            c.sent = 1e13;
            c.total = c.sent * poisson_gain(intens[a], intens[b], yield);
        }

    const M11Result r = estimate_M11_Z(table, params, eps);
    const double mu = params.mu;
    const double true_m11 =
        table.at(CountClass::Z_AmuBmu).sent * std::pow(mu * std::exp(-mu), 2.0) * yield[1][1];
    CHECK(!r.clamped);
    CHECK(r.m11_lower <= true_m11);
    CHECK(r.m11_lower > 0.97 * true_m11);
    CHECK(r.y11_lower <= yield[1][1]);
    CHECK(r.chernoff_calls > 0);
    CHECK(r.epsilon == eps);

    // adding multiphoton yield keeps the estimate on the safe side
    const double yield2[3][3] = {
        {1e-6, 1e-3, 2e-3},
        {1e-3, 5e-3, 8e-3},
        {2e-3, 8e-3, 2e-2},
    };
    CountTable rich = table;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            auto& c = rich.at(z_count_class(a, b));
            c.total = c.sent * poisson_gain(intens[a], intens[b], yield2);
        }
    const M11Result r2 = estimate_M11_Z(rich, params, eps);
    const double true2 =
        rich.at(CountClass::Z_AmuBmu).sent * std::pow(mu * std::exp(-mu), 2.0) * yield2[1][1];
    CHECK(r2.m11_lower <= true2);
    CHECK(r2.m11_lower > 0.5 * true2);
}

TEST_CASE("starved statistics clamp the yield bound to zero") {
    ProtocolParams params;
    CountTable table;
    table.n_rounds = 1e6;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            auto& c = table.at(z_count_class(a, b));
            c.sent = 1e4;
            c.total = a == 0 && b == 0 ? 3.0 : 0.0;  // background only
        }
    const M11Result r = estimate_M11_Z(table, params, 1e-10);
    CHECK(r.clamped);
    CHECK(r.m11_lower == 0.0);
    CHECK(r.y11_lower == 0.0);
}

namespace {

CountTable fixture_table() {
    return load_count_table(std::string(MPQKD_FIXTURE_DIR) + "/counts_km101.csv");
}

ProtocolParams fixture_params() {
    ProtocolParams p;
    p.mu = 0.309;
    p.nu = 0.032;
    p.p_mu = 0.22;
    p.p_nu = 0.18;
    return p;
}

}  // namespace

TEST_CASE("measured 101 km counts reproduce the published estimates") {
    const CountTable table = fixture_table();
    const ProtocolParams params = fixture_params();
    const double eps = 1e-10;

    const M11Result m11 = estimate_M11_Z(table, params, eps);
    CHECK(!m11.clamped);
    CHECK(m11.m11_lower == doctest::Approx(1.07e8).epsilon(0.01));

    const EphaseResult ep = estimate_ephase(table, m11, params, eps);
    CHECK(!ep.aborted);
    CHECK(!ep.uninformative);
    CHECK(ep.e11_upper == doctest::Approx(0.2474).epsilon(0.025));

    const auto& zmm = table.at(CountClass::Z_AmuBmu);
    const KeyLengthResult key = key_length(m11.m11_lower, ep.capped_at_half(), zmm.total,
                                           zmm.error / zmm.total, 1.1, table.n_pairs());
    CHECK(!key.clamped);
    CHECK(key.rate == doctest::Approx(7.75e-5).epsilon(0.01));
}

TEST_CASE("phase error estimation flags its failure modes") {
    const ProtocolParams params = fixture_params();
    CountTable table = fixture_table();
    const M11Result m11 = estimate_M11_Z(table, params, 1e-10);

    // no sieved X statistics at all: abort at the safe ceiling
    table.at(CountClass::X_A2nuB2nu).total = 0.0;
    table.at(CountClass::X_A2nuB2nu).error = 0.0;
    EphaseResult ep = estimate_ephase(table, m11, params, 1e-10);
    CHECK(ep.aborted);
    CHECK(ep.e11_upper == 0.5);
    CHECK(ep.capped_at_half() == 0.5);

    // all sieved pairs in error: the bound blows past one half
    table = fixture_table();
    table.at(CountClass::X_A2nuB2nu).error = table.at(CountClass::X_A2nuB2nu).total;
    ep = estimate_ephase(table, m11, params, 1e-10);
    CHECK(ep.uninformative);
    CHECK(ep.capped_at_half() == 0.5);

    // more X errors can only push the bound up
    table = fixture_table();
    const EphaseResult base = estimate_ephase(table, m11, params, 1e-10);
    table.at(CountClass::X_A2nuB2nu).error *= 1.2;
    const EphaseResult worse = estimate_ephase(table, m11, params, 1e-10);
    CHECK(worse.e11_upper > base.e11_upper);
}

TEST_CASE("key length accounting") {
    // closed-form spot check with pre-computed entropies
    const double h01 = 0.4689955935892812;   // h(0.1)
    const double h001 = 0.08079313589591119; // h(0.01)
    const KeyLengthResult k =
        key_length(1000.0, 0.1, 2000.0, 0.01, 1.1, 1e4);
    const double want = 1000.0 * (1.0 - h01) - 1.1 * 2000.0 * h001;
    CHECK(k.key_bits == doctest::Approx(want).epsilon(1e-9));
    CHECK(k.rate == doctest::Approx(want / 1e4).epsilon(1e-9));
    CHECK(!k.clamped);

    // a phase error at one half removes the single-photon term entirely
    const KeyLengthResult dead = key_length(1e9, 0.5, 2000.0, 0.01, 1.1, 1e4);
    CHECK(dead.key_bits == 0.0);
    CHECK(dead.clamped);

    // error correction cost alone drives the length negative, then clamps
    const KeyLengthResult neg = key_length(10.0, 0.1, 1e6, 0.3, 1.1, 1e4);
    CHECK(neg.key_bits == 0.0);
    CHECK(neg.clamped);
    CHECK(neg.rate == 0.0);

    // monotone responses
    CHECK(key_length(1000.0, 0.2, 2000.0, 0.01, 1.1, 1e4).key_bits < k.key_bits);
    CHECK(key_length(1000.0, 0.1, 2000.0, 0.02, 1.1, 1e4).key_bits < k.key_bits);
    CHECK(key_length(1100.0, 0.1, 2000.0, 0.01, 1.1, 1e4).key_bits > k.key_bits);
    CHECK(key_length(1000.0, 0.1, 2000.0, 0.01, 1.2, 1e4).key_bits < k.key_bits);
}
