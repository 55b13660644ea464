#include <mpqkd/sifting.hpp>
#include <mpqkd/math.hpp>
#include <mpqkd/rng.hpp>

#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

using namespace mpqkd;

namespace {

constexpr auto V = IntensityLabel::Vacuum;
constexpr auto Nu = IntensityLabel::Decoy;
constexpr auto Mu = IntensityLabel::Signal;

PairRecord make_pair(IntensityLabel af, IntensityLabel ar, IntensityLabel bf,
                     IntensityLabel br, int paf = 0, int par = 0, int pbf = 0, int pbr = 0,
                     int out_f = 0, int out_r = 0) {
    PairRecord p;
    p.front.slot = 100;
    p.rear.slot = 200;
    p.front.a_intensity = af;
    p.rear.a_intensity = ar;
    p.front.b_intensity = bf;
    p.rear.b_intensity = br;
    p.front.a_phase_index = static_cast<std::uint8_t>(paf);
    p.rear.a_phase_index = static_cast<std::uint8_t>(par);
    p.front.b_phase_index = static_cast<std::uint8_t>(pbf);
    p.rear.b_phase_index = static_cast<std::uint8_t>(pbr);
    p.front.outcome = static_cast<std::uint8_t>(out_f);
    p.rear.outcome = static_cast<std::uint8_t>(out_r);
    return p;
}

}  // namespace

TEST_CASE("per-side basis assignment covers the full label square") {
    CHECK(assign_side_basis(V, V) == SideLabel::Zero);
    CHECK(assign_side_basis(V, Nu) == SideLabel::Z);
    CHECK(assign_side_basis(Nu, V) == SideLabel::Z);
    CHECK(assign_side_basis(V, Mu) == SideLabel::Z);
    CHECK(assign_side_basis(Mu, V) == SideLabel::Z);
    CHECK(assign_side_basis(Nu, Nu) == SideLabel::X);
    CHECK(assign_side_basis(Mu, Mu) == SideLabel::X);
    CHECK(assign_side_basis(Nu, Mu) == SideLabel::Discard);
    CHECK(assign_side_basis(Mu, Nu) == SideLabel::Discard);
    CHECK_THROWS_AS(assign_side_basis(IntensityLabel::Strong, V), std::invalid_argument);
}

TEST_CASE("two-side sifting table") {
    CHECK(sift_pair(SideLabel::Zero, SideLabel::Zero) == PairClass::ZeroPair);
    CHECK(sift_pair(SideLabel::Zero, SideLabel::Z) == PairClass::ZPair);
    CHECK(sift_pair(SideLabel::Z, SideLabel::Zero) == PairClass::ZPair);
    CHECK(sift_pair(SideLabel::Z, SideLabel::Z) == PairClass::ZPair);
    CHECK(sift_pair(SideLabel::Zero, SideLabel::X) == PairClass::XPair);
    CHECK(sift_pair(SideLabel::X, SideLabel::Zero) == PairClass::XPair);
    CHECK(sift_pair(SideLabel::X, SideLabel::X) == PairClass::XPair);
    CHECK(sift_pair(SideLabel::Z, SideLabel::X) == PairClass::Discard);
    CHECK(sift_pair(SideLabel::X, SideLabel::Z) == PairClass::Discard);
    CHECK(sift_pair(SideLabel::Discard, SideLabel::Zero) == PairClass::Discard);
    CHECK(sift_pair(SideLabel::Z, SideLabel::Discard) == PairClass::Discard);
}

TEST_CASE("classification fills sum codes and parity") {
    auto s = classify_pair(make_pair(V, Nu, Mu, V, 0, 0, 0, 0, 0, 1));
    CHECK(s.pair_class == PairClass::ZPair);
    CHECK(s.sum_code_a == 1);
    CHECK(s.sum_code_b == 2);
    CHECK(s.parity == 1);

    s = classify_pair(make_pair(Nu, Nu, V, V));
    CHECK(s.pair_class == PairClass::XPair);
    CHECK(s.sum_code_a == 1);
    CHECK(s.sum_code_b == 0);

    s = classify_pair(make_pair(Nu, Mu, V, V));
    CHECK(s.pair_class == PairClass::Discard);
    CHECK(s.sum_code_a == -1);

    // Z against X is irreconcilable even though both sides are well formed
    s = classify_pair(make_pair(V, Mu, Nu, Nu));
    CHECK(s.pair_class == PairClass::Discard);
}

TEST_CASE("Z bits from the vacuum position") {
    // Alice: front vacuum -> 0; Bob: front vacuum -> 1
    CHECK(z_bits(V, Mu, Nu, V) == std::make_pair(std::uint8_t{0}, std::uint8_t{0}));
    CHECK(z_bits(Mu, V, V, Nu) == std::make_pair(std::uint8_t{1}, std::uint8_t{1}));
    CHECK(z_bits(V, Nu, V, Mu) == std::make_pair(std::uint8_t{0}, std::uint8_t{1}));
    CHECK(z_bits(Nu, V, Mu, V) == std::make_pair(std::uint8_t{1}, std::uint8_t{0}));
}

TEST_CASE("X bit and announced remainder from the phase indices") {
    CHECK(x_bit_theta(0, 9, 16) == std::make_pair(std::uint8_t{1}, 2));
    CHECK(x_bit_theta(3, 3, 16) == std::make_pair(std::uint8_t{0}, 0));
    CHECK(x_bit_theta(5, 1, 16) == std::make_pair(std::uint8_t{1}, 8));
    CHECK(x_bit_theta(0, 7, 16) == std::make_pair(std::uint8_t{0}, 14));
    CHECK(x_bit_theta(0, 3, 4) == std::make_pair(std::uint8_t{1}, 2));
    // complementary differences share the remainder and flip the bit
    for (int d : {4, 16}) {
        for (int i = 0; i < d; ++i) {
            const auto fwd = x_bit_theta(0, static_cast<std::uint8_t>(i), d);
            const auto rev =
                x_bit_theta(0, static_cast<std::uint8_t>((i + d / 2) % d), d);
            CHECK(fwd.second == rev.second);
            CHECK((fwd.first ^ rev.first) == 1);
        }
    }
}

TEST_CASE("key mapping of Z pairs and unmapped classes") {
    auto s = classify_pair(make_pair(V, Mu, Nu, V));
    map_keys(s, 0.37, 16);
    CHECK(s.mapped);
    CHECK(s.kept);
    CHECK(s.chi_a == 0);
    CHECK(s.chi_b == 0);

    auto zero = classify_pair(make_pair(V, V, V, V));
    map_keys(zero, 0.0, 16);
    CHECK(!zero.mapped);

    auto disc = classify_pair(make_pair(Nu, Mu, V, V));
    map_keys(disc, 0.0, 16);
    CHECK(!disc.mapped);
}

TEST_CASE("phase sieve keeps only near-branch X pairs") {
    const int d = 16;
    const double slice = pi / d;

    // aligned phases, no drift: dead centre of the 0 branch
    auto s = classify_pair(make_pair(Nu, Nu, Nu, Nu, 2, 5, 2, 5));
    map_keys(s, 0.0, d);
    CHECK(s.mapped);
    CHECK(s.kept);
    CHECK(s.chi_a == s.chi_b);  // branch 0 leaves Bob's bit alone

    // drift exactly one slice away: closed bound still keeps it
    s = classify_pair(make_pair(Nu, Nu, Nu, Nu, 2, 5, 2, 5));
    map_keys(s, slice, d);
    CHECK(s.kept);

    // just beyond one slice: dropped
    s = classify_pair(make_pair(Nu, Nu, Nu, Nu, 2, 5, 2, 5));
    map_keys(s, slice * 1.01, d);
    CHECK(s.mapped);
    CHECK(!s.kept);

    // quadrature is the farthest point from both branches
    s = classify_pair(make_pair(Nu, Nu, Nu, Nu, 2, 5, 2, 5));
    map_keys(s, pi / 2.0, d);
    CHECK(!s.kept);

    // near the pi branch: kept, and the branch folds into Bob's bit
    s = classify_pair(make_pair(Nu, Nu, Nu, Nu, 2, 5, 2, 5));
    map_keys(s, pi - 0.5 * slice, d);
    CHECK(s.kept);
    CHECK((s.chi_a ^ s.chi_b) == 1);

    // announced remainders shift the compensated phase like drift does
    s = classify_pair(make_pair(Mu, Mu, Mu, Mu, 0, 0, 0, 1));  // tb - ta = 2 units
    map_keys(s, -2.0 * slice, d);
    CHECK(s.kept);
    CHECK(s.theta_units_a == 0);
    CHECK(s.theta_units_b == 2);
}

TEST_CASE("sieve keep rate under uniform drift is 2 over D") {
    StreamRng rng(321, StreamRng::generic, 0);
    for (int d : {8, 16}) {
        const int n = 20000;
        int kept = 0;
        for (int i = 0; i < n; ++i) {
            auto s = classify_pair(make_pair(Nu, Nu, Nu, Nu, int(rng.uniform_index(d)),
                                             int(rng.uniform_index(d)),
                                             int(rng.uniform_index(d)),
                                             int(rng.uniform_index(d))));
            map_keys(s, rng.uniform() * two_pi, d);
            kept += s.kept;
        }
        const double want = 2.0 / d;
        const double se = std::sqrt(want * (1.0 - want) / n);
        CHECK(std::abs(kept / double(n) - want) < 3.5 * se);
    }
}

TEST_CASE("count tally routes every pair class to its row") {
    ProtocolParams params;
    params.p_mu = 0.2;
    params.p_nu = 0.3;

    std::vector<SiftedPair> pairs;
    // vacuum-vacuum pair: counted as pure error without mapping
    pairs.push_back(classify_pair(make_pair(V, V, V, V)));

    // Z pair with matching bits, then one with mismatched bits
    auto z_ok = classify_pair(make_pair(V, Nu, Mu, V));
    map_keys(z_ok, 0.0, 16);
    pairs.push_back(z_ok);
    auto z_bad = classify_pair(make_pair(V, Nu, V, Mu));
    map_keys(z_bad, 0.0, 16);
    pairs.push_back(z_bad);

    // kept X pair with consistent outcomes, then an unkept one
    auto x_ok = classify_pair(make_pair(Nu, Nu, Nu, Nu, 1, 4, 1, 4, 0, 0));
    map_keys(x_ok, 0.0, 16);
    REQUIRE(x_ok.kept);
    pairs.push_back(x_ok);
    auto x_drop = classify_pair(make_pair(Nu, Nu, Nu, Nu, 1, 4, 1, 4));
    map_keys(x_drop, pi / 2.0, 16);
    REQUIRE(!x_drop.kept);
    pairs.push_back(x_drop);

    // one-sided vacuum X pair: no sieve, counted even though not kept
    auto x_vac = classify_pair(make_pair(V, V, Mu, Mu, 0, 0, 0, 0, 0, 1));
    map_keys(x_vac, pi / 2.0, 16);
    REQUIRE(!x_vac.kept);
    pairs.push_back(x_vac);

    // discard contributes nothing anywhere
    pairs.push_back(classify_pair(make_pair(Nu, Mu, V, V)));

    const CountTable t = tally_counts(pairs, params, 1000);
    CHECK(t.n_rounds == 1000.0);
    CHECK(t.n_pairs() == 500.0);

    CHECK(t.at(CountClass::Z_A0B0).total == 1.0);
    CHECK(t.at(CountClass::Z_A0B0).error == 1.0);
    CHECK(t.at(CountClass::Z_AnuBmu).total == 2.0);
    CHECK(t.at(CountClass::Z_AnuBmu).error == 1.0);
    CHECK(t.at(CountClass::X_A2nuB2nu).total == 1.0);
    CHECK(t.at(CountClass::X_A2nuB2nu).error == 0.0);
    CHECK(t.at(CountClass::X_A0B2mu).total == 1.0);
    // quadrature drift picks branch 0, bits agree, parity 1: an error
    CHECK(t.at(CountClass::X_A0B2mu).error == 1.0);

    double grand_total = 0.0;
    for (const auto& c : t.classes) grand_total += c.total;
    CHECK(grand_total == 5.0);  // discard and the unkept sieved X are absent

    // multinomial sent normalization, p0 = 0.5
    CHECK(t.at(CountClass::Z_A0B0).sent == doctest::Approx(500 * 0.0625));
    CHECK(t.at(CountClass::Z_AnuBmu).sent == doctest::Approx(500 * 0.3 * 0.2));
    CHECK(t.at(CountClass::X_A2nuB2nu).sent == doctest::Approx(500 * 0.09 * 0.09));
    CHECK(t.at(CountClass::X_A0B2mu).sent == doctest::Approx(500 * 0.25 * 0.04));
    CHECK(t.at(CountClass::X_A2muB2nu).sent == doctest::Approx(500 * 0.04 * 0.09));
}

TEST_CASE("simulated label draws reproduce the multinomial sent model") {
    ProtocolParams params;
    params.p_mu = 0.22;
    params.p_nu = 0.18;
    const int n_pairs = 100000;

    StreamRng rng(777, StreamRng::generic, 0);
    auto draw = [&]() {
        const double u = rng.uniform();
        if (u < params.p_mu) return Mu;
        if (u < params.p_mu + params.p_nu) return Nu;
        return V;
    };

    std::array<int, kNumCountClasses> observed{};
    for (int i = 0; i < n_pairs; ++i) {
        const auto s = classify_pair(make_pair(draw(), draw(), draw(), draw()));
        if (s.pair_class == PairClass::Discard) continue;
        if (s.pair_class == PairClass::XPair)
            ++observed[static_cast<int>(x_count_class(s.sum_code_a, s.sum_code_b))];
        else
            ++observed[static_cast<int>(z_count_class(s.sum_code_a, s.sum_code_b))];
    }

    const CountTable norm = tally_counts({}, params, 2 * n_pairs);
    for (int c = 0; c < kNumCountClasses; ++c) {
        const double expect = norm.classes[static_cast<std::size_t>(c)].sent;
        const double se = std::sqrt(expect * (1.0 - expect / n_pairs));
        CHECK(std::abs(observed[static_cast<std::size_t>(c)] - expect) < 4.0 * se + 1.0);
    }
}
