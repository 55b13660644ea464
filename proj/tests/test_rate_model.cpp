#include <mpqkd/rate_model.hpp>

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace mpqkd;

namespace {

ProtocolParams operating_protocol() {
    ProtocolParams p;
    p.mu = 0.309;
    p.nu = 0.032;
    p.p_mu = 0.22;
    p.p_nu = 0.18;
    p.l_min = 63;
    p.l_max = 500;
    p.n_qkd_rounds = 507000000000ull;
    return p;
}

ChannelParams operating_channel() {
    ChannelParams ch;
    ch.transmittance_a = ch.transmittance_b = 0.06916426513;
    ch.detector_efficiency = 0.6246;
    ch.dark_count_prob = 2.72e-8;
    ch.extinction_ratio = 1e-4;
    return ch;
}

}  // namespace

TEST_CASE("modeled operating point at 101 km") {
    const RatePoint pt = model_rate_point(operating_protocol(), operating_channel(), 101.0);
    CHECK(pt.click_prob == doctest::Approx(6.35e-3).epsilon(0.10));
    CHECK(pt.pair_rate == doctest::Approx(2.46e-3).epsilon(0.10));
    CHECK(pt.n_pairs == doctest::Approx(pt.pair_rate * 5.07e11).epsilon(1e-12));
    // signal-signal QBER sits in the sub-permille band set by the
    // extinction floor and dark counts
    CHECK(pt.e_mumu > 1e-4);
    CHECK(pt.e_mumu < 1e-3);
    // sieved X error hovers at the discretization floor
    CHECK(pt.x_error > 0.2);
    CHECK(pt.x_error < 0.3);
    CHECK(pt.m11_lower > 0.0);
    CHECK(pt.e11_upper < 0.5);
    CHECK(pt.rate > 1e-5);
    CHECK(pt.rate < 3e-4);
    CHECK(pt.eta == doctest::Approx(0.06916426513 * 0.6246));
    // the expected table is itself a valid count table
    CHECK(validate(pt.table).empty());

    // pure function of its inputs
    const RatePoint again = model_rate_point(operating_protocol(), operating_channel(), 101.0);
    CHECK(again.rate == pt.rate);
    CHECK(again.table.at(CountClass::Z_AmuBmu).total == pt.table.at(CountClass::Z_AmuBmu).total);
}

TEST_CASE("model input validation") {
    ProtocolParams p = operating_protocol();
    ChannelParams ch = operating_channel();
    RateModelOptions opt;
    opt.phase_grid = 2;
    CHECK_THROWS_AS(model_rate_point(p, ch, 101.0, opt), std::invalid_argument);
    p.n_qkd_rounds = 0;
    CHECK_THROWS_AS(model_rate_point(p, ch, 101.0), std::invalid_argument);
    p = operating_protocol();
    p.nu = 0.5;
    CHECK_THROWS_AS(model_rate_point(p, ch, 101.0), std::invalid_argument);
}

TEST_CASE("distance sweep from the fixture config") {
    const RunConfig cfg = load_config(std::string(MPQKD_FIXTURE_DIR) + "/sweep.json");
    const auto points = sweep_distances(cfg);
    REQUIRE(points.size() == 9);
    for (int i = 0; i < 9; ++i)
        CHECK(points[static_cast<std::size_t>(i)].distance_km ==
              doctest::Approx(50.0 + 50.0 * i));
    CHECK(points[0].rate > 0.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
        CHECK(points[i].rate <= points[i - 1].rate);
        CHECK(points[i].eta < points[i - 1].eta);
        CHECK(points[i].click_prob < points[i - 1].click_prob);
    }
    // transmittance at each point follows the link budget
    const double eta0 = side_transmittance(cfg.link, 50.0) * cfg.channel.detector_efficiency;
    CHECK(points[0].eta == doctest::Approx(eta0).epsilon(1e-12));
}

TEST_CASE("explicit X error override replaces the visibility model") {
    RunConfig cfg = load_config(std::string(MPQKD_FIXTURE_DIR) + "/sweep.json");
    cfg.sweep.n_points = 3;
    cfg.sweep.x_error_override = 0.33;
    const auto points = sweep_distances(cfg);
    REQUIRE(points.size() == 3);
    for (const auto& pt : points) CHECK(pt.x_error == doctest::Approx(0.33).epsilon(1e-12));

    cfg.sweep.x_error_override = -1.0;
    const auto modeled = sweep_distances(cfg);
    CHECK(modeled[0].x_error != doctest::Approx(0.33).epsilon(1e-6));
    // a worse X error can only cost key
    CHECK(points[0].rate <= modeled[0].rate);
}

TEST_CASE("sweep configuration errors") {
    RunConfig cfg = load_config(std::string(MPQKD_FIXTURE_DIR) + "/sweep.json");
    cfg.sweep.present = false;
    CHECK_THROWS_AS(sweep_distances(cfg), ConfigError);

    cfg = load_config(std::string(MPQKD_FIXTURE_DIR) + "/sweep.json");
    cfg.link.by_distance = false;
    CHECK_THROWS_AS(sweep_distances(cfg), ConfigError);

    cfg = load_config(std::string(MPQKD_FIXTURE_DIR) + "/sweep.json");
    cfg.protocol.n_qkd_rounds = 0;
    CHECK_THROWS_AS(sweep_distances(cfg), ConfigError);
}

TEST_CASE("curve serialization carries the documented columns") {
    RunConfig cfg = load_config(std::string(MPQKD_FIXTURE_DIR) + "/sweep.json");
    cfg.sweep.n_points = 2;
    const auto points = sweep_distances(cfg);
    const std::string text = serialize_curve(points);
    std::istringstream in(text);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "distance_km,eta,R,X_error,n_pairs");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        double d = 0, eta = 0, r = 0, xe = 0, np = 0;
        REQUIRE(std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg", &d, &eta, &r, &xe, &np) == 5);
        CHECK(d == points[static_cast<std::size_t>(rows - 1)].distance_km);
        CHECK(r == points[static_cast<std::size_t>(rows - 1)].rate);
    }
    CHECK(rows == 2);
}
