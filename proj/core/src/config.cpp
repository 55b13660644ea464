#include <mpqkd/config.hpp>

#include <mpqkd/math.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace mpqkd {

using nlohmann::json;

std::string to_string(CompensationMode mode) {
    switch (mode) {
        case CompensationMode::Track: return "track";
        case CompensationMode::Truth: return "truth";
        case CompensationMode::Off: return "off";
    }
    return "?";
}

namespace {

struct Context {
    std::vector<std::string> issues;

    void fail(const std::string& where, const std::string& what) {
        issues.push_back(where.empty() ? what : where + ": " + what);
    }
};

void reject_unknown(Context& ctx, const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) ctx.fail(where, "unknown key '" + key + "'");
    }
}

template <typename T>
bool fetch(Context& ctx, const json& obj, const std::string& where, const char* key, T& out,
           bool required = false) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) ctx.fail(where, std::string("missing required key '") + key + "'");
        return false;
    }
    try {
        out = it->get<T>();
        return true;
    } catch (const json::exception&) {
        ctx.fail(where, std::string("key '") + key + "' has the wrong type");
        return false;
    }
}

void parse_protocol(Context& ctx, const json& obj, ProtocolParams& p) {
    reject_unknown(ctx, obj, "protocol",
                   {"mu", "nu", "p_mu", "p_nu", "phase_slices", "l_min", "l_max", "epsilon",
                    "f_ec", "slot_seconds", "n_qkd_rounds", "frame"});
    fetch(ctx, obj, "protocol", "mu", p.mu, true);
    fetch(ctx, obj, "protocol", "nu", p.nu, true);
    fetch(ctx, obj, "protocol", "p_mu", p.p_mu, true);
    fetch(ctx, obj, "protocol", "p_nu", p.p_nu, true);
    fetch(ctx, obj, "protocol", "phase_slices", p.phase_slices);
    fetch(ctx, obj, "protocol", "l_min", p.l_min);
    fetch(ctx, obj, "protocol", "l_max", p.l_max);
    fetch(ctx, obj, "protocol", "epsilon", p.epsilon);
    fetch(ctx, obj, "protocol", "f_ec", p.f_ec);
    fetch(ctx, obj, "protocol", "slot_seconds", p.slot_seconds);
    fetch(ctx, obj, "protocol", "n_qkd_rounds", p.n_qkd_rounds, true);
    if (auto it = obj.find("frame"); it != obj.end()) {
        if (!it->is_object()) {
            ctx.fail("protocol.frame", "must be an object");
        } else {
            reject_unknown(ctx, *it, "protocol.frame", {"n_reference", "n_recovery", "n_qkd"});
            fetch(ctx, *it, "protocol.frame", "n_reference", p.frame.n_reference, true);
            fetch(ctx, *it, "protocol.frame", "n_recovery", p.frame.n_recovery, true);
            fetch(ctx, *it, "protocol.frame", "n_qkd", p.frame.n_qkd, true);
        }
    }
}

void parse_channel(Context& ctx, const json& obj, ChannelParams& ch, LinkBudget& link) {
    reject_unknown(ctx, obj, "channel",
                   {"transmittance_a", "transmittance_b", "distance_km", "attenuation_db_per_km",
                    "excess_loss_db", "detector_efficiency", "dark_count_prob",
                    "extinction_ratio", "strong_intensity", "delta_omega0_rad_s",
                    "freq_walk_rate_rad2_s3", "freq_walk_bound_rad_s", "fiber_phase_rate_rad2_s",
                    "linewidth_hz"});
    const bool has_ta = fetch(ctx, obj, "channel", "transmittance_a", ch.transmittance_a);
    const bool has_tb = fetch(ctx, obj, "channel", "transmittance_b", ch.transmittance_b);
    link.by_distance = fetch(ctx, obj, "channel", "distance_km", link.distance_km);
    fetch(ctx, obj, "channel", "attenuation_db_per_km", link.attenuation_db_per_km);
    fetch(ctx, obj, "channel", "excess_loss_db", link.excess_loss_db);
    if (link.by_distance && (has_ta || has_tb))
        ctx.fail("channel", "give either distance_km or explicit transmittances, not both");
    if (!link.by_distance && has_ta != has_tb)
        ctx.fail("channel", "transmittance_a and transmittance_b must be given together");
    if (link.by_distance) {
        if (!(link.distance_km >= 0.0)) ctx.fail("channel", "distance_km must be non-negative");
        if (!(link.attenuation_db_per_km >= 0.0))
            ctx.fail("channel", "attenuation_db_per_km must be non-negative");
        if (!(link.excess_loss_db >= 0.0))
            ctx.fail("channel", "excess_loss_db must be non-negative");
        ch.transmittance_a = ch.transmittance_b = side_transmittance(link, link.distance_km);
    }
    fetch(ctx, obj, "channel", "detector_efficiency", ch.detector_efficiency);
    fetch(ctx, obj, "channel", "dark_count_prob", ch.dark_count_prob);
    fetch(ctx, obj, "channel", "extinction_ratio", ch.extinction_ratio);
    fetch(ctx, obj, "channel", "strong_intensity", ch.strong_intensity);
    fetch(ctx, obj, "channel", "delta_omega0_rad_s", ch.delta_omega0_rad_s);
    fetch(ctx, obj, "channel", "freq_walk_rate_rad2_s3", ch.freq_walk_rate);
    fetch(ctx, obj, "channel", "freq_walk_bound_rad_s", ch.freq_walk_bound_rad_s);
    fetch(ctx, obj, "channel", "fiber_phase_rate_rad2_s", ch.fiber_phase_rate);
    fetch(ctx, obj, "channel", "linewidth_hz", ch.linewidth_hz);
}

void parse_estimation(Context& ctx, const json& obj, EstimationConfig& est) {
    reject_unknown(ctx, obj, "estimation",
                   {"group_size", "track_window", "search_lo_rad_s", "search_hi_rad_s",
                    "coarse_step_rad_s", "compensation"});
    fetch(ctx, obj, "estimation", "group_size", est.group_size);
    fetch(ctx, obj, "estimation", "track_window", est.track_window);
    fetch(ctx, obj, "estimation", "search_lo_rad_s", est.search_lo_rad_s);
    fetch(ctx, obj, "estimation", "search_hi_rad_s", est.search_hi_rad_s);
    fetch(ctx, obj, "estimation", "coarse_step_rad_s", est.coarse_step_rad_s);
    std::string comp;
    if (fetch(ctx, obj, "estimation", "compensation", comp)) {
        if (comp == "track")
            est.compensation = CompensationMode::Track;
        else if (comp == "truth")
            est.compensation = CompensationMode::Truth;
        else if (comp == "off")
            est.compensation = CompensationMode::Off;
        else
            ctx.fail("estimation", "compensation must be one of track, truth, off");
    }
}

void parse_direct(Context& ctx, const json& obj, DirectInputs& d) {
    reject_unknown(ctx, obj, "direct", {"m11", "e11", "m_mumu", "e_mumu", "n_rounds"});
    d.present = true;
    fetch(ctx, obj, "direct", "m11", d.m11, true);
    fetch(ctx, obj, "direct", "e11", d.e11, true);
    fetch(ctx, obj, "direct", "m_mumu", d.m_mumu, true);
    fetch(ctx, obj, "direct", "e_mumu", d.e_mumu, true);
    fetch(ctx, obj, "direct", "n_rounds", d.n_rounds, true);
    if (d.m11 < 0.0 || d.m_mumu < 0.0) ctx.fail("direct", "counts must be non-negative");
    if (!(d.e11 >= 0.0 && d.e11 <= 1.0) || !(d.e_mumu >= 0.0 && d.e_mumu <= 1.0))
        ctx.fail("direct", "error rates must lie in [0, 1]");
    if (!(d.n_rounds > 0.0)) ctx.fail("direct", "n_rounds must be positive");
}

void parse_sweep(Context& ctx, const json& obj, SweepConfig& s) {
    reject_unknown(ctx, obj, "sweep",
                   {"distance_lo_km", "distance_hi_km", "n_points", "x_error_override"});
    s.present = true;
    fetch(ctx, obj, "sweep", "distance_lo_km", s.distance_lo_km);
    fetch(ctx, obj, "sweep", "distance_hi_km", s.distance_hi_km);
    fetch(ctx, obj, "sweep", "n_points", s.n_points);
    fetch(ctx, obj, "sweep", "x_error_override", s.x_error_override);
    if (!(s.distance_lo_km >= 0.0 && s.distance_hi_km >= s.distance_lo_km))
        ctx.fail("sweep", "distance bounds must satisfy 0 <= lo <= hi");
    if (s.n_points < 1) ctx.fail("sweep", "n_points must be positive");
    if (s.x_error_override >= 0.0 && s.x_error_override > 1.0)
        ctx.fail("sweep", "x_error_override must lie in [0, 1]");
}

void parse_pairing_points(Context& ctx, const json& arr, std::vector<PairingRatePoint>& pts) {
    if (!arr.is_array()) {
        ctx.fail("pairing_rate", "points must be an array");
        return;
    }
    int idx = 0;
    for (const auto& e : arr) {
        const std::string where = "pairing_rate.points[" + std::to_string(idx++) + "]";
        if (!e.is_object()) {
            ctx.fail(where, "must be an object");
            continue;
        }
        reject_unknown(ctx, e, where, {"p_click", "l_min", "l_max"});
        PairingRatePoint pt;
        fetch(ctx, e, where, "p_click", pt.p_click, true);
        fetch(ctx, e, where, "l_min", pt.l_min, true);
        fetch(ctx, e, where, "l_max", pt.l_max, true);
        if (!(pt.p_click > 0.0 && pt.p_click < 1.0))
            ctx.fail(where, "p_click must lie in (0, 1)");
        if (pt.l_min < 1 || pt.l_max < pt.l_min)
            ctx.fail(where, "bounds must satisfy 1 <= l_min <= l_max");
        pts.push_back(pt);
    }
}

const std::initializer_list<const char*> kModes = {"simulate",       "analyze",
                                                   "direct-keyrate", "pairing-rate",
                                                   "phase-estimate", "sweep"};

}  // namespace

double side_transmittance(const LinkBudget& link, double distance_km) {
    const double loss_db = link.attenuation_db_per_km * distance_km / 2.0 + link.excess_loss_db;
    return std::pow(10.0, -loss_db / 10.0);
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": JSON parse error: " + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

    Context ctx;
    RunConfig cfg;
    reject_unknown(ctx, root, "",
                   {"mode", "seed", "protocol", "channel", "estimation", "direct", "sweep",
                    "pairing_rate"});

    if (fetch(ctx, root, "", "mode", cfg.mode)) {
        bool ok = false;
        for (const char* m : kModes) ok = ok || cfg.mode == m;
        if (!ok) ctx.fail("", "mode must be one of simulate, analyze, direct-keyrate, "
                              "pairing-rate, phase-estimate, sweep");
    }
    fetch(ctx, root, "", "seed", cfg.seed);

    if (auto it = root.find("protocol"); it != root.end() && it->is_object())
        parse_protocol(ctx, *it, cfg.protocol);
    else
        ctx.fail("", "missing required section 'protocol'");
    if (auto it = root.find("channel"); it != root.end() && it->is_object())
        parse_channel(ctx, *it, cfg.channel, cfg.link);
    else
        ctx.fail("", "missing required section 'channel'");
    if (auto it = root.find("estimation"); it != root.end()) {
        if (it->is_object())
            parse_estimation(ctx, *it, cfg.estimation);
        else
            ctx.fail("estimation", "must be an object");
    }
    if (auto it = root.find("direct"); it != root.end()) {
        if (it->is_object())
            parse_direct(ctx, *it, cfg.direct);
        else
            ctx.fail("direct", "must be an object");
    }
    if (auto it = root.find("sweep"); it != root.end()) {
        if (it->is_object())
            parse_sweep(ctx, *it, cfg.sweep);
        else
            ctx.fail("sweep", "must be an object");
    }
    if (auto it = root.find("pairing_rate"); it != root.end()) {
        if (it->is_object()) {
            reject_unknown(ctx, *it, "pairing_rate", {"points"});
            if (auto pts = it->find("points"); pts != it->end())
                parse_pairing_points(ctx, *pts, cfg.pairing_points);
            else
                ctx.fail("pairing_rate", "missing required key 'points'");
        } else {
            ctx.fail("pairing_rate", "must be an object");
        }
    }

    // Module invariants, aggregated rather than thrown one by one.
    for (const auto& s : validate(cfg.protocol)) ctx.fail("protocol", s);
    for (const auto& s : validate(cfg.channel)) ctx.fail("channel", s);

    EstimationConfig& est = cfg.estimation;
    if (est.group_size < 2) ctx.fail("estimation", "group_size must be at least 2");
    if (est.track_window < 1) ctx.fail("estimation", "track_window must be positive");
    if (est.search_lo_rad_s == est.search_hi_rad_s) {
        const double half = two_pi * 150.0e6;
        est.search_lo_rad_s = cfg.channel.delta_omega0_rad_s - half;
        est.search_hi_rad_s = cfg.channel.delta_omega0_rad_s + half;
    }
    if (!(est.search_hi_rad_s > est.search_lo_rad_s))
        ctx.fail("estimation", "search interval must have positive width");
    if (cfg.protocol.slot_seconds > 0.0 &&
        est.search_hi_rad_s - est.search_lo_rad_s >= two_pi / cfg.protocol.slot_seconds)
        ctx.fail("estimation",
                 "search interval spans a full alias period 2*pi/slot_seconds; the frequency "
                 "offset is only identifiable within one period");
    if (est.coarse_step_rad_s < 0.0) ctx.fail("estimation", "coarse_step_rad_s must be >= 0");

    if (!ctx.issues.empty()) {
        std::ostringstream os;
        os << origin << ": invalid configuration:";
        for (const auto& s : ctx.issues) os << "\n  - " << s;
        throw ConfigError(os.str());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace mpqkd
