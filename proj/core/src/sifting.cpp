#include <mpqkd/sifting.hpp>

#include <mpqkd/math.hpp>

#include <stdexcept>

namespace mpqkd {

std::string to_string(SideLabel label) {
    switch (label) {
        case SideLabel::Zero: return "0";
        case SideLabel::Z: return "Z";
        case SideLabel::X: return "X";
        case SideLabel::Discard: return "discard";
    }
    return "?";
}

std::string to_string(PairClass cls) {
    switch (cls) {
        case PairClass::ZeroPair: return "ZeroPair";
        case PairClass::ZPair: return "ZPair";
        case PairClass::XPair: return "XPair";
        case PairClass::Discard: return "Discard";
    }
    return "?";
}

SideLabel assign_side_basis(IntensityLabel i, IntensityLabel j) {
    if (i == IntensityLabel::Strong || j == IntensityLabel::Strong)
        throw std::invalid_argument("strong pulses carry no basis");
    const bool vi = i == IntensityLabel::Vacuum;
    const bool vj = j == IntensityLabel::Vacuum;
    if (vi && vj) return SideLabel::Zero;
    if (vi || vj) return SideLabel::Z;
    return i == j ? SideLabel::X : SideLabel::Discard;
}

PairClass sift_pair(SideLabel a, SideLabel b) {
    if (a == SideLabel::Discard || b == SideLabel::Discard) return PairClass::Discard;
    if (a == SideLabel::Zero && b == SideLabel::Zero) return PairClass::ZeroPair;
    if (a == SideLabel::X || b == SideLabel::X) {
        // X meets Z is irreconcilable; X meets '0' or X stays X.
        if (a == SideLabel::Z || b == SideLabel::Z) return PairClass::Discard;
        return PairClass::XPair;
    }
    return PairClass::ZPair;
}

namespace {

// 0 = vacuum side, 1 = nu-bearing, 2 = mu-bearing.
int sum_code(IntensityLabel i, IntensityLabel j) {
    if (i == IntensityLabel::Signal || j == IntensityLabel::Signal) return 2;
    if (i == IntensityLabel::Decoy || j == IntensityLabel::Decoy) return 1;
    return 0;
}

}  // namespace

SiftedPair classify_pair(const PairRecord& pair) {
    SiftedPair out;
    out.pair = pair;
    out.label_a = assign_side_basis(pair.front.a_intensity, pair.rear.a_intensity);
    out.label_b = assign_side_basis(pair.front.b_intensity, pair.rear.b_intensity);
    out.pair_class = sift_pair(out.label_a, out.label_b);
    if (out.pair_class != PairClass::Discard) {
        out.sum_code_a = sum_code(pair.front.a_intensity, pair.rear.a_intensity);
        out.sum_code_b = sum_code(pair.front.b_intensity, pair.rear.b_intensity);
    }
    out.parity = pair.outcome_parity();
    return out;
}

std::pair<std::uint8_t, std::uint8_t> z_bits(IntensityLabel a_i, IntensityLabel a_j,
                                             IntensityLabel b_i, IntensityLabel b_j) {
    const std::uint8_t chi_a = a_i == IntensityLabel::Vacuum ? 0 : 1;
    const std::uint8_t chi_b = b_i == IntensityLabel::Vacuum ? 1 : 0;
    // The non-vacuum position must be vacuum on the other round for a valid
    // Z or '0' side; anything else never reaches key mapping.
    (void)a_j;
    (void)b_j;
    return {chi_a, chi_b};
}

std::pair<std::uint8_t, int> x_bit_theta(std::uint8_t phase_i, std::uint8_t phase_j,
                                         int d_slices) {
    const int d = d_slices;
    const int diff = (static_cast<int>(phase_j) - static_cast<int>(phase_i) + d) % d;
    // phi_j - phi_i = 2*pi*diff/d; chi tests which pi-branch that lies on,
    // theta is the remainder within the branch, in units of pi/d.
    const std::uint8_t chi = diff >= d / 2 ? 1 : 0;
    const int theta_units = (2 * diff) % d;
    return {chi, theta_units};
}

void map_keys(SiftedPair& pair, double delta_theta, int d_slices) {
    if (pair.pair_class == PairClass::Discard || pair.pair_class == PairClass::ZeroPair) {
        pair.mapped = false;
        return;
    }
    pair.delta_theta_est = delta_theta;
    if (pair.pair_class == PairClass::ZPair) {
        const auto [ca, cb] = z_bits(pair.pair.front.a_intensity, pair.pair.rear.a_intensity,
                                     pair.pair.front.b_intensity, pair.pair.rear.b_intensity);
        pair.chi_a = ca;
        pair.chi_b = cb;
        pair.kept = true;
        pair.mapped = true;
        return;
    }

    const auto [ca, ta] = x_bit_theta(pair.pair.front.a_phase_index, pair.pair.rear.a_phase_index,
                                      d_slices);
    const auto [cb, tb] = x_bit_theta(pair.pair.front.b_phase_index, pair.pair.rear.b_phase_index,
                                      d_slices);
    pair.chi_a = ca;
    pair.chi_b = cb;
    pair.theta_units_a = ta;
    pair.theta_units_b = tb;

    const double slice = pi / static_cast<double>(d_slices);
    const double m = wrap_two_pi(static_cast<double>(tb - ta) * slice + delta_theta);
    const double to_zero = circular_distance(m, 0.0, two_pi);
    const double to_pi = circular_distance(m, pi, two_pi);
    const std::uint8_t branch = to_pi < to_zero ? 1 : 0;
    pair.kept = (branch == 0 ? to_zero : to_pi) <= slice;
    pair.chi_b ^= branch;
    pair.mapped = true;
}

CountTable tally_counts(const std::vector<SiftedPair>& pairs, const ProtocolParams& params,
                        std::uint64_t n_qkd_rounds) {
    CountTable table;
    table.n_rounds = static_cast<double>(n_qkd_rounds);

    for (const auto& p : pairs) {
        switch (p.pair_class) {
            case PairClass::Discard:
                break;
            case PairClass::ZeroPair: {
                auto& c = table.at(CountClass::Z_A0B0);
                c.total += 1.0;
                c.error += 1.0;  // no correlation to get right
                break;
            }
            case PairClass::ZPair: {
                if (!p.mapped) break;
                auto& c = table.at(z_count_class(p.sum_code_a, p.sum_code_b));
                c.total += 1.0;
                if (p.chi_a != p.chi_b) c.error += 1.0;
                break;
            }
            case PairClass::XPair: {
                if (!p.mapped) break;
                const bool sieved = p.sum_code_a > 0 && p.sum_code_b > 0;
                if (sieved && !p.kept) break;
                auto& c = table.at(x_count_class(p.sum_code_a, p.sum_code_b));
                c.total += 1.0;
                if ((p.chi_a ^ p.chi_b ^ p.parity) != 0) c.error += 1.0;
                break;
            }
        }
    }

    // Multinomial sent normalization: probability that one random pair of
    // rounds carries each class's intensity pattern.
    const double p0 = params.p_vacuum();
    const double z_side[3] = {p0 * p0, 2.0 * p0 * params.p_nu, 2.0 * p0 * params.p_mu};
    const double x_side[3] = {p0 * p0, params.p_nu * params.p_nu, params.p_mu * params.p_mu};
    const double n_pairs = table.n_pairs();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            table.at(z_count_class(a, b)).sent = n_pairs * z_side[a] * z_side[b];
            if (a || b) table.at(x_count_class(a, b)).sent = n_pairs * x_side[a] * x_side[b];
        }
    return table;
}

}  // namespace mpqkd
