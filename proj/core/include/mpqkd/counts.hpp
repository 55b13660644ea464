#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mpqkd {

// Intensity-sum classes of sifted pairs. A Z or vacuum side carries a summed
// intensity of 0, nu, or mu; an X side carries 0, 2nu, or 2mu. Order here is
// the canonical serialization order.
enum class CountClass : int {
    Z_A0B0 = 0,
    Z_A0Bnu,
    Z_A0Bmu,
    Z_AnuB0,
    Z_AnuBnu,
    Z_AnuBmu,
    Z_AmuB0,
    Z_AmuBnu,
    Z_AmuBmu,
    X_A0B2nu,
    X_A0B2mu,
    X_A2nuB0,
    X_A2nuB2nu,
    X_A2nuB2mu,
    X_A2muB0,
    X_A2muB2nu,
    X_A2muB2mu,
};

inline constexpr int kNumCountClasses = 17;

std::string_view to_string(CountClass c);
std::optional<CountClass> count_class_from_string(std::string_view name);

// sum codes: 0 -> vacuum, 1 -> nu (2nu for X), 2 -> mu (2mu for X)
CountClass z_count_class(int sum_a, int sum_b);
CountClass x_count_class(int sum_a, int sum_b);  // (0,0) is not an X class

struct ClassCounts {
    double sent = 0.0;
    double total = 0.0;
    double error = 0.0;
};

// Aggregated pair counts per class for one session, plus the round count the
// normalizations refer to. n_rounds counts QKD rounds only; the number of
// possible pairs is exactly half of it.
struct CountTable {
    double n_rounds = 0.0;
    std::array<ClassCounts, kNumCountClasses> classes{};

    ClassCounts& at(CountClass c) { return classes[static_cast<std::size_t>(c)]; }
    const ClassCounts& at(CountClass c) const { return classes[static_cast<std::size_t>(c)]; }
    double n_pairs() const { return n_rounds / 2.0; }
};

std::vector<std::string> validate(const CountTable& table);
void ensure_valid(const CountTable& table);

}  // namespace mpqkd
