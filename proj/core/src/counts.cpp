#include <mpqkd/counts.hpp>

#include <sstream>
#include <stdexcept>

namespace mpqkd {

namespace {

constexpr std::array<std::string_view, kNumCountClasses> kClassNames = {
    "Z_A0B0",     "Z_A0Bnu",    "Z_A0Bmu",    "Z_AnuB0",     "Z_AnuBnu",   "Z_AnuBmu",
    "Z_AmuB0",    "Z_AmuBnu",   "Z_AmuBmu",   "X_A0B2nu",    "X_A0B2mu",   "X_A2nuB0",
    "X_A2nuB2nu", "X_A2nuB2mu", "X_A2muB0",   "X_A2muB2nu",  "X_A2muB2mu",
};

}  // namespace

std::string_view to_string(CountClass c) {
    return kClassNames[static_cast<std::size_t>(c)];
}

std::optional<CountClass> count_class_from_string(std::string_view name) {
    for (int i = 0; i < kNumCountClasses; ++i)
        if (kClassNames[static_cast<std::size_t>(i)] == name) return static_cast<CountClass>(i);
    return std::nullopt;
}

CountClass z_count_class(int sum_a, int sum_b) {
    if (sum_a < 0 || sum_a > 2 || sum_b < 0 || sum_b > 2)
        throw std::invalid_argument("Z class sum codes must lie in {0, 1, 2}");
    return static_cast<CountClass>(sum_a * 3 + sum_b);
}

CountClass x_count_class(int sum_a, int sum_b) {
    if (sum_a < 0 || sum_a > 2 || sum_b < 0 || sum_b > 2 || (sum_a == 0 && sum_b == 0))
        throw std::invalid_argument("X class sum codes must lie in {0, 1, 2}, not both 0");
    return static_cast<CountClass>(9 + sum_a * 3 + sum_b - 1);
}

std::vector<std::string> validate(const CountTable& table) {
    std::vector<std::string> issues;
    if (!(table.n_rounds > 0.0)) issues.emplace_back("n_rounds must be positive");
    for (int i = 0; i < kNumCountClasses; ++i) {
        const auto& c = table.classes[static_cast<std::size_t>(i)];
        const auto name = kClassNames[static_cast<std::size_t>(i)];
        auto complain = [&](const char* what) {
            issues.push_back(std::string(name) + ": " + what);
        };
        if (c.sent < 0.0 || c.total < 0.0 || c.error < 0.0) complain("counts must be non-negative");
        if (c.error > c.total) complain("error count exceeds total count");
        if (c.sent > 0.0 && c.total > c.sent) complain("total count exceeds sent count");
        if (c.sent == 0.0 && c.total > 0.0) complain("detected pairs in a class never sent");
    }
    return issues;
}

void ensure_valid(const CountTable& table) {
    auto issues = validate(table);
    if (issues.empty()) return;
    std::ostringstream os;
    os << "invalid count table:";
    for (const auto& s : issues) os << "\n  - " << s;
    throw std::invalid_argument(os.str());
}

}  // namespace mpqkd
