#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mpqkd {

// Structured key/value report. Sections and keys appear in exactly the order
// they were added, so two runs that add the same data produce byte-identical
// text regardless of thread count or platform hash seeds.
class Report {
public:
    void section(const std::string& name);
    void kv(const std::string& key, const std::string& value);
    void kv(const std::string& key, const char* value);
    void kv(const std::string& key, double value);
    void kv(const std::string& key, std::uint64_t value);
    void kv(const std::string& key, std::int64_t value);
    void kv(const std::string& key, int value);
    void kv(const std::string& key, bool value);

    std::string str() const;

private:
    std::vector<std::string> lines_;
    bool any_section_ = false;
};

// Shortest round-trippable-enough rendering used everywhere a report prints a
// real number. Centralized so goldens stay stable.
std::string format_double(double v);

void save_text(const std::string& path, const std::string& text);

}  // namespace mpqkd
