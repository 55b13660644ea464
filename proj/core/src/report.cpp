#include <mpqkd/report.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mpqkd {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void Report::section(const std::string& name) {
    if (any_section_) lines_.push_back("");
    lines_.push_back("[" + name + "]");
    any_section_ = true;
}

void Report::kv(const std::string& key, const std::string& value) {
    lines_.push_back(key + " = " + value);
}

void Report::kv(const std::string& key, const char* value) { kv(key, std::string(value)); }

void Report::kv(const std::string& key, double value) { kv(key, format_double(value)); }

void Report::kv(const std::string& key, std::uint64_t value) { kv(key, std::to_string(value)); }

void Report::kv(const std::string& key, std::int64_t value) { kv(key, std::to_string(value)); }

void Report::kv(const std::string& key, int value) {
    kv(key, static_cast<std::int64_t>(value));
}

void Report::kv(const std::string& key, bool value) {
    kv(key, std::string(value ? "true" : "false"));
}

std::string Report::str() const {
    std::string out;
    for (const auto& line : lines_) {
        out += line;
        out += '\n';
    }
    return out;
}

void save_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
}

}  // namespace mpqkd
