#include <mpqkd/table_io.hpp>

#include <mpqkd/config.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace mpqkd {

namespace {

std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool parse_number(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0';
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

CountTable parse_count_table(const std::string& text, const std::string& origin) {
    CountTable table;
    std::vector<std::string> issues;
    std::array<bool, kNumCountClasses> seen{};
    bool have_rounds = false;
    bool have_header = false;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = strip(raw);
        auto fail = [&](const std::string& what) {
            issues.push_back("line " + std::to_string(lineno) + ": " + what);
        };
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string directive = strip(line.substr(1));
            if (directive.rfind("n_rounds=", 0) == 0) {
                double v = 0.0;
                if (!parse_number(directive.substr(9), v))
                    fail("malformed n_rounds directive");
                else {
                    table.n_rounds = v;
                    have_rounds = true;
                }
            }
            continue;
        }
        if (!have_header) {
            if (line != "class,sent,total,error")
                fail("expected header 'class,sent,total,error'");
            have_header = true;
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 4) {
            fail("expected 4 comma-separated fields");
            continue;
        }
        const auto cls = count_class_from_string(strip(fields[0]));
        if (!cls) {
            fail("unknown class '" + strip(fields[0]) + "'");
            continue;
        }
        if (seen[static_cast<std::size_t>(*cls)]) {
            fail("duplicate class '" + strip(fields[0]) + "'");
            continue;
        }
        seen[static_cast<std::size_t>(*cls)] = true;
        ClassCounts& c = table.at(*cls);
        if (!parse_number(strip(fields[1]), c.sent) || !parse_number(strip(fields[2]), c.total) ||
            !parse_number(strip(fields[3]), c.error))
            fail("malformed numeric field");
    }

    if (!have_header) issues.push_back("missing header row (empty table?)");
    if (!have_rounds) issues.push_back("missing '# n_rounds=' directive");
    for (int i = 0; i < kNumCountClasses; ++i)
        if (!seen[static_cast<std::size_t>(i)])
            issues.push_back("missing class " +
                             std::string(to_string(static_cast<CountClass>(i))));
    if (issues.empty())
        for (const auto& s : validate(table)) issues.push_back(s);

    if (!issues.empty()) {
        std::ostringstream os;
        os << origin << ": invalid count table:";
        for (const auto& s : issues) os << "\n  - " << s;
        throw ConfigError(os.str());
    }
    return table;
}

CountTable load_count_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open count table: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_count_table(buf.str(), path);
}

std::string serialize_count_table(const CountTable& table) {
    std::ostringstream os;
    os << "# n_rounds=" << full_precision(table.n_rounds) << "\n";
    os << "class,sent,total,error\n";
    for (int i = 0; i < kNumCountClasses; ++i) {
        const auto& c = table.classes[static_cast<std::size_t>(i)];
        os << to_string(static_cast<CountClass>(i)) << ',' << full_precision(c.sent) << ','
           << full_precision(c.total) << ',' << full_precision(c.error) << "\n";
    }
    return os.str();
}

void save_count_table(const std::string& path, const CountTable& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write count table: " + path);
    out << serialize_count_table(table);
}

}  // namespace mpqkd
