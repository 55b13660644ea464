#pragma once

#include <mpqkd/counts.hpp>

#include <string>

namespace mpqkd {

// Count tables travel as delimited text with one row per intensity class:
//
//   # n_rounds=<N>
//   class,sent,total,error
//   Z_A0B0,<sent>,<total>,<error>
//   ...
//
// The n_rounds directive carries the session size the sent columns refer
// to. Other '#' lines are comments. All 17 classes must appear exactly
// once; serialization emits them in canonical order with full precision,
// so serialize -> parse is the identity.
CountTable parse_count_table(const std::string& text, const std::string& origin = "<string>");
CountTable load_count_table(const std::string& path);
std::string serialize_count_table(const CountTable& table);
void save_count_table(const std::string& path, const CountTable& table);

}  // namespace mpqkd
