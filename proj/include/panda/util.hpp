#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace panda {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Reads a whole file; throws panda::Error("IoError") when it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Splits on '\n', dropping a trailing '\r' from each line. A final empty
/// line (from a terminating newline) is not returned.
std::vector<std::string> split_lines(std::string_view text);

std::string trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with(std::string_view s, std::string_view prefix);

/// Uniform integer in [0, bound) from raw generator output (rejection
/// sampling). Unlike std::uniform_int_distribution the sequence is the same
/// on every standard library.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Seeded Fisher-Yates permutation of [0, n).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace panda
