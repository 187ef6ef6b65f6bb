#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace subcam {

// Bad configuration, bad input files, bad CLI usage. The CLI maps this to
// exit code 1; every other exception maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Doubles <-> base64 of their little-endian byte representation.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(const std::string& text, std::size_t expected_count);

// Splits one CSV line on commas. No quoting: ids and numbers only.
std::vector<std::string> split_csv_line(const std::string& line);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string shape_to_string(std::span<const int> shape);

}  // namespace subcam
