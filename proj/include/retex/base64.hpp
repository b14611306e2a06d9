#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace retex {

std::string base64_encode(const std::vector<uint8_t>& bytes);

// Throws ParseError on characters outside the base64 alphabet or bad padding.
std::vector<uint8_t> base64_decode(const std::string& text);

}  // namespace retex
