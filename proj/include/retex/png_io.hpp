#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retex/image.hpp"

namespace retex {

// 8-bit RGB PNG. Float images are in [0,1]; values are clamped and rounded
// on encode. flip_rows writes the last row first (texture export keeps
// v=0 at the bottom of the file so external viewers agree with the UVs).
std::vector<uint8_t> encode_png_rgb8(const ImageF& img, bool flip_rows = false);
ImageF decode_png_rgb8(const std::vector<uint8_t>& bytes, bool flip_rows = false);
void write_png_rgb8(const ImageF& img, const std::string& path, bool flip_rows = false);
ImageF read_png_rgb8(const std::string& path, bool flip_rows = false);

// 16-bit grayscale PNG, used for depth conditioning images.
std::vector<uint8_t> encode_png_gray16(const ImageF& img);
ImageF decode_png_gray16(const std::vector<uint8_t>& bytes);
void write_png_gray16(const ImageF& img, const std::string& path);
ImageF read_png_gray16(const std::string& path);

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace retex
