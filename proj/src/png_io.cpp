#include "retex/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "retex/errors.hpp"

namespace retex {

namespace {

struct MemReader {
    const std::vector<uint8_t>* bytes;
    size_t pos = 0;
};

void mem_read_fn(png_structp png, png_bytep out, png_size_t n) {
    auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
    if (r->pos + n > r->bytes->size()) png_error(png, "png: truncated stream");
    std::memcpy(out, r->bytes->data() + r->pos, n);
    r->pos += n;
}

void mem_write_fn(png_structp png, png_bytep data, png_size_t n) {
    auto* v = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
    v->insert(v->end(), data, data + n);
}

void mem_flush_fn(png_structp) {}

uint8_t quant8(float v) {
    float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<uint8_t>(std::lround(c * 255.0f));
}

uint16_t quant16(float v) {
    float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<uint16_t>(std::lround(c * 65535.0f));
}

std::vector<uint8_t> encode_png(const ImageF& img, int bit_depth, int color_type, bool flip_rows) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw ParseError("png: failed to create write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw ParseError("png: failed to create info struct");
    }

    std::vector<uint8_t> out;
    std::vector<std::vector<uint8_t>> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ParseError("png: encode failed");
    }

    png_set_write_fn(png, &out, mem_write_fn, mem_flush_fn);
    png_set_IHDR(png, info, img.width, img.height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    int ch = img.channels;
    size_t row_bytes = static_cast<size_t>(img.width) * ch * (bit_depth / 8);
    rows.assign(img.height, std::vector<uint8_t>(row_bytes));
    for (int y = 0; y < img.height; ++y) {
        uint8_t* dst = rows[y].data();
        const float* src = img.px(0, y);
        if (bit_depth == 8) {
            for (int i = 0; i < img.width * ch; ++i) dst[i] = quant8(src[i]);
        } else {
            for (int i = 0; i < img.width * ch; ++i) {
                uint16_t q = quant16(src[i]);
                dst[2 * i] = static_cast<uint8_t>(q >> 8);  // PNG is big-endian
                dst[2 * i + 1] = static_cast<uint8_t>(q & 0xff);
            }
        }
    }
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, rows[flip_rows ? img.height - 1 - y : y].data());
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
    return out;
}

}  // namespace

std::vector<uint8_t> encode_png_rgb8(const ImageF& img, bool flip_rows) {
    if (img.channels != 3) throw ShapeMismatch("png: rgb encode expects 3 channels");
    return encode_png(img, 8, PNG_COLOR_TYPE_RGB, flip_rows);
}

std::vector<uint8_t> encode_png_gray16(const ImageF& img) {
    if (img.channels != 1) throw ShapeMismatch("png: gray16 encode expects 1 channel");
    return encode_png(img, 16, PNG_COLOR_TYPE_GRAY, false);
}

ImageF decode_png_rgb8(const std::vector<uint8_t>& bytes, bool flip_rows) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw ParseError("png: failed to create read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ParseError("png: failed to create info struct");
    }
    std::vector<std::vector<uint8_t>> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("png: decode failed");
    }

    MemReader reader{&bytes};
    png_set_read_fn(png, &reader, mem_read_fn);
    png_read_info(png, info);

    // Normalize whatever came in to 8-bit RGB.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    int w = static_cast<int>(png_get_image_width(png, info));
    int h = static_cast<int>(png_get_image_height(png, info));
    size_t row_bytes = png_get_rowbytes(png, info);
    rows.assign(h, std::vector<uint8_t>(row_bytes));
    for (int y = 0; y < h; ++y) png_read_row(png, rows[y].data(), nullptr);
    png_read_end(png, info);
    png_destroy_read_struct(&png, &info, nullptr);

    ImageF img(w, h, 3);
    for (int y = 0; y < h; ++y) {
        const uint8_t* src = rows[flip_rows ? h - 1 - y : y].data();
        float* dst = img.px(0, y);
        for (int i = 0; i < w * 3; ++i) dst[i] = static_cast<float>(src[i]) / 255.0f;
    }
    return img;
}

ImageF decode_png_gray16(const std::vector<uint8_t>& bytes) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw ParseError("png: failed to create read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ParseError("png: failed to create info struct");
    }
    std::vector<std::vector<uint8_t>> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("png: decode failed");
    }

    MemReader reader{&bytes};
    png_set_read_fn(png, &reader, mem_read_fn);
    png_read_info(png, info);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
        png_get_bit_depth(png, info) != 16)
        png_error(png, "expected 16-bit grayscale");
    png_read_update_info(png, info);

    int w = static_cast<int>(png_get_image_width(png, info));
    int h = static_cast<int>(png_get_image_height(png, info));
    size_t row_bytes = png_get_rowbytes(png, info);
    rows.assign(h, std::vector<uint8_t>(row_bytes));
    for (int y = 0; y < h; ++y) png_read_row(png, rows[y].data(), nullptr);
    png_read_end(png, info);
    png_destroy_read_struct(&png, &info, nullptr);

    ImageF img(w, h, 1);
    for (int y = 0; y < h; ++y) {
        const uint8_t* src = rows[y].data();
        float* dst = img.px(0, y);
        for (int x = 0; x < w; ++x) {
            uint16_t v = static_cast<uint16_t>((src[2 * x] << 8) | src[2 * x + 1]);
            dst[x] = static_cast<float>(v) / 65535.0f;
        }
    }
    return img;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open file: " + path);
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open file for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw ConfigError("short write: " + path);
}

void write_png_rgb8(const ImageF& img, const std::string& path, bool flip_rows) {
    write_file_bytes(path, encode_png_rgb8(img, flip_rows));
}

ImageF read_png_rgb8(const std::string& path, bool flip_rows) {
    return decode_png_rgb8(read_file_bytes(path), flip_rows);
}

void write_png_gray16(const ImageF& img, const std::string& path) {
    write_file_bytes(path, encode_png_gray16(img));
}

ImageF read_png_gray16(const std::string& path) {
    return decode_png_gray16(read_file_bytes(path));
}

}  // namespace retex
