#include <doctest.h>

#include "retex/base64.hpp"
#include "retex/config.hpp"
#include "retex/errors.hpp"
#include "retex/png_io.hpp"
#include "retex/rng.hpp"
#include "support.hpp"

using namespace retex;

TEST_CASE("base64 round trip and rfc vectors") {
    CHECK(base64_encode({}) == "");
    CHECK(base64_encode({'f'}) == "Zg==");
    CHECK(base64_encode({'f', 'o'}) == "Zm8=");
    CHECK(base64_encode({'f', 'o', 'o'}) == "Zm9v");
    CHECK(base64_encode({'f', 'o', 'o', 'b', 'a', 'r'}) == "Zm9vYmFy");

    Rng rng(7);
    for (int len : {1, 2, 3, 63, 64, 65, 1000}) {
        std::vector<uint8_t> bytes(len);
        for (auto& b : bytes) b = static_cast<uint8_t>(rng.next_u64());
        CHECK(base64_decode(base64_encode(bytes)) == bytes);
    }
    CHECK_THROWS_AS(base64_decode("a!"), ParseError);
    CHECK_THROWS_AS(base64_decode("Zg==Zg"), ParseError);
}

TEST_CASE("rng determinism and moments") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng rng(1);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    CHECK(std::fabs(mean) < 0.01);
    CHECK(std::fabs(var - 1.0) < 0.02);

    // forks are decorrelated from the parent stream
    Rng c(9);
    Rng d = c.fork(1), e = c.fork(2);
    CHECK(d.next_u64() != e.next_u64());
}

TEST_CASE("png rgb8 round trip is exact at 8-bit resolution") {
    ImageF img(13, 9, 3);
    Rng rng(3);
    for (auto& v : img.data) v = static_cast<float>(rng.uniform());
    // snap to the 8-bit grid so the round trip is exact
    for (auto& v : img.data) v = std::round(v * 255.0f) / 255.0f;

    ImageF back = decode_png_rgb8(encode_png_rgb8(img));
    REQUIRE(back.same_shape(img));
    CHECK(max_abs_diff(img, back) < 1e-6);

    ImageF flipped = decode_png_rgb8(encode_png_rgb8(img, true), true);
    CHECK(max_abs_diff(img, flipped) < 1e-6);
}

TEST_CASE("png gray16 depth round trip") {
    ImageF img(17, 5, 1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            *img.px(x, y) = std::round((x * 0.031f + y * 0.11f) / 2.0f * 65535.0f) / 65535.0f;
    ImageF back = decode_png_gray16(encode_png_gray16(img));
    REQUIRE(back.same_shape(img));
    CHECK(max_abs_diff(img, back) < 1.0 / 65535.0);
}

TEST_CASE("png encoding is byte deterministic") {
    ImageF img(32, 32, 3);
    Rng rng(11);
    for (auto& v : img.data) v = static_cast<float>(rng.uniform());
    CHECK(encode_png_rgb8(img) == encode_png_rgb8(img));
}

TEST_CASE("config parse, lookup, round trip") {
    const char* text =
        "# comment\n"
        "[input]\n"
        "mesh = a.obj\n"
        "prompt = a wooden chair, worn  ; trailing comment\n"
        "\n"
        "[pipeline]\n"
        "steps = 5\n"
        "slope = 2.5\n";
    ConfigMap m = ConfigMap::parse(text);
    CHECK(m.get("input", "mesh", "") == "a.obj");
    CHECK(m.get("input", "prompt", "") == "a wooden chair, worn");
    CHECK(m.get_int("pipeline", "steps", 0) == 5);
    CHECK(m.get_double("pipeline", "slope", 0.0) == 2.5);
    CHECK(m.get("pipeline", "missing", "dflt") == "dflt");
    CHECK_THROWS_AS(m.require("pipeline", "missing"), ConfigError);
    CHECK_THROWS_AS(m.get_int("input", "mesh", 0), ConfigError);

    ConfigMap again = ConfigMap::parse(m.serialize());
    CHECK(again.serialize() == m.serialize());

    CHECK_THROWS_AS(ConfigMap::parse("[broken\n"), ConfigError);
    CHECK_THROWS_AS(ConfigMap::parse("novalue\n"), ConfigError);
}
