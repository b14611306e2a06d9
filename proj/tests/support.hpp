#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include "retex/image.hpp"
#include "retex/mesh.hpp"
#include "retex/meshgen.hpp"
#include "retex/raster.hpp"
#include "retex/rng.hpp"
#include "retex/viewselect.hpp"

namespace retex::test {

inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("retex_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    if (v && *v) return v;
    // ctest sets the env; direct binary runs probe the usual build layouts
    for (const char* prefix : {"./", "./build/", "../"}) {
        std::string candidate = prefix + fallback;
        if (std::filesystem::exists(candidate)) return candidate;
    }
    return fallback;
}

// Normalized icosphere, cached per subdivision level.
inline const TriangleMesh& icosphere(int subdiv) {
    static std::map<int, TriangleMesh> cache;
    auto it = cache.find(subdiv);
    if (it == cache.end()) it = cache.emplace(subdiv, normalize_mesh(make_icosphere(subdiv))).first;
    return it->second;
}

inline UvTexture texture_from_image(const ImageF& img, bool written = true) {
    UvTexture t;
    t.resolution = img.width;
    t.rgb = img;
    t.fresh.assign(t.texel_count(), 0);
    t.written.assign(t.texel_count(), written ? 1 : 0);
    return t;
}

inline double psnr(double mse) {
    if (mse <= 0.0) return 99.0;
    return 10.0 * std::log10(1.0 / mse);
}

// Random visibility instance for the set-cover harness. Guarantees every
// positive-area face is coverable.
inline VisibilityMatrix random_visibility(int faces, int candidates, double density, Rng& rng) {
    VisibilityMatrix vis = VisibilityMatrix::empty(faces, candidates);
    vis.face_areas.assign(faces, 0.0);
    for (int f = 0; f < faces; ++f) vis.face_areas[f] = 0.1 + rng.uniform();
    for (int c = 0; c < candidates; ++c)
        for (int f = 0; f < faces; ++f)
            if (rng.uniform() < density) vis.set_bit(f, c);
    for (int f = 0; f < faces; ++f) {
        bool seen = false;
        for (int c = 0; c < candidates && !seen; ++c) seen = vis.bit(f, c);
        if (!seen) vis.set_bit(f, rng.uniform_int(0, candidates - 1));
    }
    return vis;
}

}  // namespace retex::test
