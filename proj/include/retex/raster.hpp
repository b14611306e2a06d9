#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "retex/camera.hpp"
#include "retex/image.hpp"
#include "retex/mesh.hpp"

namespace retex {

inline constexpr int kNoFace = -1;

// Square RGB texture in UV space plus per-texel bookkeeping. `written`
// means the texel ever received content; `fresh` means it was updated
// during the current optimization step. fresh implies written.
struct UvTexture {
    int resolution = 0;
    ImageF rgb;                    // 3 channels in [0,1]
    std::vector<uint8_t> fresh;    // per texel
    std::vector<uint8_t> written;  // per texel

    static UvTexture blank(int resolution);
    void clear_fresh() { std::fill(fresh.begin(), fresh.end(), 0); }
    size_t texel_count() const { return static_cast<size_t>(resolution) * resolution; }
    size_t texel_index(int x, int y) const { return static_cast<size_t>(y) * resolution + x; }
};

// Output of the forward render R(.). Depth is camera-space distance
// (+inf on background); uv is valid exactly where coverage is set.
struct FrameBuffer {
    int width = 0, height = 0;
    ImageF color;                 // 3ch
    std::vector<float> depth;     // per pixel
    std::vector<int32_t> face_id; // kNoFace on background
    ImageF uv;                    // 2ch, in [0,1]
    std::vector<uint8_t> coverage;
    int tex_resolution = 0;       // resolution of the texture that was bound

    size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

// Perspective software rasterizer: z-buffered with strict < and face-id
// tie-break (lower id wins), back-face culled, perspective-correct UVs,
// nearest-neighbor texture lookup. Deterministic under any triangle order.
FrameBuffer rasterize(const TriangleMesh& mesh, const UvTexture& texture, const Camera& camera);

// Depth-only render normalized over the foreground: nearest point -> 1,
// farthest foreground point -> 0, background 0. Constant-depth scenes
// map to 1.
ImageF render_depth(const TriangleMesh& mesh, const Camera& camera);

// Per-texel owner face and surface geometry, from rasterizing the UV atlas.
// Face corner ids and uvs are kept so the projector can classify atlas cuts
// (3D-adjacent faces whose uvs disagree at a shared vertex).
struct TexelSurfaceTable {
    int resolution = 0;
    std::vector<int32_t> face;  // kNoFace when no chart covers the texel
    std::vector<Vec3> point;
    std::vector<Vec3> normal;
    std::vector<Tri> face_corners;
    std::vector<std::array<Vec2, 3>> face_uvs;
    int chart_overlap_texels = 0;  // texels strictly interior to >1 UV triangle
};

TexelSurfaceTable build_texel_table(const TriangleMesh& mesh, int resolution);

struct OverlapMasks {
    std::vector<uint8_t> overlap;        // covered pixel over a fresh texel
    std::vector<uint8_t> uninitialized;  // covered pixel over a never-written texel
};

// Throws ResolutionMismatch when fb was rendered with a different texture
// resolution.
OverlapMasks overlap_mask(const FrameBuffer& fb, const UvTexture& texture);

enum class SampleMode { Nearest, Bilinear };

// Inverse projection R^(.): splat view-space image colors back onto texels.
// A texel updates iff its surface point projects inside the image, its
// depth matches the frame buffer within depth_eps (it was actually seen),
// and the view direction is within max_angle_deg of the surface normal.
// Updated texels are marked fresh and written.
void project_to_texture(const ImageF& image, const FrameBuffer& fb, const TexelSurfaceTable& table,
                        const Camera& camera, UvTexture& texture,
                        SampleMode mode = SampleMode::Bilinear, double max_angle_deg = 45.0,
                        double depth_eps = 1e-3);

// Bilinear upsample. Written texels never bleed unwritten (background)
// color: weights renormalize over written contributors. The written mask
// dilates conservatively; fresh is cleared.
UvTexture upsample(const UvTexture& texture, int new_resolution);

}  // namespace retex
