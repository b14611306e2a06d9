#include "retex/raster.hpp"

#include <algorithm>
#include <cmath>

#include "retex/errors.hpp"

namespace retex {

namespace {

struct ClipVertex {
    Vec4 clip;  // clip.w is camera-space depth
    Vec2 uv;
};

struct ScreenVertex {
    double x, y;
    double inv_w;
    double u_over_w, v_over_w;
};

struct RasterTri {
    ScreenVertex v[3];
    int face;
    int y_min, y_max;  // inclusive pixel rows
    int x_min, x_max;
    double area;       // signed, negative for front faces
};

double edge_fn(double ax, double ay, double bx, double by, double px, double py) {
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Clip a polygon against the near plane (clip.w >= near). Attributes are
// affine along edges, so straight lerp is exact.
int clip_near(const ClipVertex* in, int n, ClipVertex* out, double near_w) {
    int m = 0;
    for (int i = 0; i < n; ++i) {
        const ClipVertex& a = in[i];
        const ClipVertex& b = in[(i + 1) % n];
        bool ain = a.clip.w >= near_w, bin = b.clip.w >= near_w;
        if (ain) out[m++] = a;
        if (ain != bin) {
            double s = (near_w - a.clip.w) / (b.clip.w - a.clip.w);
            ClipVertex c;
            c.clip = {a.clip.x + s * (b.clip.x - a.clip.x), a.clip.y + s * (b.clip.y - a.clip.y),
                      a.clip.z + s * (b.clip.z - a.clip.z), near_w};
            c.uv = {a.uv.x + s * (b.uv.x - a.uv.x), a.uv.y + s * (b.uv.y - a.uv.y)};
            out[m++] = c;
        }
    }
    return m;
}

ScreenVertex to_screen(const ClipVertex& cv, int w, int h) {
    double inv_w = 1.0 / cv.clip.w;
    ScreenVertex s;
    s.x = (cv.clip.x * inv_w + 1.0) * 0.5 * w;
    s.y = (1.0 - cv.clip.y * inv_w) * 0.5 * h;
    s.inv_w = inv_w;
    s.u_over_w = cv.uv.x * inv_w;
    s.v_over_w = cv.uv.y * inv_w;
    return s;
}

// Setup pass: transform, clip, cull, and compute pixel bounds for every
// screen triangle. Front faces come out with negative signed area in this
// screen convention (y down).
std::vector<RasterTri> setup_triangles(const TriangleMesh& mesh, const CameraMatrices& cm, int w,
                                       int h) {
    std::vector<RasterTri> tris;
    tris.reserve(mesh.face_count());
    for (size_t fi = 0; fi < mesh.face_count(); ++fi) {
        const Tri& t = mesh.triangles[fi];
        ClipVertex poly[8], clipped[8];
        for (int k = 0; k < 3; ++k) {
            poly[k].clip = cm.view_proj.mul_point(mesh.vertices[t.v[k]]);
            poly[k].uv = mesh.corner_uvs[fi][k];
        }
        int n = clip_near(poly, 3, clipped, kNearPlane);
        for (int k = 2; k < n; ++k) {  // fan
            RasterTri rt;
            rt.v[0] = to_screen(clipped[0], w, h);
            rt.v[1] = to_screen(clipped[k - 1], w, h);
            rt.v[2] = to_screen(clipped[k], w, h);
            rt.face = static_cast<int>(fi);
            rt.area = edge_fn(rt.v[0].x, rt.v[0].y, rt.v[1].x, rt.v[1].y, rt.v[2].x, rt.v[2].y);
            if (rt.area >= 0.0) continue;  // back-facing or degenerate
            double xs[3] = {rt.v[0].x, rt.v[1].x, rt.v[2].x};
            double ys[3] = {rt.v[0].y, rt.v[1].y, rt.v[2].y};
            rt.x_min = std::max(0, static_cast<int>(std::floor(*std::min_element(xs, xs + 3) - 0.5)));
            rt.x_max = std::min(w - 1, static_cast<int>(std::ceil(*std::max_element(xs, xs + 3))));
            rt.y_min = std::max(0, static_cast<int>(std::floor(*std::min_element(ys, ys + 3) - 0.5)));
            rt.y_max = std::min(h - 1, static_cast<int>(std::ceil(*std::max_element(ys, ys + 3))));
            if (rt.x_min > rt.x_max || rt.y_min > rt.y_max) continue;
            tris.push_back(rt);
        }
    }
    return tris;
}

void rasterize_rows(const std::vector<RasterTri>& tris, FrameBuffer& fb, const UvTexture* texture,
                    int y_begin, int y_end) {
    for (const RasterTri& rt : tris) {
        int y0 = std::max(rt.y_min, y_begin);
        int y1 = std::min(rt.y_max, y_end - 1);
        for (int y = y0; y <= y1; ++y) {
            double py = y + 0.5;
            for (int x = rt.x_min; x <= rt.x_max; ++x) {
                double px = x + 0.5;
                double e0 = edge_fn(rt.v[1].x, rt.v[1].y, rt.v[2].x, rt.v[2].y, px, py);
                double e1 = edge_fn(rt.v[2].x, rt.v[2].y, rt.v[0].x, rt.v[0].y, px, py);
                double e2 = edge_fn(rt.v[0].x, rt.v[0].y, rt.v[1].x, rt.v[1].y, px, py);
                if (e0 > 0.0 || e1 > 0.0 || e2 > 0.0) continue;  // front faces wind negative
                double l0 = e0 / rt.area, l1 = e1 / rt.area, l2 = e2 / rt.area;
                double inv_w_p = l0 * rt.v[0].inv_w + l1 * rt.v[1].inv_w + l2 * rt.v[2].inv_w;
                if (inv_w_p <= 0.0) continue;
                float z = static_cast<float>(1.0 / inv_w_p);
                size_t idx = fb.index(x, y);
                if (z > fb.depth[idx]) continue;
                if (z == fb.depth[idx] && rt.face >= fb.face_id[idx]) continue;
                double u = (l0 * rt.v[0].u_over_w + l1 * rt.v[1].u_over_w + l2 * rt.v[2].u_over_w) /
                           inv_w_p;
                double v = (l0 * rt.v[0].v_over_w + l1 * rt.v[1].v_over_w + l2 * rt.v[2].v_over_w) /
                           inv_w_p;
                u = std::clamp(u, 0.0, 1.0);
                v = std::clamp(v, 0.0, 1.0);
                fb.depth[idx] = z;
                fb.face_id[idx] = rt.face;
                fb.coverage[idx] = 1;
                float* uvp = fb.uv.px(x, y);
                uvp[0] = static_cast<float>(u);
                uvp[1] = static_cast<float>(v);
                if (texture) {
                    int r = texture->resolution;
                    int tx = std::clamp(static_cast<int>(u * r), 0, r - 1);
                    int ty = std::clamp(static_cast<int>(v * r), 0, r - 1);
                    const float* src = texture->rgb.px(tx, ty);
                    float* dst = fb.color.px(x, y);
                    dst[0] = src[0];
                    dst[1] = src[1];
                    dst[2] = src[2];
                }
            }
        }
    }
}

FrameBuffer rasterize_impl(const TriangleMesh& mesh, const UvTexture* texture,
                           const Camera& camera) {
    const int w = camera.image_size, h = camera.image_size;
    FrameBuffer fb;
    fb.width = w;
    fb.height = h;
    fb.color = ImageF(w, h, 3, 0.0f);
    fb.depth.assign(static_cast<size_t>(w) * h, std::numeric_limits<float>::infinity());
    fb.face_id.assign(static_cast<size_t>(w) * h, kNoFace);
    fb.uv = ImageF(w, h, 2, 0.0f);
    fb.coverage.assign(static_cast<size_t>(w) * h, 0);
    fb.tex_resolution = texture ? texture->resolution : 0;

    CameraMatrices cm = camera_matrices(camera);
    std::vector<RasterTri> tris = setup_triangles(mesh, cm, w, h);

    // Disjoint row bands; every pixel has exactly one writer, so the result
    // matches the serial render.
#pragma omp parallel for schedule(static)
    for (int band = 0; band < 8; ++band) {
        int y0 = h * band / 8;
        int y1 = h * (band + 1) / 8;
        rasterize_rows(tris, fb, texture, y0, y1);
    }
    return fb;
}

}  // namespace

UvTexture UvTexture::blank(int resolution) {
    UvTexture t;
    t.resolution = resolution;
    t.rgb = ImageF(resolution, resolution, 3, 0.0f);
    t.fresh.assign(t.texel_count(), 0);
    t.written.assign(t.texel_count(), 0);
    return t;
}

FrameBuffer rasterize(const TriangleMesh& mesh, const UvTexture& texture, const Camera& camera) {
    return rasterize_impl(mesh, &texture, camera);
}

ImageF render_depth(const TriangleMesh& mesh, const Camera& camera) {
    FrameBuffer fb = rasterize_impl(mesh, nullptr, camera);
    float z_min = std::numeric_limits<float>::infinity();
    float z_max = -std::numeric_limits<float>::infinity();
    for (size_t i = 0; i < fb.depth.size(); ++i) {
        if (!fb.coverage[i]) continue;
        z_min = std::min(z_min, fb.depth[i]);
        z_max = std::max(z_max, fb.depth[i]);
    }
    ImageF out(fb.width, fb.height, 1, 0.0f);
    if (z_min > z_max) return out;  // empty scene
    float range = z_max - z_min;
    for (size_t i = 0; i < fb.depth.size(); ++i) {
        if (!fb.coverage[i]) continue;
        out.data[i] = range > 0.0f ? (z_max - fb.depth[i]) / range : 1.0f;
    }
    return out;
}

TexelSurfaceTable build_texel_table(const TriangleMesh& mesh, int resolution) {
    TexelSurfaceTable table;
    table.resolution = resolution;
    size_t n = static_cast<size_t>(resolution) * resolution;
    table.face.assign(n, kNoFace);
    table.point.assign(n, Vec3{});
    table.normal.assign(n, Vec3{});
    table.face_corners = mesh.triangles;
    table.face_uvs = mesh.corner_uvs;

    // Face-ascending order makes the lowest face id win chart overlaps.
    for (size_t fi = 0; fi < mesh.face_count(); ++fi) {
        const auto& uvs = mesh.corner_uvs[fi];
        double ax = uvs[0].x * resolution, ay = uvs[0].y * resolution;
        double bx = uvs[1].x * resolution, by = uvs[1].y * resolution;
        double cx = uvs[2].x * resolution, cy = uvs[2].y * resolution;
        double area = edge_fn(ax, ay, bx, by, cx, cy);
        if (std::fabs(area) < 1e-12) continue;  // degenerate chart

        int x0 = std::max(0, static_cast<int>(std::floor(std::min({ax, bx, cx}) - 0.5)));
        int x1 = std::min(resolution - 1, static_cast<int>(std::ceil(std::max({ax, bx, cx}))));
        int y0 = std::max(0, static_cast<int>(std::floor(std::min({ay, by, cy}) - 0.5)));
        int y1 = std::min(resolution - 1, static_cast<int>(std::ceil(std::max({ay, by, cy}))));

        const Tri& t = mesh.triangles[fi];
        const Vec3& pa = mesh.vertices[t.v[0]];
        const Vec3& pb = mesh.vertices[t.v[1]];
        const Vec3& pc = mesh.vertices[t.v[2]];
        const Vec3& nrm = mesh.face_normals[fi];

        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                double px = x + 0.5, py = y + 0.5;
                double l0 = edge_fn(bx, by, cx, cy, px, py) / area;
                double l1 = edge_fn(cx, cy, ax, ay, px, py) / area;
                double l2 = edge_fn(ax, ay, bx, by, px, py) / area;
                const double eps = 1e-9;
                if (l0 < -eps || l1 < -eps || l2 < -eps) continue;
                size_t idx = static_cast<size_t>(y) * resolution + x;
                if (table.face[idx] != kNoFace) {
                    if (l0 > 1e-6 && l1 > 1e-6 && l2 > 1e-6) table.chart_overlap_texels++;
                    continue;
                }
                table.face[idx] = static_cast<int>(fi);
                table.point[idx] = pa * l0 + pb * l1 + pc * l2;
                table.normal[idx] = nrm;
            }
        }
    }
    return table;
}

OverlapMasks overlap_mask(const FrameBuffer& fb, const UvTexture& texture) {
    if (fb.tex_resolution != texture.resolution)
        throw ResolutionMismatch("overlap_mask: frame buffer was rendered at texture resolution " +
                                 std::to_string(fb.tex_resolution) + ", texture is " +
                                 std::to_string(texture.resolution));
    size_t n = fb.depth.size();
    OverlapMasks masks;
    masks.overlap.assign(n, 0);
    masks.uninitialized.assign(n, 0);
    int r = texture.resolution;
    for (int y = 0; y < fb.height; ++y) {
        for (int x = 0; x < fb.width; ++x) {
            size_t idx = fb.index(x, y);
            if (!fb.coverage[idx]) continue;
            const float* uv = fb.uv.px(x, y);
            int tx = std::clamp(static_cast<int>(uv[0] * r), 0, r - 1);
            int ty = std::clamp(static_cast<int>(uv[1] * r), 0, r - 1);
            size_t ti = texture.texel_index(tx, ty);
            masks.overlap[idx] = texture.fresh[ti];
            masks.uninitialized[idx] = !texture.written[ti];
        }
    }
    return masks;
}

namespace {

// Local uv footprint of one pixel step, per axis the nearer covered
// neighbor (an atlas cut on one side would inflate it).
double uv_footprint(const FrameBuffer& fb, int px, int py) {
    const float* uv = fb.uv.px(px, py);
    double best = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
        double axis_min = -1.0;
        for (int d = -1; d <= 1; d += 2) {
            int nx = axis == 0 ? px + d : px;
            int ny = axis == 0 ? py : py + d;
            if (nx < 0 || nx >= fb.width || ny < 0 || ny >= fb.height) continue;
            if (!fb.coverage[fb.index(nx, ny)]) continue;
            const float* nuv = fb.uv.px(nx, ny);
            double step = std::max(std::fabs(double(nuv[0]) - uv[0]),
                                   std::fabs(double(nuv[1]) - uv[1]));
            if (axis_min < 0.0 || step < axis_min) axis_min = step;
        }
        best = std::max(best, std::max(axis_min, 0.0));
    }
    return best;
}

// Is a pixel that shows face g a valid color source for a texel owned by
// face f? Same face: yes. Faces touching in 3D: only when their uvs agree
// at every shared vertex (otherwise the pixel sits across an atlas cut).
// Untouching faces fall back to the caller's uv-distance guard.
enum class ChartRelation { Same, Continuous, Cut, Distant };

ChartRelation classify_pair(const TexelSurfaceTable& table, int f, int g) {
    if (f == g) return ChartRelation::Same;
    const Tri& tf = table.face_corners[f];
    const Tri& tg = table.face_corners[g];
    bool touching = false;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (tf.v[i] != tg.v[j]) continue;
            touching = true;
            const Vec2& a = table.face_uvs[f][i];
            const Vec2& b = table.face_uvs[g][j];
            if (std::fabs(a.x - b.x) > 1e-9 || std::fabs(a.y - b.y) > 1e-9)
                return ChartRelation::Cut;
        }
    }
    return touching ? ChartRelation::Continuous : ChartRelation::Distant;
}

}  // namespace

void project_to_texture(const ImageF& image, const FrameBuffer& fb, const TexelSurfaceTable& table,
                        const Camera& camera, UvTexture& texture, SampleMode mode,
                        double max_angle_deg, double depth_eps) {
    if (image.width != fb.width || image.height != fb.height)
        throw ShapeMismatch("project_to_texture: image does not match frame buffer");
    if (table.resolution != texture.resolution)
        throw ResolutionMismatch("project_to_texture: texel table resolution mismatch");

    CameraMatrices cm = camera_matrices(camera);
    const double cos_max = std::cos(deg_to_rad(max_angle_deg));
    const int r = texture.resolution;

#pragma omp parallel for schedule(static)
    for (int ty = 0; ty < r; ++ty) {
        for (int tx = 0; tx < r; ++tx) {
            size_t ti = texture.texel_index(tx, ty);
            if (table.face[ti] == kNoFace) continue;
            const Vec3& p = table.point[ti];
            const Vec3& n = table.normal[ti];

            Vec3 to_cam = cm.position - p;
            double dist = norm(to_cam);
            if (dist <= 0.0 || dot(n, to_cam) / dist <= cos_max) continue;

            Vec4 clip = cm.view_proj.mul_point(p);
            if (clip.w < kNearPlane) continue;
            double sx = (clip.x / clip.w + 1.0) * 0.5 * fb.width;
            double sy = (1.0 - clip.y / clip.w) * 0.5 * fb.height;
            int px = static_cast<int>(std::floor(sx));
            int py = static_cast<int>(std::floor(sy));
            if (px < 0 || px >= fb.width || py < 0 || py >= fb.height) continue;

            size_t pi = fb.index(px, py);
            if (!fb.coverage[pi]) continue;
            if (std::fabs(static_cast<double>(fb.depth[pi]) - clip.w) > depth_eps) continue;

            // A pixel across an atlas cut shows another chart and must not
            // bleed into this texel.
            ChartRelation rel = classify_pair(table, table.face[ti], fb.face_id[pi]);
            if (rel == ChartRelation::Cut) continue;
            if (rel == ChartRelation::Distant) {
                const float* uv_p = fb.uv.px(px, py);
                double limit = 3.0 * uv_footprint(fb, px, py) + 2.5 / r;
                if (std::fabs(uv_p[0] - (tx + 0.5) / r) > limit ||
                    std::fabs(uv_p[1] - (ty + 0.5) / r) > limit)
                    continue;
            }

            float rgb[3];
            if (mode == SampleMode::Bilinear) {
                sample_bilinear(image, sx, sy, rgb);
            } else {
                const float* s = sample_nearest(image, sx, sy);
                rgb[0] = s[0];
                rgb[1] = s[1];
                rgb[2] = s[2];
            }
            float* dst = texture.rgb.px(tx, ty);
            dst[0] = std::clamp(rgb[0], 0.0f, 1.0f);
            dst[1] = std::clamp(rgb[1], 0.0f, 1.0f);
            dst[2] = std::clamp(rgb[2], 0.0f, 1.0f);
            texture.fresh[ti] = 1;
            texture.written[ti] = 1;
        }
    }
}

UvTexture upsample(const UvTexture& texture, int new_resolution) {
    if (new_resolution <= texture.resolution)
        throw ConfigError("upsample: new resolution must exceed the current one");
    UvTexture out = UvTexture::blank(new_resolution);
    const int rs = texture.resolution, rd = new_resolution;
    const double scale = static_cast<double>(rs) / rd;

#pragma omp parallel for schedule(static)
    for (int y = 0; y < rd; ++y) {
        for (int x = 0; x < rd; ++x) {
            double fx = (x + 0.5) * scale - 0.5;
            double fy = (y + 0.5) * scale - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            int y0 = static_cast<int>(std::floor(fy));
            double tx = fx - x0, ty = fy - y0;
            int xs[2] = {std::clamp(x0, 0, rs - 1), std::clamp(x0 + 1, 0, rs - 1)};
            int ys[2] = {std::clamp(y0, 0, rs - 1), std::clamp(y0 + 1, 0, rs - 1)};
            double wx[2] = {1.0 - tx, tx};
            double wy[2] = {1.0 - ty, ty};

            double acc[3] = {0, 0, 0}, acc_w[3] = {0, 0, 0};
            double total_written = 0.0;
            bool any_written = false;
            for (int j = 0; j < 2; ++j) {
                for (int i = 0; i < 2; ++i) {
                    double w = wx[i] * wy[j];
                    const float* src = texture.rgb.px(xs[i], ys[j]);
                    bool wr = texture.written[texture.texel_index(xs[i], ys[j])] != 0;
                    for (int c = 0; c < 3; ++c) acc[c] += w * src[c];
                    if (wr && w > 0.0) {
                        any_written = true;
                        total_written += w;
                        for (int c = 0; c < 3; ++c) acc_w[c] += w * src[c];
                    }
                }
            }
            float* dst = out.rgb.px(x, y);
            size_t di = out.texel_index(x, y);
            if (any_written) {
                for (int c = 0; c < 3; ++c)
                    dst[c] = static_cast<float>(acc_w[c] / total_written);
                out.written[di] = 1;
            } else {
                for (int c = 0; c < 3; ++c) dst[c] = static_cast<float>(acc[c]);
            }
        }
    }
    return out;
}

}  // namespace retex
