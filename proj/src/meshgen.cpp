#include "retex/meshgen.hpp"

#include <cmath>
#include <map>

namespace retex {

TriangleMesh make_quad() {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    m.triangles = {{{0, 1, 2}}, {{0, 2, 3}}};
    m.corner_uvs = {{Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}},
                    {Vec2{0, 0}, Vec2{1, 1}, Vec2{0, 1}}};
    m.rebuild_derived();
    return m;
}

TriangleMesh make_cube(bool flip_inward) {
    TriangleMesh m;
    m.vertices = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                  {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};
    // Quads with outward CCW winding; cell index in the 3x2 UV grid.
    struct Face {
        int v[4];
        int cell;
    };
    const Face faces[6] = {
        {{1, 2, 6, 5}, 0},  // +X
        {{3, 0, 4, 7}, 1},  // -X
        {{2, 3, 7, 6}, 2},  // +Y
        {{0, 1, 5, 4}, 3},  // -Y
        {{4, 5, 6, 7}, 4},  // +Z
        {{3, 2, 1, 0}, 5},  // -Z
    };
    const double cw = 1.0 / 3.0, ch = 1.0 / 2.0;
    const double margin = 0.02;
    for (const Face& f : faces) {
        double u0 = (f.cell % 3) * cw + margin, u1 = (f.cell % 3 + 1) * cw - margin;
        double v0 = (f.cell / 3) * ch + margin, v1 = (f.cell / 3 + 1) * ch - margin;
        Vec2 uv[4] = {{u0, v0}, {u1, v0}, {u1, v1}, {u0, v1}};
        int idx[4] = {0, 1, 2, 3};
        if (flip_inward) std::swap(idx[1], idx[3]);
        m.triangles.push_back({{f.v[idx[0]], f.v[idx[1]], f.v[idx[2]]}});
        m.corner_uvs.push_back({uv[idx[0]], uv[idx[1]], uv[idx[2]]});
        m.triangles.push_back({{f.v[idx[0]], f.v[idx[2]], f.v[idx[3]]}});
        m.corner_uvs.push_back({uv[idx[0]], uv[idx[2]], uv[idx[3]]});
    }
    m.rebuild_derived();
    return m;
}

namespace {

struct NetFace {
    int v[3];    // indices into the 12 unique sphere vertices
    Vec2 uv[3];  // net coordinates
};

std::vector<NetFace> icosahedron_net(std::vector<Vec3>& verts) {
    const double upper_polar = std::atan2(2.0, 1.0);  // ~63.435 deg
    verts.clear();
    verts.push_back({0, 0, 1});  // 0: north pole
    for (int k = 0; k < 5; ++k) {
        double az = deg_to_rad(72.0 * k);
        verts.push_back({std::sin(upper_polar) * std::cos(az),
                         std::sin(upper_polar) * std::sin(az), std::cos(upper_polar)});
    }
    for (int k = 0; k < 5; ++k) {
        double az = deg_to_rad(72.0 * k + 36.0);
        verts.push_back({std::sin(kPi - upper_polar) * std::cos(az),
                         std::sin(kPi - upper_polar) * std::sin(az), -std::cos(upper_polar)});
    }
    verts.push_back({0, 0, -1});  // 11: south pole

    auto upper = [](int j) { return 1 + j % 5; };
    auto lower = [](int j) { return 6 + j % 5; };
    const double w = 1.0 / 5.5;
    auto A = [&](int k) { return Vec2{(k + 0.5) * w, 1.0}; };
    auto B = [&](int j) { return Vec2{j * w, 2.0 / 3.0}; };
    auto C = [&](int j) { return Vec2{(j + 0.5) * w, 1.0 / 3.0}; };
    auto D = [&](int k) { return Vec2{(k + 1.0) * w, 0.0}; };

    std::vector<NetFace> faces;
    for (int k = 0; k < 5; ++k) {
        faces.push_back({{0, upper(k), upper(k + 1)}, {A(k), B(k), B(k + 1)}});
        faces.push_back({{upper(k), lower(k), upper(k + 1)}, {B(k), C(k), B(k + 1)}});
        faces.push_back({{upper(k + 1), lower(k), lower(k + 1)}, {B(k + 1), C(k), C(k + 1)}});
        faces.push_back({{lower(k), 11, lower(k + 1)}, {C(k), D(k), C(k + 1)}});
    }
    return faces;
}

}  // namespace

TriangleMesh make_icosphere(int subdivisions) {
    TriangleMesh m;
    std::vector<NetFace> faces = icosahedron_net(m.vertices);

    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        Vec3 p = normalized((m.vertices[a] + m.vertices[b]) * 0.5);
        int idx = static_cast<int>(m.vertices.size());
        m.vertices.push_back(p);
        midpoint.emplace(key, idx);
        return idx;
    };

    for (int s = 0; s < subdivisions; ++s) {
        std::vector<NetFace> next;
        next.reserve(faces.size() * 4);
        for (const NetFace& f : faces) {
            int m01 = mid(f.v[0], f.v[1]), m12 = mid(f.v[1], f.v[2]), m20 = mid(f.v[2], f.v[0]);
            Vec2 t01 = (f.uv[0] + f.uv[1]) * 0.5;
            Vec2 t12 = (f.uv[1] + f.uv[2]) * 0.5;
            Vec2 t20 = (f.uv[2] + f.uv[0]) * 0.5;
            next.push_back({{f.v[0], m01, m20}, {f.uv[0], t01, t20}});
            next.push_back({{m01, f.v[1], m12}, {t01, f.uv[1], t12}});
            next.push_back({{m20, m12, f.v[2]}, {t20, t12, f.uv[2]}});
            next.push_back({{m01, m12, m20}, {t01, t12, t20}});
        }
        faces.swap(next);
    }

    m.triangles.reserve(faces.size());
    m.corner_uvs.reserve(faces.size());
    for (const NetFace& f : faces) {
        m.triangles.push_back({{f.v[0], f.v[1], f.v[2]}});
        m.corner_uvs.push_back({f.uv[0], f.uv[1], f.uv[2]});
    }
    m.rebuild_derived();
    return m;
}

void checker_gradient_color(double u, double v, int cells, float rgb[3]) {
    int cu = static_cast<int>(std::floor(u * cells));
    int cv = static_cast<int>(std::floor(v * cells));
    bool on = ((cu + cv) & 1) == 0;
    rgb[0] = static_cast<float>(0.15 + 0.7 * u);
    rgb[1] = static_cast<float>(0.15 + 0.7 * v);
    rgb[2] = on ? 0.85f : 0.25f;
}

ImageF checker_gradient_image(int resolution, int cells) {
    ImageF img(resolution, resolution, 3);
    for (int y = 0; y < resolution; ++y) {
        for (int x = 0; x < resolution; ++x) {
            double u = (x + 0.5) / resolution;
            double v = (y + 0.5) / resolution;
            checker_gradient_color(u, v, cells, img.px(x, y));
        }
    }
    return img;
}

}  // namespace retex
