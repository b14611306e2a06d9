#include <doctest.h>

#include <fstream>

#include "retex/camera.hpp"
#include "retex/errors.hpp"
#include "retex/mesh.hpp"
#include "retex/meshgen.hpp"
#include "support.hpp"

using namespace retex;

namespace {

const char* kQuadObj =
    "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
    "vt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\n"
    "f 1/1 2/2 3/3 4/4\n";

}  // namespace

TEST_CASE("parse unit quad: 2 triangles, 6 corner uvs") {
    LoadedMesh lm = parse_obj(kQuadObj);
    CHECK(lm.mesh.face_count() == 2);
    CHECK(lm.mesh.vertex_count() == 4);
    CHECK(lm.mesh.corner_uvs.size() == 2);
    CHECK(lm.warnings.degenerate_faces.empty());
    // fan triangulation of the quad
    CHECK(lm.mesh.triangles[0].v[0] == 0);
    CHECK(lm.mesh.triangles[1].v[2] == 3);
}

TEST_CASE("parse cube obj fixture") {
    TriangleMesh cube = make_cube();
    auto dir = test::temp_dir("obj");
    write_obj(cube, (dir / "cube.obj").string());
    LoadedMesh lm = load_mesh((dir / "cube.obj").string());
    CHECK(lm.mesh.face_count() == 12);
    for (const auto& cu : lm.mesh.corner_uvs)
        for (const Vec2& uv : cu) {
            CHECK(uv.x >= 0.0);
            CHECK(uv.x <= 1.0);
            CHECK(uv.y >= 0.0);
            CHECK(uv.y <= 1.0);
        }
    CHECK(lm.warnings.nonmanifold_edges == 0);
    CHECK(std::fabs(lm.mesh.total_area() - cube.total_area()) < 1e-9);
}

TEST_CASE("face without vt is MissingUVs") {
    CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"), MissingUVs);
    CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n"),
                    MissingUVs);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_obj("v 0 0\n"), ParseError);             // short vertex
    CHECK_THROWS_AS(parse_obj("v 0 0 0\nvt 0 0\nf 1/1 2/1 3/1\n"), ParseError);  // bad index
    CHECK_THROWS_AS(parse_obj(""), ParseError);                    // no faces
    CHECK_THROWS_AS(load_mesh("/nonexistent/path.obj"), ConfigError);
}

TEST_CASE("degenerate faces are kept but reported") {
    LoadedMesh lm = parse_obj(
        "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 0 0\n"
        "vt 0 0\nvt 1 0\nvt 0 1\n"
        "f 1/1 2/2 3/3\nf 1/1 2/2 4/3\n");  // second face is collinear
    CHECK(lm.mesh.face_count() == 2);
    REQUIRE(lm.warnings.degenerate_faces.size() == 1);
    CHECK(lm.warnings.degenerate_faces[0] == 1);
}

TEST_CASE("normalize_mesh forces [-1,1] box and is idempotent") {
    TriangleMesh cube = make_cube();
    for (Vec3& v : cube.vertices) v = v + Vec3{1.0, 1.0, 1.0};  // shift to [0,2]^3
    cube.rebuild_derived();
    TriangleMesh n = normalize_mesh(cube);
    Vec3 lo, hi;
    n.bounds(lo, hi);
    CHECK(norm(lo - Vec3{-1, -1, -1}) < 1e-12);
    CHECK(norm(hi - Vec3{1, 1, 1}) < 1e-12);

    TriangleMesh n2 = normalize_mesh(n);
    for (size_t i = 0; i < n.vertices.size(); ++i)
        CHECK(norm(n2.vertices[i] - n.vertices[i]) < 1e-7);

    TriangleMesh point;
    point.vertices = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
    point.triangles = {{{0, 1, 2}}};
    point.corner_uvs = {{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}};
    point.rebuild_derived();
    CHECK_THROWS_AS(normalize_mesh(point), DegenerateBounds);
}

TEST_CASE("face_basis analytic values") {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.triangles = {{{0, 1, 2}}};
    m.corner_uvs = {{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}};
    m.rebuild_derived();

    FaceBasis fb = face_basis(m, 0);
    CHECK(norm(fb.centroid - Vec3{1.0 / 3, 1.0 / 3, 0}) < 1e-12);
    CHECK(norm(fb.normal - Vec3{0, 0, 1}) < 1e-12);
    CHECK(fb.area == doctest::Approx(0.5));
    CHECK_FALSE(fb.degenerate);

    std::swap(m.triangles[0].v[1], m.triangles[0].v[2]);  // reversed winding
    m.rebuild_derived();
    CHECK(norm(face_basis(m, 0).normal - Vec3{0, 0, -1}) < 1e-12);

    TriangleMesh col;
    col.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    col.triangles = {{{0, 1, 2}}};
    col.corner_uvs = {{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}};
    col.rebuild_derived();
    FaceBasis d = face_basis(col, 0);
    CHECK(d.area == 0.0);
    CHECK(d.degenerate);
}

TEST_CASE("total area invariant under rigid rotation") {
    const TriangleMesh& sphere = test::icosphere(2);
    double area0 = sphere.total_area();

    TriangleMesh rotated = sphere;
    double c = std::cos(0.7), s = std::sin(0.7);
    for (Vec3& v : rotated.vertices) {
        Vec3 r{c * v.x - s * v.y, s * v.x + c * v.y, v.z};
        double c2 = std::cos(0.3), s2 = std::sin(0.3);
        v = {r.x, c2 * r.y - s2 * r.z, s2 * r.y + c2 * r.z};
    }
    rotated.rebuild_derived();
    CHECK(rotated.total_area() == doctest::Approx(area0).epsilon(1e-6));
}

TEST_CASE("camera position convention") {
    Camera cam;
    cam.azimuth_deg = 0;
    cam.elevation_deg = 90;
    cam.radius = 1;
    CHECK(norm(cam.position() - Vec3{1, 0, 0}) < 1e-12);

    cam.elevation_deg = 1e-4;
    CHECK(norm(cam.position() - Vec3{0, 0, 1}) < 1e-5);

    cam.azimuth_deg = 90;
    cam.elevation_deg = 90;
    CHECK(norm(cam.position() - Vec3{0, 1, 0}) < 1e-12);
}

TEST_CASE("camera looks at the origin; origin projects to image center") {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        Camera cam;
        cam.azimuth_deg = rng.uniform(0, 360);
        cam.elevation_deg = rng.uniform(1, 179);
        cam.radius = rng.uniform(0.5, 3.0);
        cam.image_size = 256;
        CameraMatrices m = camera_matrices(cam);

        Vec4 clip = m.view_proj.mul_point({0, 0, 0});
        CHECK(clip.w == doctest::Approx(cam.radius).epsilon(1e-9));
        double sx = (clip.x / clip.w + 1.0) * 0.5 * cam.image_size;
        double sy = (1.0 - clip.y / clip.w) * 0.5 * cam.image_size;
        CHECK(sx == doctest::Approx(128.0).epsilon(1e-9));
        CHECK(sy == doctest::Approx(128.0).epsilon(1e-9));

        // forward direction points at the origin
        Vec4 v = m.view.mul_point({0, 0, 0});
        CHECK(v.x == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(v.y == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(-v.z == doctest::Approx(cam.radius).epsilon(1e-9));
    }
}

TEST_CASE("icosphere fixture sanity") {
    const TriangleMesh& s = test::icosphere(3);
    CHECK(s.face_count() == 20 * 64);  // 20 * 4^3
    // outward normals
    for (size_t f = 0; f < s.face_count(); f += 97)
        CHECK(dot(s.face_normals[f], s.face_centroids[f]) > 0.0);
    // closed surface
    CHECK(count_nonmanifold_edges(s) == 0);
    // all UVs inside the unit square
    for (const auto& cu : s.corner_uvs)
        for (const Vec2& uv : cu) {
            CHECK(uv.x >= 0.0);
            CHECK(uv.x <= 1.0);
            CHECK(uv.y >= 0.0);
            CHECK(uv.y <= 1.0);
        }
}
