#include <doctest.h>

#include <algorithm>

#include "retex/bvh.hpp"
#include "retex/errors.hpp"
#include "retex/meshgen.hpp"
#include "retex/viewselect.hpp"
#include "support.hpp"

using namespace retex;

TEST_CASE("sample_candidates: determinism, bounds, lattice spacing") {
    CandidateSet one = sample_candidates(1, 1.0, 1.4, 0);
    REQUIRE(one.cameras.size() == 1);
    CHECK(one.cameras[0].radius >= 1.0);
    CHECK(one.cameras[0].radius <= 1.4);

    CandidateSet a = sample_candidates(8192, 1.0, 1.4, 0);
    CandidateSet b = sample_candidates(8192, 1.0, 1.4, 0);
    REQUIRE(a.cameras.size() == 8192);
    for (size_t i = 0; i < a.cameras.size(); ++i) {
        CHECK(a.cameras[i].azimuth_deg == b.cameras[i].azimuth_deg);
        CHECK(a.cameras[i].elevation_deg == b.cameras[i].elevation_deg);
        CHECK(a.cameras[i].radius == b.cameras[i].radius);
        CHECK(a.cameras[i].radius >= 1.0);
        CHECK(a.cameras[i].radius <= 1.4);
        CHECK(a.cameras[i].azimuth_deg >= 0.0);
        CHECK(a.cameras[i].azimuth_deg < 360.0);
        CHECK(a.cameras[i].elevation_deg > 0.0);
        CHECK(a.cameras[i].elevation_deg < 180.0);
    }

    CandidateSet c = sample_candidates(8192, 1.0, 1.4, 1);
    bool any_radius_differs = false;
    for (size_t i = 0; i < c.cameras.size(); ++i)
        any_radius_differs |= c.cameras[i].radius != a.cameras[i].radius;
    CHECK(any_radius_differs);

    // Nearest-neighbor angular spacing within 2x of the uniform-lattice
    // expectation sqrt(4*pi/K). A full K^2 sweep is slow, so check a
    // subsample of points against all others.
    const double expected = std::sqrt(4.0 * kPi / 8192.0);
    std::vector<Vec3> dirs(a.cameras.size());
    for (size_t i = 0; i < dirs.size(); ++i) dirs[i] = normalized(a.cameras[i].position());
    for (size_t i = 0; i < dirs.size(); i += 97) {
        double best = 1e300;
        for (size_t j = 0; j < dirs.size(); ++j) {
            if (i == j) continue;
            best = std::min(best, deg_to_rad(angle_deg(dirs[i], dirs[j])));
        }
        CHECK(best > expected / 2.0);
        CHECK(best < expected * 2.0);
    }

    CHECK_THROWS_AS(sample_candidates(0, 1.0, 1.4, 0), ConfigError);
    CHECK_THROWS_AS(sample_candidates(8, 1.4, 1.0, 0), ConfigError);
}

TEST_CASE("visibility: head-on visible, backfacing invisible") {
    TriangleMesh tri;  // normal +Z
    tri.vertices = {{-0.5, -0.5, 0}, {0.5, -0.5, 0}, {0, 0.5, 0}};
    tri.triangles = {{{0, 1, 2}}};
    tri.corner_uvs = {{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}};
    tri.rebuild_derived();

    CandidateSet set;
    Camera above;  // +Z axis
    above.azimuth_deg = 0;
    above.elevation_deg = 1e-3;
    above.radius = 1.2;
    Camera below = above;  // -Z axis
    below.elevation_deg = 180.0 - 1e-3;
    set.cameras = {above, below};

    VisibilityMatrix vis = compute_visibility(tri, set);
    CHECK(vis.bit(0, 0));
    CHECK_FALSE(vis.bit(0, 1));
}

TEST_CASE("visibility: occlusion between two parallel quads (brute-force oracle)") {
    // Two quads facing +X, the nearer one blocking the farther one.
    TriangleMesh scene;
    auto add_quad = [&](double x) {
        int base = static_cast<int>(scene.vertices.size());
        scene.vertices.push_back({x, -0.6, -0.6});
        scene.vertices.push_back({x, 0.6, -0.6});
        scene.vertices.push_back({x, 0.6, 0.6});
        scene.vertices.push_back({x, -0.6, 0.6});
        scene.triangles.push_back({{base, base + 1, base + 2}});
        scene.corner_uvs.push_back({Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}});
        scene.triangles.push_back({{base, base + 2, base + 3}});
        scene.corner_uvs.push_back({Vec2{0, 0}, Vec2{1, 1}, Vec2{0, 1}});
    };
    add_quad(0.5);   // faces 0,1 (near, seen from +X)
    add_quad(-0.5);  // faces 2,3 (far)
    scene.rebuild_derived();

    CandidateSet set;
    Camera cam;
    cam.azimuth_deg = 0;
    cam.elevation_deg = 90;
    cam.radius = 1.3;  // on the +X axis
    set.cameras = {cam};

    VisibilityMatrix vis = compute_visibility(scene, set);
    CHECK(vis.bit(0, 0));
    CHECK(vis.bit(1, 0));
    CHECK_FALSE(vis.bit(2, 0));
    CHECK_FALSE(vis.bit(3, 0));

    // Brute-force all-pairs oracle over the 4-triangle scene.
    Vec3 pos = cam.position();
    for (int f = 0; f < 4; ++f) {
        Vec3 centroid = scene.face_centroids[f];
        Vec3 to_cam = pos - centroid;
        bool angle_ok = angle_deg(scene.face_normals[f], to_cam) < 45.0;
        Ray ray{pos, centroid - pos};
        double t_best = 1e300;
        for (int g = 0; g < 4; ++g) {
            const Tri& t = scene.triangles[g];
            auto h = intersect_triangle(ray, scene.vertices[t.v[0]], scene.vertices[t.v[1]],
                                        scene.vertices[t.v[2]], 0.0, 1e300);
            if (h && h->t < t_best) t_best = h->t;
        }
        bool unobstructed = t_best >= 1.0 - 1e-6 / norm(centroid - pos);
        CHECK(vis.bit(f, 0) == (angle_ok && unobstructed));
    }
}

TEST_CASE("visibility: grazing angle beyond 45 degrees is rejected") {
    TriangleMesh tri;
    tri.vertices = {{-0.1, -0.1, 0}, {0.1, -0.1, 0}, {0, 0.1, 0}};
    tri.triangles = {{{0, 1, 2}}};
    tri.corner_uvs = {{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}};
    tri.rebuild_derived();

    CandidateSet set;
    Camera at44, at46;
    at44.azimuth_deg = 0;
    at44.elevation_deg = 44.0;  // angle to the +Z normal ~= 44.5 deg (centroid offset)
    at44.radius = 1.2;
    at46 = at44;
    at46.elevation_deg = 46.0;
    set.cameras = {at44, at46};

    VisibilityMatrix vis = compute_visibility(tri, set);
    CHECK(vis.bit(0, 0));
    CHECK_FALSE(vis.bit(0, 1));
}

TEST_CASE("visibility: candidates inside the bounding box are skipped") {
    const TriangleMesh& sphere = test::icosphere(1);
    CandidateSet set;
    Camera inside;  // diagonal direction at radius 1.0 sits inside [-1,1]^3
    inside.azimuth_deg = 45;
    inside.elevation_deg = 54.7;
    inside.radius = 1.0;
    Camera outside;  // axis direction at radius 1.3 is outside
    outside.azimuth_deg = 0;
    outside.elevation_deg = 90;
    outside.radius = 1.3;
    set.cameras = {inside, outside};

    VisibilityMatrix vis = compute_visibility(sphere, set);
    REQUIRE(vis.skipped_candidates.size() == 1);
    CHECK(vis.skipped_candidates[0] == 0);
    for (int f = 0; f < vis.faces; ++f) CHECK_FALSE(vis.bit(f, 0));
    CHECK(vis.column_popcount(1) > 0);
}

TEST_CASE("visibility is invariant under a shared rigid rotation") {
    const TriangleMesh& sphere = test::icosphere(1);
    // Radii well outside the [-1,1]^3 bounding box in every orientation, so
    // the inside-the-box skip rule (axis-aligned, not rotation-equivariant)
    // cannot flip any candidate's status.
    CandidateSet set = sample_candidates(64, 1.9, 2.2, 3);
    VisibilityMatrix before = compute_visibility(sphere, set);

    double ang_deg = 37.0;
    double c = std::cos(deg_to_rad(ang_deg)), s = std::sin(deg_to_rad(ang_deg));
    TriangleMesh rotated = sphere;
    for (Vec3& v : rotated.vertices) v = {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
    rotated.rebuild_derived();
    CandidateSet rset = set;
    for (Camera& cam : rset.cameras) cam.azimuth_deg = std::fmod(cam.azimuth_deg + ang_deg, 360.0);

    VisibilityMatrix after = compute_visibility(rotated, rset);
    for (int f = 0; f < before.faces; ++f) {
        for (int cd = 0; cd < before.candidates; ++cd) {
            if (before.bit(f, cd) == after.bit(f, cd)) continue;
            // only pairs within the 1e-4 degree guard band of 45 may differ
            Vec3 to_cam = set.cameras[cd].position() - sphere.face_centroids[f];
            double angle = angle_deg(sphere.face_normals[f], to_cam);
            CHECK(std::fabs(angle - 45.0) < 1e-4);
        }
    }
}

TEST_CASE("greedy_cover: single dominating candidate") {
    VisibilityMatrix vis = VisibilityMatrix::empty(6, 3);
    vis.face_areas.assign(6, 1.0);
    for (int f = 0; f < 6; ++f) vis.set_bit(f, 1);  // candidate 1 covers everything
    vis.set_bit(0, 0);
    vis.set_bit(1, 2);
    SelectedViews sel = greedy_cover(vis);
    REQUIRE(sel.indices.size() == 1);
    CHECK(sel.indices[0] == 1);
    CHECK(sel.coverage_area_fraction == doctest::Approx(1.0));
    CHECK(sel.uncoverable_faces.empty());
    for (uint8_t cf : sel.covered_faces) CHECK(cf == 1);
    CHECK(sel.new_faces_per_view == std::vector<int>{6});
}

TEST_CASE("greedy_cover: ties break to the lower candidate index") {
    VisibilityMatrix vis = VisibilityMatrix::empty(4, 3);
    vis.face_areas.assign(4, 1.0);
    vis.set_bit(0, 0);  // candidate 0 is strictly worse
    for (int f = 0; f < 4; ++f) {
        vis.set_bit(f, 1);  // candidates 1 and 2 have identical columns
        vis.set_bit(f, 2);
    }
    SelectedViews sel = greedy_cover(vis);
    REQUIRE(sel.indices.size() == 1);
    CHECK(sel.indices[0] == 1);
}

TEST_CASE("greedy_cover: uncoverable faces reported, not fatal") {
    VisibilityMatrix vis = VisibilityMatrix::empty(3, 2);
    vis.face_areas.assign(3, 1.0);
    vis.set_bit(0, 0);
    vis.set_bit(1, 1);  // face 2 seen by nobody
    SelectedViews sel = greedy_cover(vis);
    CHECK(sel.indices.size() == 2);
    REQUIRE(sel.uncoverable_faces.size() == 1);
    CHECK(sel.uncoverable_faces[0] == 2);
    CHECK(sel.coverage_area_fraction == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("greedy_cover ignores zero-area faces") {
    VisibilityMatrix vis = VisibilityMatrix::empty(3, 2);
    vis.face_areas = {1.0, 0.0, 1.0};
    vis.set_bit(0, 0);
    vis.set_bit(1, 1);  // candidate 1 sees only the degenerate face
    vis.set_bit(2, 0);
    SelectedViews sel = greedy_cover(vis);
    REQUIRE(sel.indices.size() == 1);
    CHECK(sel.indices[0] == 0);
    CHECK(sel.uncoverable_faces.empty());  // degenerate faces leave the universe
}

TEST_CASE("exact cover: identity and dominated instances") {
    VisibilityMatrix ident = VisibilityMatrix::empty(3, 3);
    ident.face_areas.assign(3, 1.0);
    for (int i = 0; i < 3; ++i) ident.set_bit(i, i);
    SelectedViews sel = exact_cover_bruteforce(ident);
    CHECK(sel.indices.size() == 3);

    VisibilityMatrix dom = VisibilityMatrix::empty(4, 3);
    dom.face_areas.assign(4, 1.0);
    for (int f = 0; f < 4; ++f) dom.set_bit(f, 2);
    dom.set_bit(0, 0);
    dom.set_bit(1, 1);
    SelectedViews dsel = exact_cover_bruteforce(dom);
    REQUIRE(dsel.indices.size() == 1);
    CHECK(dsel.indices[0] == 2);

    VisibilityMatrix big = VisibilityMatrix::empty(4, 21);
    big.face_areas.assign(4, 1.0);
    CHECK_THROWS_AS(exact_cover_bruteforce(big), TooLarge);
}

TEST_CASE("greedy vs exact: bound and identical coverage on seeded instances") {
    for (uint64_t seed = 0; seed < 25; ++seed) {
        Rng rng(seed);
        VisibilityMatrix vis = test::random_visibility(8, 12, 0.3, rng);
        SelectedViews greedy = greedy_cover(vis);
        SelectedViews exact = exact_cover_bruteforce(vis);

        CHECK(greedy.indices.size() >= exact.indices.size());
        int n = 0;
        for (int f = 0; f < vis.faces; ++f)
            if (vis.face_areas[f] > 0) ++n;
        double bound =
            (1.0 + std::log(static_cast<double>(n))) * static_cast<double>(exact.indices.size());
        CHECK(static_cast<double>(greedy.indices.size()) <= bound);
        CHECK(greedy.covered_faces == exact.covered_faces);
    }
    // tetrahedron-sized instances: 4 faces, 6 candidates, 20 seeds
    for (uint64_t seed = 100; seed < 120; ++seed) {
        Rng rng(seed);
        VisibilityMatrix vis = test::random_visibility(4, 6, 0.4, rng);
        SelectedViews greedy = greedy_cover(vis);
        SelectedViews exact = exact_cover_bruteforce(vis);
        double bound = std::ceil(1.0 + std::log(4.0)) * static_cast<double>(exact.indices.size());
        CHECK(static_cast<double>(greedy.indices.size()) <= bound);
        CHECK(greedy.covered_faces == exact.covered_faces);
    }
}

TEST_CASE("adding a candidate never decreases coverage") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(900 + seed);
        VisibilityMatrix vis = test::random_visibility(10, 8, 0.3, rng);
        SelectedViews base = greedy_cover(vis);

        VisibilityMatrix more = VisibilityMatrix::empty(10, 9);
        more.face_areas = vis.face_areas;
        for (int c = 0; c < 8; ++c)
            for (int f = 0; f < 10; ++f)
                if (vis.bit(f, c)) more.set_bit(f, c);
        for (int f = 0; f < 10; f += 2) more.set_bit(f, 8);
        SelectedViews grown = greedy_cover(more);

        int covered_base = 0, covered_grown = 0;
        for (int f = 0; f < 10; ++f) {
            covered_base += base.covered_faces[f];
            covered_grown += grown.covered_faces[f];
        }
        CHECK(covered_grown >= covered_base);
        CHECK(grown.indices.size() <= base.indices.size());
    }
}

TEST_CASE("selection is deterministic") {
    const TriangleMesh& sphere = test::icosphere(2);
    CandidateSet set = sample_candidates(256, 1.0, 1.4, 11);
    VisibilityMatrix va = compute_visibility(sphere, set);
    VisibilityMatrix vb = compute_visibility(sphere, set);
    CHECK(va.bits == vb.bits);
    SelectedViews sa = greedy_cover(va);
    SelectedViews sb = greedy_cover(vb);
    CHECK(sa.indices == sb.indices);
    CHECK(sa.coverage_area_fraction == sb.coverage_area_fraction);
}
