#pragma once

#include <array>
#include <string>
#include <vector>

#include "retex/vec.hpp"

namespace retex {

struct Tri {
    int v[3] = {0, 0, 0};
};

// Indexed triangle mesh with per-corner UVs. Immutable by convention once
// derived quantities are built; all operations return new meshes.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Tri> triangles;
    std::vector<std::array<Vec2, 3>> corner_uvs;  // one entry per triangle

    // Derived, filled by rebuild_derived(). Degenerate faces get a zero
    // normal and zero area.
    std::vector<Vec3> face_normals;
    std::vector<Vec3> face_centroids;
    std::vector<double> face_areas;

    size_t face_count() const { return triangles.size(); }
    size_t vertex_count() const { return vertices.size(); }

    void rebuild_derived();
    void bounds(Vec3& lo, Vec3& hi) const;
    double total_area() const;
};

struct MeshWarnings {
    std::vector<int> degenerate_faces;
    int nonmanifold_edges = 0;  // edges shared by != 2 faces
};

struct LoadedMesh {
    TriangleMesh mesh;
    MeshWarnings warnings;
};

// Wavefront OBJ with mandatory vt records on every face corner. Quads and
// larger polygons are fan-triangulated. Throws ParseError / MissingUVs.
LoadedMesh load_mesh(const std::string& path);
LoadedMesh parse_obj(const std::string& text, const std::string& origin = "<memory>");

// Uniform scale + translate so the bounding box is centered at the origin
// and the longest axis spans exactly [-1, 1]. Throws DegenerateBounds.
TriangleMesh normalize_mesh(const TriangleMesh& mesh);

struct FaceBasis {
    Vec3 centroid;
    Vec3 normal;  // zero for degenerate faces
    double area = 0.0;
    bool degenerate = false;
};

FaceBasis face_basis(const TriangleMesh& mesh, int face_index);

// Count of edges not shared by exactly two faces (boundary or fan edges).
int count_nonmanifold_edges(const TriangleMesh& mesh);

// OBJ writer; when material/texture names are given an .mtl referencing the
// texture is written next to the OBJ.
void write_obj(const TriangleMesh& mesh, const std::string& path,
               const std::string& texture_png = "");

}  // namespace retex
