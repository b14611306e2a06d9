#include "retex/mesh.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "retex/errors.hpp"

namespace retex {

void TriangleMesh::rebuild_derived() {
    size_t n = triangles.size();
    face_normals.resize(n);
    face_centroids.resize(n);
    face_areas.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const Tri& t = triangles[i];
        const Vec3& a = vertices[t.v[0]];
        const Vec3& b = vertices[t.v[1]];
        const Vec3& c = vertices[t.v[2]];
        Vec3 cr = cross(b - a, c - a);
        double len = norm(cr);
        face_centroids[i] = (a + b + c) / 3.0;
        face_areas[i] = 0.5 * len;
        face_normals[i] = len > 0.0 ? cr / len : Vec3{};
    }
}

void TriangleMesh::bounds(Vec3& lo, Vec3& hi) const {
    lo = {1e300, 1e300, 1e300};
    hi = {-1e300, -1e300, -1e300};
    for (const Vec3& v : vertices) {
        lo = min3(lo, v);
        hi = max3(hi, v);
    }
}

double TriangleMesh::total_area() const {
    double s = 0.0;
    for (double a : face_areas) s += a;
    return s;
}

FaceBasis face_basis(const TriangleMesh& mesh, int face_index) {
    const Tri& t = mesh.triangles[face_index];
    const Vec3& a = mesh.vertices[t.v[0]];
    const Vec3& b = mesh.vertices[t.v[1]];
    const Vec3& c = mesh.vertices[t.v[2]];
    Vec3 cr = cross(b - a, c - a);
    double len = norm(cr);
    FaceBasis out;
    out.centroid = (a + b + c) / 3.0;
    out.area = 0.5 * len;
    out.degenerate = len <= 0.0;
    out.normal = out.degenerate ? Vec3{} : cr / len;
    return out;
}

namespace {

// "3", "3/7", "3/7/2", "3//2" with 1-based or negative (relative) indices.
struct FaceCorner {
    int v = 0;
    int vt = -1;  // -1 when the corner has no vt
};

int resolve_index(long raw, size_t count, const std::string& what, int line_no) {
    long idx = raw > 0 ? raw - 1 : static_cast<long>(count) + raw;
    if (idx < 0 || idx >= static_cast<long>(count))
        throw ParseError("obj line " + std::to_string(line_no) + ": " + what + " index " +
                         std::to_string(raw) + " out of range");
    return static_cast<int>(idx);
}

FaceCorner parse_corner(const std::string& tok, size_t nv, size_t nvt, int line_no) {
    FaceCorner c;
    size_t s1 = tok.find('/');
    const char* p = tok.c_str();
    char* end = nullptr;
    long v = std::strtol(p, &end, 10);
    if (end == p) throw ParseError("obj line " + std::to_string(line_no) + ": bad face corner '" + tok + "'");
    c.v = resolve_index(v, nv, "vertex", line_no);
    if (s1 == std::string::npos) return c;  // position only
    size_t s2 = tok.find('/', s1 + 1);
    std::string vt_str = tok.substr(s1 + 1, s2 == std::string::npos ? std::string::npos : s2 - s1 - 1);
    if (vt_str.empty()) return c;  // "v//vn"
    long vt = std::strtol(vt_str.c_str(), &end, 10);
    c.vt = resolve_index(vt, nvt, "uv", line_no);
    return c;
}

}  // namespace

LoadedMesh parse_obj(const std::string& text, const std::string& origin) {
    LoadedMesh out;
    TriangleMesh& mesh = out.mesh;
    std::vector<Vec2> uvs;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z))
                throw ParseError(origin + " line " + std::to_string(line_no) + ": bad vertex");
            mesh.vertices.push_back(v);
        } else if (tag == "vt") {
            Vec2 uv;
            if (!(ls >> uv.x >> uv.y))
                throw ParseError(origin + " line " + std::to_string(line_no) + ": bad uv");
            uvs.push_back(uv);
        } else if (tag == "f") {
            std::vector<FaceCorner> corners;
            std::string tok;
            while (ls >> tok)
                corners.push_back(parse_corner(tok, mesh.vertices.size(), uvs.size(), line_no));
            if (corners.size() < 3)
                throw ParseError(origin + " line " + std::to_string(line_no) + ": face with < 3 corners");
            for (const FaceCorner& c : corners)
                if (c.vt < 0)
                    throw MissingUVs(origin + " line " + std::to_string(line_no) +
                                     ": face corner without vt index");
            for (size_t k = 2; k < corners.size(); ++k) {  // fan triangulation
                Tri t;
                t.v[0] = corners[0].v;
                t.v[1] = corners[k - 1].v;
                t.v[2] = corners[k].v;
                mesh.triangles.push_back(t);
                mesh.corner_uvs.push_back(
                    {uvs[corners[0].vt], uvs[corners[k - 1].vt], uvs[corners[k].vt]});
            }
        }
        // vn, mtllib, usemtl, o, g, s are accepted and ignored.
    }

    if (mesh.triangles.empty()) throw ParseError(origin + ": no faces found");
    for (const auto& cu : mesh.corner_uvs)
        for (const Vec2& uv : cu)
            if (uv.x < -1e-9 || uv.x > 1.0 + 1e-9 || uv.y < -1e-9 || uv.y > 1.0 + 1e-9)
                throw ParseError(origin + ": uv outside [0,1]");

    mesh.rebuild_derived();
    for (size_t i = 0; i < mesh.face_count(); ++i)
        if (mesh.face_areas[i] <= 0.0) out.warnings.degenerate_faces.push_back(static_cast<int>(i));
    out.warnings.nonmanifold_edges = count_nonmanifold_edges(mesh);
    return out;
}

LoadedMesh load_mesh(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open mesh file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_obj(ss.str(), path);
}

TriangleMesh normalize_mesh(const TriangleMesh& mesh) {
    Vec3 lo, hi;
    mesh.bounds(lo, hi);
    Vec3 ext = hi - lo;
    double longest = std::max({ext.x, ext.y, ext.z});
    if (longest <= 1e-12) throw DegenerateBounds("normalize_mesh: all vertices coincide");
    Vec3 center = (lo + hi) * 0.5;
    double scale = 2.0 / longest;
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) v = (v - center) * scale;
    out.rebuild_derived();
    return out;
}

int count_nonmanifold_edges(const TriangleMesh& mesh) {
    std::map<std::pair<int, int>, int> edge_count;
    for (const Tri& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = t.v[k], b = t.v[(k + 1) % 3];
            edge_count[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    int bad = 0;
    for (const auto& [e, n] : edge_count)
        if (n != 2) ++bad;
    return bad;
}

void write_obj(const TriangleMesh& mesh, const std::string& path, const std::string& texture_png) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open for writing: " + path);
    f.precision(9);

    std::string mtl_path;
    if (!texture_png.empty()) {
        size_t dot = path.rfind('.');
        mtl_path = (dot == std::string::npos ? path : path.substr(0, dot)) + ".mtl";
        size_t slash = mtl_path.find_last_of("/\\");
        f << "mtllib " << (slash == std::string::npos ? mtl_path : mtl_path.substr(slash + 1))
          << "\n";
    }

    for (const Vec3& v : mesh.vertices) f << "v " << v.x << " " << v.y << " " << v.z << "\n";

    // Deduplicate per-corner UVs so the file stays compact.
    std::map<std::pair<double, double>, int> uv_index;
    std::vector<Vec2> uv_list;
    std::vector<std::array<int, 3>> face_vt(mesh.face_count());
    for (size_t i = 0; i < mesh.face_count(); ++i) {
        for (int k = 0; k < 3; ++k) {
            const Vec2& uv = mesh.corner_uvs[i][k];
            auto [it, inserted] = uv_index.try_emplace({uv.x, uv.y}, static_cast<int>(uv_list.size()));
            if (inserted) uv_list.push_back(uv);
            face_vt[i][k] = it->second;
        }
    }
    for (const Vec2& uv : uv_list) f << "vt " << uv.x << " " << uv.y << "\n";

    if (!texture_png.empty()) f << "usemtl textured\n";
    for (size_t i = 0; i < mesh.face_count(); ++i) {
        const Tri& t = mesh.triangles[i];
        f << "f";
        for (int k = 0; k < 3; ++k) f << " " << t.v[k] + 1 << "/" << face_vt[i][k] + 1;
        f << "\n";
    }
    if (!f) throw ConfigError("short write: " + path);

    if (!texture_png.empty()) {
        std::ofstream m(mtl_path);
        if (!m) throw ConfigError("cannot open for writing: " + mtl_path);
        m << "newmtl textured\nKa 1 1 1\nKd 1 1 1\nmap_Kd " << texture_png << "\n";
    }
}

}  // namespace retex
