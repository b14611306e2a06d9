#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "retex/mesh.hpp"
#include "retex/vec.hpp"

namespace retex {

struct Ray {
    Vec3 origin;
    Vec3 dir;  // need not be normalized; t is measured in units of |dir|
};

struct RayHit {
    double t = 0.0;
    int face = -1;
    double u = 0.0, v = 0.0;  // barycentric weights of corners 1 and 2
};

// Watertight ray/triangle intersection (shear-and-scale formulation).
// Edge and vertex hits are accepted, so closed meshes don't leak rays
// between adjacent faces. Returns a hit with t in (t_min, t_max].
std::optional<RayHit> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b,
                                         const Vec3& c, double t_min, double t_max);

// Binned-SAH bounding volume hierarchy over mesh triangles.
class Bvh {
public:
    explicit Bvh(const TriangleMesh& mesh);

    std::optional<RayHit> closest_hit(const Ray& ray, double t_min = 0.0,
                                      double t_max = 1e300) const;

    // Any intersection with t in (t_min, t_max]? Early-out occlusion query.
    bool occluded(const Ray& ray, double t_min, double t_max) const;

    int node_count() const { return static_cast<int>(nodes_.size()); }

private:
    struct Node {
        Vec3 lo, hi;
        int32_t left = -1, right = -1;  // internal nodes
        int32_t first = 0, count = 0;   // leaves (count == 0 means internal)
        uint8_t axis = 0;
    };

    struct Prim {
        Vec3 a, b, c;
        int face;
    };

    int build(std::vector<int>& order, int begin, int end, const std::vector<Vec3>& centroids,
              const std::vector<Vec3>& lo, const std::vector<Vec3>& hi);

    template <bool AnyHit>
    bool traverse(const Ray& ray, double t_min, double t_max, RayHit& best) const;

    std::vector<Node> nodes_;
    std::vector<Prim> prims_;
};

}  // namespace retex
