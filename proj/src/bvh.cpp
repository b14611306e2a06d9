#include "retex/bvh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace retex {

namespace {

struct RayFrame {
    int kx, ky, kz;
    double sx, sy, sz;
};

RayFrame make_frame(const Vec3& dir) {
    RayFrame f;
    f.kz = 0;
    double ax = std::fabs(dir.x), ay = std::fabs(dir.y), az = std::fabs(dir.z);
    if (ay > ax && ay >= az) f.kz = 1;
    else if (az > ax && az > ay) f.kz = 2;
    f.kx = (f.kz + 1) % 3;
    f.ky = (f.kx + 1) % 3;
    if (dir[f.kz] < 0.0) std::swap(f.kx, f.ky);
    f.sx = dir[f.kx] / dir[f.kz];
    f.sy = dir[f.ky] / dir[f.kz];
    f.sz = 1.0 / dir[f.kz];
    return f;
}

std::optional<RayHit> intersect_frame(const RayFrame& f, const Vec3& org, const Vec3& va,
                                      const Vec3& vb, const Vec3& vc, double t_min, double t_max) {
    Vec3 a = va - org, b = vb - org, c = vc - org;
    double ax = a[f.kx] - f.sx * a[f.kz];
    double ay = a[f.ky] - f.sy * a[f.kz];
    double bx = b[f.kx] - f.sx * b[f.kz];
    double by = b[f.ky] - f.sy * b[f.kz];
    double cx = c[f.kx] - f.sx * c[f.kz];
    double cy = c[f.ky] - f.sy * c[f.kz];

    double u = cx * by - cy * bx;
    double v = ax * cy - ay * cx;
    double w = bx * ay - by * ax;
    if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return std::nullopt;

    double det = u + v + w;
    if (det == 0.0) return std::nullopt;

    double az = f.sz * a[f.kz];
    double bz = f.sz * b[f.kz];
    double cz = f.sz * c[f.kz];
    double t_scaled = u * az + v * bz + w * cz;
    double t = t_scaled / det;
    if (!(t > t_min && t <= t_max)) return std::nullopt;

    RayHit hit;
    hit.t = t;
    hit.u = v / det;  // weight of corner b
    hit.v = w / det;  // weight of corner c
    return hit;
}

bool slab_hit(const Vec3& lo, const Vec3& hi, const Vec3& org, const Vec3& inv_dir, double t_max,
              double& t_near) {
    double t0 = (lo.x - org.x) * inv_dir.x, t1 = (hi.x - org.x) * inv_dir.x;
    if (t0 > t1) std::swap(t0, t1);
    double t2 = (lo.y - org.y) * inv_dir.y, t3 = (hi.y - org.y) * inv_dir.y;
    if (t2 > t3) std::swap(t2, t3);
    double t4 = (lo.z - org.z) * inv_dir.z, t5 = (hi.z - org.z) * inv_dir.z;
    if (t4 > t5) std::swap(t4, t5);
    double tmin = std::max({t0, t2, t4, 0.0});
    double tmax = std::min({t1, t3, t5, t_max});
    t_near = tmin;
    return tmin <= tmax;
}

}  // namespace

std::optional<RayHit> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b,
                                         const Vec3& c, double t_min, double t_max) {
    RayFrame f = make_frame(ray.dir);
    return intersect_frame(f, ray.origin, a, b, c, t_min, t_max);
}

Bvh::Bvh(const TriangleMesh& mesh) {
    size_t n = mesh.face_count();
    std::vector<Vec3> lo(n), hi(n), centroids(n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = 0; i < n; ++i) {
        const Tri& t = mesh.triangles[i];
        const Vec3& a = mesh.vertices[t.v[0]];
        const Vec3& b = mesh.vertices[t.v[1]];
        const Vec3& c = mesh.vertices[t.v[2]];
        lo[i] = min3(a, min3(b, c));
        hi[i] = max3(a, max3(b, c));
        centroids[i] = (a + b + c) / 3.0;
    }
    nodes_.reserve(2 * n);
    build(order, 0, static_cast<int>(n), centroids, lo, hi);
    prims_.reserve(n);
    for (int idx : order) {
        const Tri& t = mesh.triangles[idx];
        prims_.push_back({mesh.vertices[t.v[0]], mesh.vertices[t.v[1]], mesh.vertices[t.v[2]], idx});
    }
}

int Bvh::build(std::vector<int>& order, int begin, int end, const std::vector<Vec3>& centroids,
               const std::vector<Vec3>& lo, const std::vector<Vec3>& hi) {
    int node_index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    Vec3 blo{1e300, 1e300, 1e300}, bhi{-1e300, -1e300, -1e300};
    Vec3 clo = blo, chi = bhi;
    for (int i = begin; i < end; ++i) {
        blo = min3(blo, lo[order[i]]);
        bhi = max3(bhi, hi[order[i]]);
        clo = min3(clo, centroids[order[i]]);
        chi = max3(chi, centroids[order[i]]);
    }
    nodes_[node_index].lo = blo;
    nodes_[node_index].hi = bhi;

    int count = end - begin;
    Vec3 cext = chi - clo;
    int axis = 0;
    if (cext.y > cext.x && cext.y >= cext.z) axis = 1;
    else if (cext.z > cext.x && cext.z > cext.y) axis = 2;

    if (count <= 4 || cext[axis] <= 1e-12) {
        nodes_[node_index].first = begin;
        nodes_[node_index].count = count;
        return node_index;
    }

    // Binned SAH split along the widest centroid axis.
    constexpr int kBins = 16;
    struct Bin {
        Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
        int count = 0;
    };
    std::array<Bin, kBins> bins;
    double scale = kBins / cext[axis];
    auto bin_of = [&](int prim) {
        int b = static_cast<int>((centroids[prim][axis] - clo[axis]) * scale);
        return std::clamp(b, 0, kBins - 1);
    };
    for (int i = begin; i < end; ++i) {
        Bin& b = bins[bin_of(order[i])];
        b.lo = min3(b.lo, lo[order[i]]);
        b.hi = max3(b.hi, hi[order[i]]);
        b.count++;
    }

    auto half_area = [](const Vec3& l, const Vec3& h) {
        Vec3 d = h - l;
        if (d.x < 0.0) return 0.0;
        return d.x * d.y + d.y * d.z + d.z * d.x;
    };

    double best_cost = 1e300;
    int best_split = -1;
    for (int split = 1; split < kBins; ++split) {
        Vec3 llo{1e300, 1e300, 1e300}, lhi{-1e300, -1e300, -1e300};
        Vec3 rlo = llo, rhi = lhi;
        int lc = 0, rc = 0;
        for (int b = 0; b < split; ++b) {
            if (!bins[b].count) continue;
            llo = min3(llo, bins[b].lo);
            lhi = max3(lhi, bins[b].hi);
            lc += bins[b].count;
        }
        for (int b = split; b < kBins; ++b) {
            if (!bins[b].count) continue;
            rlo = min3(rlo, bins[b].lo);
            rhi = max3(rhi, bins[b].hi);
            rc += bins[b].count;
        }
        if (!lc || !rc) continue;
        double cost = lc * half_area(llo, lhi) + rc * half_area(rlo, rhi);
        if (cost < best_cost) {
            best_cost = cost;
            best_split = split;
        }
    }

    int mid;
    if (best_split < 0) {
        mid = begin + count / 2;  // all centroids in one bin: median fallback
        std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                         [&](int a, int b) { return centroids[a][axis] < centroids[b][axis]; });
    } else {
        auto it = std::partition(order.begin() + begin, order.begin() + end,
                                 [&](int p) { return bin_of(p) < best_split; });
        mid = static_cast<int>(it - order.begin());
        if (mid == begin || mid == end) {
            mid = begin + count / 2;
            std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                             [&](int a, int b) { return centroids[a][axis] < centroids[b][axis]; });
        }
    }

    nodes_[node_index].axis = static_cast<uint8_t>(axis);
    int left = build(order, begin, mid, centroids, lo, hi);
    int right = build(order, mid, end, centroids, lo, hi);
    nodes_[node_index].left = left;
    nodes_[node_index].right = right;
    nodes_[node_index].count = 0;
    return node_index;
}

template <bool AnyHit>
bool Bvh::traverse(const Ray& ray, double t_min, double t_max, RayHit& best) const {
    if (nodes_.empty()) return false;
    RayFrame frame = make_frame(ray.dir);
    Vec3 inv_dir{1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z};

    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    bool found = false;
    double closest = t_max;

    while (sp > 0) {
        const Node& node = nodes_[stack[--sp]];
        double t_near;
        if (!slab_hit(node.lo, node.hi, ray.origin, inv_dir, closest, t_near)) continue;
        if (node.count > 0) {
            for (int i = 0; i < node.count; ++i) {
                const Prim& p = prims_[node.first + i];
                auto hit = intersect_frame(frame, ray.origin, p.a, p.b, p.c, t_min, closest);
                if (hit) {
                    found = true;
                    best = *hit;
                    best.face = p.face;
                    closest = hit->t;
                    if constexpr (AnyHit) return true;
                }
            }
        } else {
            // Near child first so closest-hit can prune the far one.
            int first = node.left, second = node.right;
            if (ray.dir[node.axis] < 0.0) std::swap(first, second);
            stack[sp++] = second;
            stack[sp++] = first;
        }
    }
    return found;
}

std::optional<RayHit> Bvh::closest_hit(const Ray& ray, double t_min, double t_max) const {
    RayHit hit;
    if (traverse<false>(ray, t_min, t_max, hit)) return hit;
    return std::nullopt;
}

bool Bvh::occluded(const Ray& ray, double t_min, double t_max) const {
    RayHit hit;
    return traverse<true>(ray, t_min, t_max, hit);
}

}  // namespace retex
