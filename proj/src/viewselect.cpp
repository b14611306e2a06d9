#include "retex/viewselect.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <queue>

#include "retex/bvh.hpp"
#include "retex/errors.hpp"
#include "retex/rng.hpp"

namespace retex {

CandidateSet sample_candidates(int k, double r_min, double r_max, uint64_t seed,
                               const Camera& proto) {
    if (k < 1) throw ConfigError("sample_candidates: K must be >= 1");
    if (!(r_min > 0.0 && r_min <= r_max)) throw ConfigError("sample_candidates: bad radius range");

    CandidateSet set;
    set.seed = seed;
    set.cameras.reserve(k);
    Rng rng(seed);
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < k; ++i) {
        double z = 1.0 - (2.0 * i + 1.0) / k;  // strictly inside (-1, 1)
        double azimuth = std::fmod(i * golden_angle, 2.0 * kPi);
        if (azimuth < 0.0) azimuth += 2.0 * kPi;
        Camera cam = proto;
        cam.azimuth_deg = rad_to_deg(azimuth);
        cam.elevation_deg = rad_to_deg(std::acos(z));
        cam.radius = rng.uniform(r_min, r_max);
        set.cameras.push_back(cam);
    }
    return set;
}

VisibilityMatrix VisibilityMatrix::empty(int faces, int candidates) {
    VisibilityMatrix m;
    m.faces = faces;
    m.candidates = candidates;
    m.bits.assign(static_cast<size_t>(candidates) * ((static_cast<size_t>(faces) + 63) / 64), 0);
    return m;
}

int VisibilityMatrix::column_popcount(int candidate) const {
    size_t w = words_per_candidate();
    int n = 0;
    for (size_t i = 0; i < w; ++i) n += std::popcount(bits[candidate * w + i]);
    return n;
}

VisibilityMatrix compute_visibility(const TriangleMesh& mesh, const CandidateSet& candidates,
                                    double max_angle_deg) {
    const int n_faces = static_cast<int>(mesh.face_count());
    const int n_cand = static_cast<int>(candidates.cameras.size());
    VisibilityMatrix vis = VisibilityMatrix::empty(n_faces, n_cand);
    vis.face_areas = mesh.face_areas;

    Vec3 lo, hi;
    mesh.bounds(lo, hi);
    Bvh bvh(mesh);
    const double cos_max = std::cos(deg_to_rad(max_angle_deg));
    const double tie_eps = 1e-6;

    std::vector<uint8_t> skipped(n_cand, 0);

#pragma omp parallel for schedule(dynamic, 16)
    for (int c = 0; c < n_cand; ++c) {
        Vec3 pos = candidates.cameras[c].position();
        if (pos.x >= lo.x && pos.x <= hi.x && pos.y >= lo.y && pos.y <= hi.y && pos.z >= lo.z &&
            pos.z <= hi.z) {
            skipped[c] = 1;  // camera inside the mesh bounding box
            continue;
        }
        for (int f = 0; f < n_faces; ++f) {
            if (mesh.face_areas[f] <= 0.0) continue;
            Vec3 to_cam = pos - mesh.face_centroids[f];
            double dist = norm(to_cam);
            if (dist <= 0.0) continue;
            if (dot(mesh.face_normals[f], to_cam) / dist <= cos_max) continue;  // grazing

            // The ray aims at the centroid; the face is visible iff nothing
            // is hit meaningfully earlier (tie epsilon 1e-6).
            Ray ray{pos, mesh.face_centroids[f] - pos};  // t == 1 at the centroid
            if (!bvh.occluded(ray, 0.0, 1.0 - tie_eps / dist)) vis.set_bit(f, c);
        }
    }

    for (int c = 0; c < n_cand; ++c)
        if (skipped[c]) vis.skipped_candidates.push_back(c);
    return vis;
}

namespace {

double column_gain(const VisibilityMatrix& vis, int candidate,
                   const std::vector<uint64_t>& covered) {
    size_t w = vis.words_per_candidate();
    const uint64_t* col = vis.bits.data() + candidate * w;
    double gain = 0.0;
    for (size_t i = 0; i < w; ++i) {
        uint64_t fresh = col[i] & ~covered[i];
        while (fresh) {
            int b = std::countr_zero(fresh);
            gain += vis.face_areas[i * 64 + b];
            fresh &= fresh - 1;
        }
    }
    return gain;
}

}  // namespace

SelectedViews greedy_cover(const VisibilityMatrix& vis) {
    if (vis.faces == 0 || vis.candidates == 0)
        throw ConfigError("greedy_cover: empty visibility matrix");

    SelectedViews out;
    size_t w = vis.words_per_candidate();

    // Coverable universe: positive-area faces seen by at least one candidate.
    std::vector<uint64_t> coverable(w, 0);
    for (int c = 0; c < vis.candidates; ++c)
        for (size_t i = 0; i < w; ++i) coverable[i] |= vis.bits[c * w + i];
    for (int f = 0; f < vis.faces; ++f) {
        bool area_ok = vis.face_areas[f] > 0.0;
        bool seen = (coverable[f / 64] >> (f % 64)) & 1;
        if (!area_ok) coverable[f / 64] &= ~(uint64_t(1) << (f % 64));
        if (area_ok && !seen) out.uncoverable_faces.push_back(f);
    }
    int n_coverable = 0;
    for (size_t i = 0; i < w; ++i) n_coverable += std::popcount(coverable[i]);

    std::vector<uint64_t> covered(w, 0);
    int n_covered = 0;

    // Lazy greedy: gains only shrink as coverage grows, so a stale heap
    // entry re-evaluated at the top is safe. Ties break to lowest index.
    struct Entry {
        double gain;
        int candidate;
        int stamp;
        bool operator<(const Entry& o) const {
            if (gain != o.gain) return gain < o.gain;
            return candidate > o.candidate;
        }
    };
    std::priority_queue<Entry> heap;
    for (int c = 0; c < vis.candidates; ++c) {
        double g = column_gain(vis, c, covered);
        if (g > 0.0) heap.push({g, c, 0});
    }

    int stamp = 0;
    while (n_covered < n_coverable && !heap.empty()) {
        Entry top = heap.top();
        heap.pop();
        if (top.stamp != stamp) {
            double g = column_gain(vis, top.candidate, covered);
            if (g > 0.0) heap.push({g, top.candidate, stamp});
            continue;
        }
        // Fresh entry at the top: select it.
        const uint64_t* col = vis.bits.data() + top.candidate * w;
        int new_faces = 0;
        for (size_t i = 0; i < w; ++i) {
            uint64_t fresh = (col[i] & coverable[i]) & ~covered[i];
            new_faces += std::popcount(fresh);
            covered[i] |= fresh;
        }
        if (new_faces == 0) continue;
        n_covered += new_faces;
        out.indices.push_back(top.candidate);
        out.new_faces_per_view.push_back(new_faces);
        ++stamp;
    }

    out.covered_faces.assign(vis.faces, 0);
    double covered_area = 0.0, total_area = 0.0;
    for (int f = 0; f < vis.faces; ++f) {
        total_area += vis.face_areas[f];
        if ((covered[f / 64] >> (f % 64)) & 1) {
            out.covered_faces[f] = 1;
            covered_area += vis.face_areas[f];
        }
    }
    out.coverage_area_fraction = total_area > 0.0 ? covered_area / total_area : 0.0;
    return out;
}

SelectedViews exact_cover_bruteforce(const VisibilityMatrix& vis) {
    if (vis.candidates > 20)
        throw TooLarge("exact_cover_bruteforce: more than 20 candidates");
    if (vis.faces == 0 || vis.candidates == 0)
        throw ConfigError("exact_cover_bruteforce: empty visibility matrix");
    if (vis.faces > 64 * 8)
        throw TooLarge("exact_cover_bruteforce: too many faces for the enumeration oracle");

    size_t w = vis.words_per_candidate();
    std::vector<uint64_t> target(w, 0);
    for (int c = 0; c < vis.candidates; ++c)
        for (size_t i = 0; i < w; ++i) target[i] |= vis.bits[c * w + i];
    for (int f = 0; f < vis.faces; ++f)
        if (vis.face_areas[f] <= 0.0) target[f / 64] &= ~(uint64_t(1) << (f % 64));

    SelectedViews out;
    for (int f = 0; f < vis.faces; ++f)
        if (vis.face_areas[f] > 0.0 && !((target[f / 64] >> (f % 64)) & 1))
            out.uncoverable_faces.push_back(f);

    uint32_t best_mask = 0;
    int best_size = vis.candidates + 1;
    std::vector<uint64_t> acc(w);
    const uint32_t limit = uint32_t(1) << vis.candidates;
    for (uint32_t mask = 0; mask < limit; ++mask) {
        int size = std::popcount(mask);
        if (size >= best_size) continue;
        std::fill(acc.begin(), acc.end(), 0);
        for (int c = 0; c < vis.candidates; ++c)
            if ((mask >> c) & 1)
                for (size_t i = 0; i < w; ++i) acc[i] |= vis.bits[c * w + i];
        bool full = true;
        for (size_t i = 0; i < w; ++i)
            if ((acc[i] & target[i]) != target[i]) {
                full = false;
                break;
            }
        if (full) {
            best_size = size;
            best_mask = mask;
        }
    }

    std::vector<uint64_t> covered(w, 0);
    for (int c = 0; c < vis.candidates; ++c) {
        if (!((best_mask >> c) & 1)) continue;
        out.indices.push_back(c);
        int fresh = 0;
        for (size_t i = 0; i < w; ++i) {
            uint64_t nw = (vis.bits[c * w + i] & target[i]) & ~covered[i];
            fresh += std::popcount(nw);
            covered[i] |= nw;
        }
        out.new_faces_per_view.push_back(fresh);
    }
    out.covered_faces.assign(vis.faces, 0);
    double covered_area = 0.0, total_area = 0.0;
    for (int f = 0; f < vis.faces; ++f) {
        total_area += vis.face_areas[f];
        if ((covered[f / 64] >> (f % 64)) & 1) {
            out.covered_faces[f] = 1;
            covered_area += vis.face_areas[f];
        }
    }
    out.coverage_area_fraction = total_area > 0.0 ? covered_area / total_area : 0.0;
    return out;
}

}  // namespace retex
