#pragma once

#include <cstdint>
#include <vector>

#include "retex/camera.hpp"
#include "retex/mesh.hpp"

namespace retex {

struct CandidateSet {
    std::vector<Camera> cameras;
    uint64_t seed = 0;
};

// Directions on a deterministic Fibonacci lattice, radii uniform in
// [r_min, r_max] from the seeded RNG. Identical (K, seed, proto) give
// identical sets. proto supplies fov and image size.
CandidateSet sample_candidates(int k, double r_min, double r_max, uint64_t seed,
                               const Camera& proto = Camera{});

// faces x candidates coverage relation. bit(f, c) is set iff face f passes
// the grazing-angle test and an unobstructed ray reaches its centroid from
// candidate c.
struct VisibilityMatrix {
    int faces = 0;
    int candidates = 0;
    std::vector<uint64_t> bits;  // candidate-major rows of ceil(faces/64) words
    std::vector<double> face_areas;
    std::vector<int> skipped_candidates;  // inside the mesh bounding box

    static VisibilityMatrix empty(int faces, int candidates);
    size_t words_per_candidate() const { return (static_cast<size_t>(faces) + 63) / 64; }
    bool bit(int face, int candidate) const {
        return (bits[candidate * words_per_candidate() + face / 64] >> (face % 64)) & 1;
    }
    void set_bit(int face, int candidate) {
        bits[candidate * words_per_candidate() + face / 64] |= uint64_t(1) << (face % 64);
    }
    int column_popcount(int candidate) const;
};

VisibilityMatrix compute_visibility(const TriangleMesh& mesh, const CandidateSet& candidates,
                                    double max_angle_deg = 45.0);

struct SelectedViews {
    std::vector<int> indices;               // selection order
    std::vector<uint8_t> covered_faces;     // union of the chosen columns
    double coverage_area_fraction = 0.0;    // over total mesh area
    std::vector<int> uncoverable_faces;     // no candidate sees them
    std::vector<int> new_faces_per_view;    // marginal gain at selection time
};

// Area-weighted lazy greedy: repeatedly pick the candidate adding the most
// newly covered face area (ties to the lowest index) until every coverable
// face is covered.
SelectedViews greedy_cover(const VisibilityMatrix& vis);

// Minimum-cardinality cover by subset enumeration; candidate count <= 20
// (throws TooLarge otherwise). Test oracle for greedy_cover.
SelectedViews exact_cover_bruteforce(const VisibilityMatrix& vis);

}  // namespace retex
