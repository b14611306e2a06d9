#pragma once

#include "retex/image.hpp"
#include "retex/mesh.hpp"

namespace retex {

// Procedural fixtures used by tests, demos and the make-fixture CLI command.

// Unit quad in the z=0 plane, UVs spanning the full texture square.
TriangleMesh make_quad();

// Axis-aligned cube spanning [-1,1]^3, 12 triangles, each cube face mapped
// to its own cell of a 3x2 UV grid. flip_inward reverses all windings.
TriangleMesh make_cube(bool flip_inward = false);

// Icosphere with `subdivisions` rounds of 4-way face splits (20 * 4^s
// faces), unit radius. UVs come from the classic icosahedron net laid out
// in a 5.5 x 1 strip: each of the 20 base triangles is a chart, so charts
// are large and interior UV space is continuous.
TriangleMesh make_icosphere(int subdivisions);

// Deterministic ground-truth texture: horizontal/vertical color gradients
// with a checkerboard in the blue channel. Evaluable analytically per UV.
void checker_gradient_color(double u, double v, int cells, float rgb[3]);
ImageF checker_gradient_image(int resolution, int cells = 8);

}  // namespace retex
