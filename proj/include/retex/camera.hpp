#pragma once

#include "retex/vec.hpp"

namespace retex {

inline constexpr double kNearPlane = 0.01;
inline constexpr double kFarPlane = 10.0;

// Viewpoint in spherical coordinates looking at the origin. Elevation is the
// polar angle from +Z in degrees (90 = equator), so the init poses 60/110
// straddle the equator as intended.
struct Camera {
    double azimuth_deg = 0.0;    // [0, 360)
    double elevation_deg = 90.0; // (0, 180)
    double radius = 1.2;
    double fov_y_deg = 50.0;
    int image_size = 512;

    Vec3 position() const {
        double az = deg_to_rad(azimuth_deg);
        double el = deg_to_rad(elevation_deg);
        double s = std::sin(el);
        return {radius * s * std::cos(az), radius * s * std::sin(az), radius * std::cos(el)};
    }
};

struct CameraMatrices {
    Mat4 view;       // world -> camera (right-handed, camera looks down -Z)
    Mat4 proj;       // perspective; clip.w is the camera-space depth
    Mat4 view_proj;
    Vec3 position;
};

// Right-handed look-at toward the origin with +Z up (falls back to +X up at
// the poles); perspective projection with the camera's fov_y, near 0.01,
// far 10.
CameraMatrices camera_matrices(const Camera& cam);

// Camera-space depth of a world point (positive in front of the camera).
inline double view_depth(const CameraMatrices& m, const Vec3& p) {
    Vec4 v = m.view.mul_point(p);
    return -v.z;
}

}  // namespace retex
