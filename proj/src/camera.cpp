#include "retex/camera.hpp"

namespace retex {

CameraMatrices camera_matrices(const Camera& cam) {
    Vec3 pos = cam.position();
    Vec3 back = normalized(pos);  // camera z axis, pointing away from the target
    Vec3 up{0.0, 0.0, 1.0};
    if (std::abs(dot(back, up)) > 0.999) up = {1.0, 0.0, 0.0};
    Vec3 right = normalized(cross(up, back));
    Vec3 cam_up = cross(back, right);

    Mat4 view = Mat4::identity();
    view.m[0] = right.x;  view.m[1] = right.y;  view.m[2] = right.z;  view.m[3] = -dot(right, pos);
    view.m[4] = cam_up.x; view.m[5] = cam_up.y; view.m[6] = cam_up.z; view.m[7] = -dot(cam_up, pos);
    view.m[8] = back.x;   view.m[9] = back.y;   view.m[10] = back.z;  view.m[11] = -dot(back, pos);

    double f = 1.0 / std::tan(deg_to_rad(cam.fov_y_deg) * 0.5);
    double n = kNearPlane, fa = kFarPlane;
    Mat4 proj{};  // square aspect
    proj.m[0] = f;
    proj.m[5] = f;
    proj.m[10] = (fa + n) / (n - fa);
    proj.m[11] = 2.0 * fa * n / (n - fa);
    proj.m[14] = -1.0;  // clip.w = camera-space depth

    CameraMatrices out;
    out.view = view;
    out.proj = proj;
    out.view_proj = proj * view;
    out.position = pos;
    return out;
}

}  // namespace retex
