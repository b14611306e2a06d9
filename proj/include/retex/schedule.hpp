#pragma once

#include <cmath>
#include <vector>

#include "retex/errors.hpp"
#include "retex/image.hpp"

namespace retex {

// Diffusion schedule: beta ramp, cumulative alpha-bar table, and the reduced
// timestep ladder the sampler actually walks. Reduced index 0 is the clean
// boundary (alpha_bar == 1).
struct NoiseSchedule {
    int t_full = 1000;
    std::vector<double> betas;       // betas[t-1] for full step t in 1..t_full
    std::vector<double> alpha_bars;  // alpha_bars[t] for t in 0..t_full; [0] == 1
    int reduced_steps = 10;
    std::vector<int> reduced_to_full;  // [k] for k in 0..reduced_steps; [0] == 0

    double alpha_bar_reduced(int t) const;  // t in 0..reduced_steps
};

NoiseSchedule build_schedule(int t_full = 1000, double beta_start = 0.00085,
                             double beta_end = 0.012, int reduced_steps = 10);

// t_n = round(max(ceil - slope*n, floor)), half rounds up.
int step_timestep(int n, double slope = 2.5, int floor_t = 5, int ceil_t = 10);

// r_1 = base; r_{k+1} = floor(factor * r_k). Defaults give 307..1552.
std::vector<int> resolution_plan(int base = 307, double factor = 1.5, int n = 5);

struct StepTimesteps {
    int t_n = 10;
    int t1 = 2;
    int t2 = 9;
};

// Per-step constants of the recursive optimization.
struct StepPlan {
    int steps = 5;
    double slope = 2.5;
    double upsample_factor = 1.5;
    int t1 = 2;
    std::vector<int> resolutions;
    std::vector<StepTimesteps> timesteps;  // one per step

    static StepPlan make(int steps = 5, int base_resolution = 307, double factor = 1.5,
                         double slope = 2.5, int t1 = 2);
};

namespace detail {
template <typename T>
Image<T> affine_mix(const Image<T>& a, const Image<T>& b, double ca, double cb) {
    Image<T> out(a.width, a.height, a.channels);
    const T fa = static_cast<T>(ca), fb = static_cast<T>(cb);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = fa * a.data[i] + fb * b.data[i];
    return out;
}
}  // namespace detail

// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps, at reduced timestep t.
template <typename T>
Image<T> forward_diffuse(const Image<T>& x0, int t, const Image<T>& eps,
                         const NoiseSchedule& sched) {
    if (!x0.same_shape(eps)) throw ShapeMismatch("forward_diffuse: x0 vs eps");
    if (t < 1 || t > sched.reduced_steps)
        throw ConfigError("forward_diffuse: reduced timestep out of range");
    double abar = sched.alpha_bar_reduced(t);
    return detail::affine_mix(x0, eps, std::sqrt(abar), std::sqrt(1.0 - abar));
}

// Diffuse z from reduced level t_from up to t_to sharing one eps draw:
// sqrt(abar_to/abar_from) z + sqrt(1 - abar_to/abar_from) eps.
// t_from == t_to returns z unchanged, bit-exact.
template <typename T>
Image<T> adaptive_noise(const Image<T>& z, int t_from, int t_to, const Image<T>& eps,
                        const NoiseSchedule& sched) {
    if (!z.same_shape(eps)) throw ShapeMismatch("adaptive_noise: z vs eps");
    if (t_from > t_to) throw ConfigError("adaptive_noise: t_from > t_to");
    if (t_from < 0 || t_to > sched.reduced_steps)
        throw ConfigError("adaptive_noise: reduced timestep out of range");
    if (t_from == t_to) return z;
    double ratio = sched.alpha_bar_reduced(t_to) / sched.alpha_bar_reduced(t_from);
    return detail::affine_mix(z, eps, std::sqrt(ratio), std::sqrt(1.0 - ratio));
}

// One DDIM update x_i -> x_{i-1}. eps may be null when sigma == 0; the
// two-argument-shorter overload below is the deterministic path.
template <typename T>
Image<T> ddim_step(const Image<T>& x_i, const Image<T>& eps_pred, int i, double sigma,
                   const Image<T>* eps, const NoiseSchedule& sched) {
    if (!x_i.same_shape(eps_pred)) throw ShapeMismatch("ddim_step: x_i vs eps_pred");
    if (i < 1 || i > sched.reduced_steps) throw ConfigError("ddim_step: reduced index out of range");
    double abar_i = sched.alpha_bar_reduced(i);
    double abar_prev = sched.alpha_bar_reduced(i - 1);
    if (sigma * sigma > 1.0 - abar_prev + 1e-15)
        throw ConfigError("ddim_step: sigma^2 exceeds 1 - alpha_bar_{i-1}");

    // x0_pred = (x_i - sqrt(1-abar_i) eps_pred) / sqrt(abar_i)
    // out     = sqrt(abar_prev) x0_pred + sqrt(1-abar_prev-sigma^2) eps_pred + sigma eps
    double c_x = std::sqrt(abar_prev / abar_i);
    double c_e = std::sqrt(std::max(0.0, 1.0 - abar_prev - sigma * sigma)) -
                 std::sqrt(abar_prev / abar_i) * std::sqrt(1.0 - abar_i);
    Image<T> out = detail::affine_mix(x_i, eps_pred, c_x, c_e);
    if (sigma != 0.0) {
        if (!eps || !eps->same_shape(x_i)) throw ShapeMismatch("ddim_step: eps");
        const T fs = static_cast<T>(sigma);
        for (size_t k = 0; k < out.data.size(); ++k) out.data[k] += fs * eps->data[k];
    }
    return out;
}

// Deterministic (sigma = 0) DDIM update.
template <typename T>
Image<T> ddim_step(const Image<T>& x_i, const Image<T>& eps_pred, int i,
                   const NoiseSchedule& sched) {
    return ddim_step(x_i, eps_pred, i, 0.0, static_cast<const Image<T>*>(nullptr), sched);
}

}  // namespace retex
