#include "retex/schedule.hpp"

#include <algorithm>

namespace retex {

double NoiseSchedule::alpha_bar_reduced(int t) const {
    return alpha_bars[reduced_to_full[t]];
}

NoiseSchedule build_schedule(int t_full, double beta_start, double beta_end, int reduced_steps) {
    if (t_full < 1 || reduced_steps < 1 || reduced_steps > t_full)
        throw ConfigError("build_schedule: invalid step counts");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
        throw ConfigError("build_schedule: invalid beta range");

    NoiseSchedule s;
    s.t_full = t_full;
    s.reduced_steps = reduced_steps;
    s.betas.resize(t_full);
    for (int t = 0; t < t_full; ++t)
        s.betas[t] = t_full == 1 ? beta_start
                                 : beta_start + (beta_end - beta_start) * t / (t_full - 1.0);

    s.alpha_bars.resize(t_full + 1);
    s.alpha_bars[0] = 1.0;
    for (int t = 1; t <= t_full; ++t) s.alpha_bars[t] = s.alpha_bars[t - 1] * (1.0 - s.betas[t - 1]);

    s.reduced_to_full.resize(reduced_steps + 1);
    s.reduced_to_full[0] = 0;
    for (int k = 1; k <= reduced_steps; ++k) {
        int full = static_cast<int>(std::lround(static_cast<double>(k) * t_full / reduced_steps));
        s.reduced_to_full[k] = std::clamp(full, 1, t_full);
    }
    for (int k = 1; k <= reduced_steps; ++k)
        if (s.reduced_to_full[k] <= s.reduced_to_full[k - 1])
            throw ConfigError("build_schedule: reduced ladder not strictly increasing");
    return s;
}

int step_timestep(int n, double slope, int floor_t, int ceil_t) {
    if (n < 1) throw ConfigError("step_timestep: n must be >= 1");
    double v = std::max(static_cast<double>(ceil_t) - slope * n, static_cast<double>(floor_t));
    int r = static_cast<int>(std::floor(v + 0.5));  // half rounds up
    return std::clamp(r, floor_t, ceil_t);
}

std::vector<int> resolution_plan(int base, double factor, int n) {
    if (base < 1 || factor <= 1.0 || n < 1) throw ConfigError("resolution_plan: invalid arguments");
    std::vector<int> out(n);
    out[0] = base;
    for (int k = 1; k < n; ++k) out[k] = static_cast<int>(std::floor(factor * out[k - 1]));
    return out;
}

StepPlan StepPlan::make(int steps, int base_resolution, double factor, double slope, int t1) {
    StepPlan p;
    p.steps = steps;
    p.slope = slope;
    p.upsample_factor = factor;
    p.t1 = t1;
    p.resolutions = resolution_plan(base_resolution, factor, steps);
    p.timesteps.resize(steps);
    for (int n = 1; n <= steps; ++n) {
        StepTimesteps& ts = p.timesteps[n - 1];
        ts.t_n = step_timestep(n, slope);
        ts.t1 = t1;
        ts.t2 = ts.t_n - 1;
        if (!(ts.t1 < ts.t2 && ts.t2 < ts.t_n))
            throw ConfigError("step plan: need t1 < t2 < t_n at step " + std::to_string(n));
    }
    return p;
}

}  // namespace retex
