#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "retex/config.hpp"
#include "retex/denoise.hpp"
#include "retex/mesh.hpp"
#include "retex/raster.hpp"
#include "retex/schedule.hpp"
#include "retex/viewselect.hpp"

namespace retex {

// Full run configuration. Defaults mirror the reference setup: 8192
// candidates on the 1.0-1.4 shell, 5 steps from 307 texels upsampled by
// 1.5, slope 2.5, 512x512 working renders.
struct PipelineConfig {
    // [input]
    std::string mesh_path;
    std::string prompt;

    // [viewselect]
    int candidates = 8192;
    double radius_min = 1.0;
    double radius_max = 1.4;
    double max_angle_deg = 45.0;

    // [schedule]
    int t_full = 1000;
    double beta_start = 0.00085;
    double beta_end = 0.012;
    int reduced_steps = 10;

    // [pipeline]
    int steps = 5;
    int base_resolution = 307;
    double upsample_factor = 1.5;
    double slope = 2.5;
    int t1 = 2;
    int render_size = 512;
    double fov_y_deg = 50.0;
    double init_radius = 2.4;  // six init poses sit outside the candidate shell
    std::string projection_sampling = "bilinear";  // or "nearest"
    uint64_t seed = 0;

    // [denoiser]
    std::string denoiser = "procedural";  // oracle | procedural | remote
    std::string oracle_texture;           // PNG path, oracle only
    std::string pattern = "noise";        // procedural only
    std::string remote_endpoint;
    int remote_timeout_ms = 10000;
    int remote_retries = 3;
    int remote_backoff_ms = 200;

    void validate() const;
    static PipelineConfig from_map(const ConfigMap& map);
    ConfigMap to_map() const;
    static PipelineConfig load(const std::string& path);
    void save(const std::string& path) const;

    // "section.key=value", validated like the file path.
    void apply_override(const std::string& spec);

    SampleMode sampling_mode() const;
};

// Denoiser per config; oracle loads its ground-truth texture, remote honors
// the RETEX_REMOTE_ENDPOINT environment override.
std::unique_ptr<Denoiser> make_denoiser(const PipelineConfig& cfg, const TriangleMesh* mesh);

struct StageParams {
    const TriangleMesh* mesh = nullptr;
    const NoiseSchedule* sched = nullptr;
    const StepPlan* plan = nullptr;
    Denoiser* denoiser = nullptr;
    std::string prompt;
    double fov_y_deg = 50.0;
    int render_size = 512;
    double init_radius = 2.4;
    SampleMode projection_sampling = SampleMode::Bilinear;
    uint64_t seed = 0;
};

// The fixed six initialization poses (azimuth 30..330 step 60, elevation
// alternating 60/110) at the given radius.
std::vector<Camera> init_poses(double radius, double fov_y_deg, int render_size);

// Render depth per pose, generate an init image, project it into a blank
// texture at the base resolution. Throws EmptyProjection when nothing lands.
UvTexture stage1_init(const StageParams& p);

// Greedy nearest-neighbor angular tour over the selected views, starting
// from the one covering the largest face area.
std::vector<int> order_views(const SelectedViews& selected, const VisibilityMatrix& vis,
                             const CandidateSet& candidates);

struct RunState {
    int step = 1;  // 1-based
    UvTexture texture;
    std::vector<Camera> views;  // in processing order
    nlohmann::json step_logs = nlohmann::json::array();
};

// One recursive-optimization step: refine every view in order at the
// current resolution, then upsample (except after the final step).
void stage2_step(RunState& state, const StageParams& p);

struct RunResult {
    UvTexture texture;
    nlohmann::json report;
};

// load -> normalize -> select views -> stage 1 -> N x stage 2. On error a
// structured report of completed phases is attached to the rethrown
// exception path via `partial_report`.
RunResult run_pipeline(const PipelineConfig& cfg, Denoiser* denoiser_override = nullptr,
                       nlohmann::json* partial_report = nullptr);

}  // namespace retex
