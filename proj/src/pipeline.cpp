#include "retex/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "retex/errors.hpp"
#include "retex/png_io.hpp"
#include "retex/rng.hpp"

namespace retex {

using nlohmann::json;

namespace {

double ms_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

ImageF normalize_depth(const FrameBuffer& fb) {
    float z_min = std::numeric_limits<float>::infinity();
    float z_max = -std::numeric_limits<float>::infinity();
    for (size_t i = 0; i < fb.depth.size(); ++i) {
        if (!fb.coverage[i]) continue;
        z_min = std::min(z_min, fb.depth[i]);
        z_max = std::max(z_max, fb.depth[i]);
    }
    ImageF out(fb.width, fb.height, 1, 0.0f);
    if (z_min > z_max) return out;
    float range = z_max - z_min;
    for (size_t i = 0; i < fb.depth.size(); ++i) {
        if (!fb.coverage[i]) continue;
        out.data[i] = range > 0.0f ? (z_max - fb.depth[i]) / range : 1.0f;
    }
    return out;
}

}  // namespace

void PipelineConfig::validate() const {
    if (mesh_path.empty()) throw ConfigError("config: [input] mesh is required");
    if (candidates < 1) throw ConfigError("config: [viewselect] candidates must be >= 1");
    if (!(radius_min > 0.0 && radius_min <= radius_max))
        throw ConfigError("config: [viewselect] bad radius range");
    if (!(max_angle_deg > 0.0 && max_angle_deg < 90.0))
        throw ConfigError("config: [viewselect] max_angle_deg must be in (0,90)");
    if (steps < 1) throw ConfigError("config: [pipeline] steps must be >= 1");
    if (base_resolution < 1) throw ConfigError("config: [pipeline] base_resolution must be >= 1");
    if (upsample_factor <= 1.0) throw ConfigError("config: [pipeline] upsample_factor must be > 1");
    if (render_size < 8) throw ConfigError("config: [pipeline] render_size too small");
    if (init_radius <= 0.0) throw ConfigError("config: [pipeline] init_radius must be > 0");
    if (!(fov_y_deg > 1.0 && fov_y_deg < 179.0)) throw ConfigError("config: bad fov_y");
    if (projection_sampling != "bilinear" && projection_sampling != "nearest")
        throw ConfigError("config: projection_sampling must be bilinear or nearest");
    if (denoiser != "oracle" && denoiser != "procedural" && denoiser != "remote")
        throw ConfigError("config: denoiser must be oracle, procedural or remote");
    if (denoiser == "oracle" && oracle_texture.empty())
        throw ConfigError("config: oracle denoiser needs [denoiser] oracle_texture");
    if (t1 < 1) throw ConfigError("config: t1 must be >= 1");
    if (reduced_steps < 2) throw ConfigError("config: reduced_steps must be >= 2");
    // Shared validation of the derived tables: throws on bad ranges.
    build_schedule(t_full, beta_start, beta_end, reduced_steps);
    StepPlan::make(steps, base_resolution, upsample_factor, slope, t1);
}

PipelineConfig PipelineConfig::from_map(const ConfigMap& m) {
    PipelineConfig c;
    c.mesh_path = m.get("input", "mesh", "");
    c.prompt = m.get("input", "prompt", "");
    c.candidates = m.get_int("viewselect", "candidates", c.candidates);
    c.radius_min = m.get_double("viewselect", "radius_min", c.radius_min);
    c.radius_max = m.get_double("viewselect", "radius_max", c.radius_max);
    c.max_angle_deg = m.get_double("viewselect", "max_angle_deg", c.max_angle_deg);
    c.t_full = m.get_int("schedule", "t_full", c.t_full);
    c.beta_start = m.get_double("schedule", "beta_start", c.beta_start);
    c.beta_end = m.get_double("schedule", "beta_end", c.beta_end);
    c.reduced_steps = m.get_int("schedule", "reduced_steps", c.reduced_steps);
    c.steps = m.get_int("pipeline", "steps", c.steps);
    c.base_resolution = m.get_int("pipeline", "base_resolution", c.base_resolution);
    c.upsample_factor = m.get_double("pipeline", "upsample_factor", c.upsample_factor);
    c.slope = m.get_double("pipeline", "slope", c.slope);
    c.t1 = m.get_int("pipeline", "t1", c.t1);
    c.render_size = m.get_int("pipeline", "render_size", c.render_size);
    c.fov_y_deg = m.get_double("pipeline", "fov_y", c.fov_y_deg);
    c.init_radius = m.get_double("pipeline", "init_radius", c.init_radius);
    c.projection_sampling = m.get("pipeline", "projection_sampling", c.projection_sampling);
    c.seed = m.get_u64("pipeline", "seed", c.seed);
    c.denoiser = m.get("denoiser", "kind", c.denoiser);
    c.oracle_texture = m.get("denoiser", "oracle_texture", c.oracle_texture);
    c.pattern = m.get("denoiser", "pattern", c.pattern);
    c.remote_endpoint = m.get("denoiser", "endpoint", c.remote_endpoint);
    c.remote_timeout_ms = m.get_int("denoiser", "timeout_ms", c.remote_timeout_ms);
    c.remote_retries = m.get_int("denoiser", "retries", c.remote_retries);
    c.remote_backoff_ms = m.get_int("denoiser", "backoff_ms", c.remote_backoff_ms);
    return c;
}

ConfigMap PipelineConfig::to_map() const {
    ConfigMap m;
    auto num = [](double v) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        return s.str();
    };
    m.set("input", "mesh", mesh_path);
    m.set("input", "prompt", prompt);
    m.set("viewselect", "candidates", std::to_string(candidates));
    m.set("viewselect", "radius_min", num(radius_min));
    m.set("viewselect", "radius_max", num(radius_max));
    m.set("viewselect", "max_angle_deg", num(max_angle_deg));
    m.set("schedule", "t_full", std::to_string(t_full));
    m.set("schedule", "beta_start", num(beta_start));
    m.set("schedule", "beta_end", num(beta_end));
    m.set("schedule", "reduced_steps", std::to_string(reduced_steps));
    m.set("pipeline", "steps", std::to_string(steps));
    m.set("pipeline", "base_resolution", std::to_string(base_resolution));
    m.set("pipeline", "upsample_factor", num(upsample_factor));
    m.set("pipeline", "slope", num(slope));
    m.set("pipeline", "t1", std::to_string(t1));
    m.set("pipeline", "render_size", std::to_string(render_size));
    m.set("pipeline", "fov_y", num(fov_y_deg));
    m.set("pipeline", "init_radius", num(init_radius));
    m.set("pipeline", "projection_sampling", projection_sampling);
    m.set("pipeline", "seed", std::to_string(seed));
    m.set("denoiser", "kind", denoiser);
    if (!oracle_texture.empty()) m.set("denoiser", "oracle_texture", oracle_texture);
    m.set("denoiser", "pattern", pattern);
    if (!remote_endpoint.empty()) m.set("denoiser", "endpoint", remote_endpoint);
    m.set("denoiser", "timeout_ms", std::to_string(remote_timeout_ms));
    m.set("denoiser", "retries", std::to_string(remote_retries));
    m.set("denoiser", "backoff_ms", std::to_string(remote_backoff_ms));
    return m;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    return from_map(ConfigMap::parse_file(path));
}

void PipelineConfig::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write config: " + path);
    f << to_map().serialize();
}

void PipelineConfig::apply_override(const std::string& spec) {
    size_t eq = spec.find('=');
    size_t dot = spec.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override must look like section.key=value: " + spec);
    ConfigMap m = to_map();
    m.set(spec.substr(0, dot), spec.substr(dot + 1, eq - dot - 1), spec.substr(eq + 1));
    *this = from_map(m);
}

SampleMode PipelineConfig::sampling_mode() const {
    return projection_sampling == "nearest" ? SampleMode::Nearest : SampleMode::Bilinear;
}

std::unique_ptr<Denoiser> make_denoiser(const PipelineConfig& cfg, const TriangleMesh* mesh) {
    if (cfg.denoiser == "oracle") {
        if (cfg.oracle_texture.empty())
            throw ConfigError("oracle denoiser needs [denoiser] oracle_texture");
        ImageF gt = read_png_rgb8(cfg.oracle_texture, /*flip_rows=*/true);
        return std::make_unique<OracleDenoiser>(mesh, gt);
    }
    if (cfg.denoiser == "procedural")
        return std::make_unique<ProceduralDenoiser>(cfg.pattern, cfg.seed);
    if (cfg.denoiser == "remote") {
        RemoteConfig rc;
        const char* env = std::getenv("RETEX_REMOTE_ENDPOINT");
        rc.endpoint = env && *env ? env : cfg.remote_endpoint;
        rc.timeout_ms = cfg.remote_timeout_ms;
        rc.retries = cfg.remote_retries;
        rc.backoff_ms = cfg.remote_backoff_ms;
        return std::make_unique<RemoteDenoiser>(rc);
    }
    throw ConfigError("unknown denoiser kind: " + cfg.denoiser);
}

std::vector<Camera> init_poses(double radius, double fov_y_deg, int render_size) {
    std::vector<Camera> poses;
    const double azimuths[6] = {30, 90, 150, 210, 270, 330};
    const double elevations[6] = {60, 110, 60, 110, 60, 110};
    for (int i = 0; i < 6; ++i) {
        Camera cam;
        cam.azimuth_deg = azimuths[i];
        cam.elevation_deg = elevations[i];
        cam.radius = radius;
        cam.fov_y_deg = fov_y_deg;
        cam.image_size = render_size;
        poses.push_back(cam);
    }
    return poses;
}

UvTexture stage1_init(const StageParams& p) {
    const int res = p.plan->resolutions.front();
    UvTexture texture = UvTexture::blank(res);
    TexelSurfaceTable table = build_texel_table(*p.mesh, res);

    std::vector<Camera> poses = init_poses(p.init_radius, p.fov_y_deg, p.render_size);
    for (size_t i = 0; i < poses.size(); ++i) {
        const Camera& pose = poses[i];
        FrameBuffer fb = rasterize(*p.mesh, texture, pose);

        DenoiseContext ctx;
        ctx.prompt = prompt_augment(p.prompt, pose.azimuth_deg);
        ctx.depth = normalize_depth(fb);
        ctx.view = pose;
        ctx.seed = Rng(p.seed).fork(100 + i).seed();
        ctx.t_start = p.sched->reduced_steps;
        ctx.mode = DenoiseContext::Mode::Init;

        ImageF img = p.denoiser->generate(ctx);
        require_same_shape(img, fb.color, "stage1_init: generated image");
        project_to_texture(img, fb, table, pose, texture, p.projection_sampling);
    }

    bool any_written = false;
    for (uint8_t wbit : texture.written)
        if (wbit) {
            any_written = true;
            break;
        }
    if (!any_written)
        throw EmptyProjection("stage1_init: no face visible from any of the six init poses");
    texture.clear_fresh();
    return texture;
}

std::vector<int> order_views(const SelectedViews& selected, const VisibilityMatrix& vis,
                             const CandidateSet& candidates) {
    if (selected.indices.empty()) throw ZeroSelectedViews("order_views: no views selected");

    auto column_area = [&](int c) {
        double a = 0.0;
        for (int f = 0; f < vis.faces; ++f)
            if (vis.bit(f, c)) a += vis.face_areas[f];
        return a;
    };

    int start = selected.indices[0];
    double best_area = -1.0;
    for (int c : selected.indices) {
        double a = column_area(c);
        if (a > best_area || (a == best_area && c < start)) {
            best_area = a;
            start = c;
        }
    }

    std::vector<int> remaining = selected.indices;
    std::vector<int> tour;
    tour.reserve(remaining.size());
    remaining.erase(std::find(remaining.begin(), remaining.end(), start));
    tour.push_back(start);
    while (!remaining.empty()) {
        Vec3 cur = normalized(candidates.cameras[tour.back()].position());
        double best = 1e300;
        size_t best_i = 0;
        for (size_t i = 0; i < remaining.size(); ++i) {
            Vec3 dir = normalized(candidates.cameras[remaining[i]].position());
            double ang = angle_deg(cur, dir);
            if (ang < best || (ang == best && remaining[i] < remaining[best_i])) {
                best = ang;
                best_i = i;
            }
        }
        tour.push_back(remaining[best_i]);
        remaining.erase(remaining.begin() + static_cast<long>(best_i));
    }
    return tour;
}

void stage2_step(RunState& state, const StageParams& p) {
    if (state.views.empty()) throw ZeroSelectedViews("stage2_step: no selected views");
    const int n = state.step;
    if (n < 1 || n > p.plan->steps) throw ConfigError("stage2_step: step index out of range");
    const int res = p.plan->resolutions[n - 1];
    if (state.texture.resolution != res)
        throw ResolutionMismatch("stage2_step: texture resolution " +
                                 std::to_string(state.texture.resolution) + " != plan " +
                                 std::to_string(res));

    const StepTimesteps& ts = p.plan->timesteps[n - 1];
    TexelSurfaceTable table = build_texel_table(*p.mesh, res);
    state.texture.clear_fresh();

    json views_log = json::array();
    Rng master(p.seed);
    for (size_t vi = 0; vi < state.views.size(); ++vi) {
        const Camera& cam = state.views[vi];
        FrameBuffer fb = rasterize(*p.mesh, state.texture, cam);
        OverlapMasks masks = overlap_mask(fb, state.texture);

        DenoiseContext ctx;
        ctx.prompt = prompt_augment(p.prompt, cam.azimuth_deg);
        ctx.depth = normalize_depth(fb);
        ctx.view = cam;
        ctx.seed = master.fork(n * 1000 + vi).seed();
        ctx.t_start = ts.t_n;
        ctx.mode = DenoiseContext::Mode::Refine;
        ctx.init_image = &fb.color;

        Rng eps_rng = master.fork(0x9e370000ULL + n * 4096 + vi);
        ImageF refined =
            denoise_region_aware(fb.color, masks, fb.coverage, ctx, ts, *p.sched, *p.denoiser, eps_rng);
        project_to_texture(refined, fb, table, cam, state.texture, p.projection_sampling);

        size_t covered_px = 0, overlap_px = 0;
        for (size_t i = 0; i < fb.coverage.size(); ++i) {
            covered_px += fb.coverage[i] ? 1 : 0;
            overlap_px += masks.overlap[i] ? 1 : 0;
        }
        views_log.push_back({{"azimuth_deg", cam.azimuth_deg},
                             {"elevation_deg", cam.elevation_deg},
                             {"radius", cam.radius},
                             {"covered_pixels", covered_px},
                             {"overlap_pixels", overlap_px}});
    }

    json step_log;
    step_log["step"] = n;
    step_log["resolution"] = res;
    step_log["t_n"] = ts.t_n;
    step_log["t1"] = ts.t1;
    step_log["t2"] = ts.t2;
    step_log["views"] = views_log;
    size_t written = 0;
    for (uint8_t wbit : state.texture.written) written += wbit ? 1 : 0;
    step_log["written_texels"] = written;

    if (n < p.plan->steps) {
        state.texture = upsample(state.texture, p.plan->resolutions[n]);
        step_log["upsampled_to"] = p.plan->resolutions[n];
    }
    state.step_logs.push_back(step_log);
    state.step = n + 1;
}

RunResult run_pipeline(const PipelineConfig& cfg, Denoiser* denoiser_override,
                       json* partial_report) {
    cfg.validate();
    json report;
    report["config"] = cfg.to_map().serialize();
    report["phases"] = json::array();
    auto phase = [&](const std::string& name, double ms) {
        report["phases"].push_back({{"name", name}, {"wall_ms", ms}});
        if (partial_report) *partial_report = report;
    };

    auto t0 = std::chrono::steady_clock::now();
    LoadedMesh loaded = load_mesh(cfg.mesh_path);
    TriangleMesh mesh = normalize_mesh(loaded.mesh);
    report["mesh"] = {{"path", cfg.mesh_path},
                      {"faces", mesh.face_count()},
                      {"vertices", mesh.vertex_count()},
                      {"degenerate_faces", loaded.warnings.degenerate_faces.size()},
                      {"nonmanifold_edges", loaded.warnings.nonmanifold_edges}};
    phase("load_mesh", ms_since(t0));

    NoiseSchedule sched = build_schedule(cfg.t_full, cfg.beta_start, cfg.beta_end, cfg.reduced_steps);
    StepPlan plan = StepPlan::make(cfg.steps, cfg.base_resolution, cfg.upsample_factor, cfg.slope,
                                   cfg.t1);
    report["plan"] = {{"resolutions", plan.resolutions}};

    t0 = std::chrono::steady_clock::now();
    Camera proto;
    proto.fov_y_deg = cfg.fov_y_deg;
    proto.image_size = cfg.render_size;
    CandidateSet candidates =
        sample_candidates(cfg.candidates, cfg.radius_min, cfg.radius_max, cfg.seed, proto);
    VisibilityMatrix vis = compute_visibility(mesh, candidates, cfg.max_angle_deg);
    SelectedViews selected = greedy_cover(vis);
    double select_ms = ms_since(t0);
    std::vector<int> order = order_views(selected, vis, candidates);

    json sel;
    sel["candidates"] = cfg.candidates;
    sel["selected"] = selected.indices.size();
    sel["coverage_area_fraction"] = selected.coverage_area_fraction;
    sel["uncoverable_faces"] = selected.uncoverable_faces.size();
    sel["skipped_candidates"] = vis.skipped_candidates.size();
    sel["wall_ms"] = select_ms;
    json sel_views = json::array();
    for (size_t i = 0; i < order.size(); ++i) {
        const Camera& c = candidates.cameras[order[i]];
        sel_views.push_back({{"candidate", order[i]},
                             {"azimuth_deg", c.azimuth_deg},
                             {"elevation_deg", c.elevation_deg},
                             {"radius", c.radius},
                             {"new_faces", selected.new_faces_per_view[std::distance(
                                               selected.indices.begin(),
                                               std::find(selected.indices.begin(),
                                                         selected.indices.end(), order[i]))]}});
    }
    sel["views"] = sel_views;
    report["selection"] = sel;
    phase("select_views", select_ms);

    std::unique_ptr<Denoiser> owned;
    Denoiser* denoiser = denoiser_override;
    if (!denoiser) {
        owned = make_denoiser(cfg, &mesh);
        denoiser = owned.get();
    }
    report["denoiser"] = denoiser->name();

    StageParams params;
    params.mesh = &mesh;
    params.sched = &sched;
    params.plan = &plan;
    params.denoiser = denoiser;
    params.prompt = cfg.prompt;
    params.fov_y_deg = cfg.fov_y_deg;
    params.render_size = cfg.render_size;
    params.init_radius = cfg.init_radius;
    params.projection_sampling = cfg.sampling_mode();
    params.seed = cfg.seed;

    t0 = std::chrono::steady_clock::now();
    RunState state;
    state.texture = stage1_init(params);
    phase("stage1_init", ms_since(t0));

    for (int o : order) state.views.push_back(candidates.cameras[o]);
    for (int n = 1; n <= plan.steps; ++n) {
        t0 = std::chrono::steady_clock::now();
        stage2_step(state, params);
        phase("stage2_step_" + std::to_string(n), ms_since(t0));
    }
    report["steps"] = state.step_logs;
    report["final_resolution"] = state.texture.resolution;

    RunResult result;
    result.texture = std::move(state.texture);
    result.report = std::move(report);
    if (partial_report) *partial_report = result.report;
    return result;
}

}  // namespace retex
