// Command-line surface: each phase runs standalone plus the end-to-end
// pipeline. Exit codes: 0 ok, 2 config/contract, 3 denoiser, 4 geometry.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "retex/errors.hpp"
#include "retex/meshgen.hpp"
#include "retex/pipeline.hpp"
#include "retex/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace retex;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write: " + path);
    f << text;
}

int cmd_select_views(const std::string& mesh_path, int candidates, double radius_min,
                     double radius_max, double max_angle, uint64_t seed,
                     const std::string& out_path) {
    if (candidates < 1) throw ConfigError("--candidates must be >= 1");
    if (!(radius_min > 0.0 && radius_min <= radius_max)) throw ConfigError("bad radius range");

    auto t0 = std::chrono::steady_clock::now();
    LoadedMesh loaded = load_mesh(mesh_path);
    TriangleMesh mesh = normalize_mesh(loaded.mesh);
    CandidateSet set = sample_candidates(candidates, radius_min, radius_max, seed);
    VisibilityMatrix vis = compute_visibility(mesh, set, max_angle);
    SelectedViews sel = greedy_cover(vis);
    double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["mesh"] = mesh_path;
    report["faces"] = mesh.face_count();
    report["candidates"] = candidates;
    report["seed"] = seed;
    report["radius_min"] = radius_min;
    report["radius_max"] = radius_max;
    report["max_angle_deg"] = max_angle;
    report["coverage_area_fraction"] = sel.coverage_area_fraction;
    report["uncoverable_faces"] = sel.uncoverable_faces.size();
    report["skipped_candidates"] = vis.skipped_candidates.size();
    report["wall_ms"] = wall_ms;
    json views = json::array();
    for (size_t i = 0; i < sel.indices.size(); ++i) {
        const Camera& c = set.cameras[sel.indices[i]];
        views.push_back({{"candidate", sel.indices[i]},
                         {"azimuth_deg", c.azimuth_deg},
                         {"elevation_deg", c.elevation_deg},
                         {"radius", c.radius},
                         {"visible_faces", vis.column_popcount(sel.indices[i])},
                         {"new_faces", sel.new_faces_per_view[i]}});
    }
    report["selected_views"] = views;

    if (out_path.empty())
        std::cout << report.dump(2) << "\n";
    else
        write_text(out_path, report.dump(2) + "\n");
    std::cerr << "selected " << sel.indices.size() << " views, coverage "
              << sel.coverage_area_fraction << ", " << wall_ms << " ms\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& denoiser_kind,
            const std::vector<std::string>& overrides, const std::string& out_dir) {
    PipelineConfig cfg = PipelineConfig::load(config_path);
    if (!denoiser_kind.empty()) cfg.denoiser = denoiser_kind;
    for (const std::string& o : overrides) cfg.apply_override(o);

    fs::create_directories(out_dir);
    json partial;
    try {
        RunResult result = run_pipeline(cfg, nullptr, &partial);

        write_png_rgb8(result.texture.rgb, out_dir + "/texture.png", /*flip_rows=*/true);
        write_text(out_dir + "/report.json", result.report.dump(2) + "\n");

        // Textured copy of the input for direct viewing.
        TriangleMesh mesh = normalize_mesh(load_mesh(cfg.mesh_path).mesh);
        write_obj(mesh, out_dir + "/textured.obj", "texture.png");

        // Preview renders from novel poses.
        UvTexture& tex = result.texture;
        const double az[4] = {45, 135, 225, 315};
        const double el[4] = {70, 110, 70, 110};
        for (int i = 0; i < 4; ++i) {
            Camera cam;
            cam.azimuth_deg = az[i];
            cam.elevation_deg = el[i];
            cam.radius = cfg.init_radius;
            cam.fov_y_deg = cfg.fov_y_deg;
            cam.image_size = cfg.render_size;
            FrameBuffer fb = rasterize(mesh, tex, cam);
            write_png_rgb8(fb.color, out_dir + "/preview_" + std::to_string(i) + ".png");
        }
        std::cerr << "wrote " << out_dir << "/texture.png (" << tex.resolution << "x"
                  << tex.resolution << ")\n";
        return 0;
    } catch (const Error&) {
        partial["aborted"] = true;
        write_text(out_dir + "/report.json", partial.dump(2) + "\n");
        throw;
    }
}

int cmd_render(const std::string& mesh_path, const std::string& texture_path, double azimuth,
               double elevation, double radius, double fov, int size, const std::string& out_path) {
    TriangleMesh mesh = normalize_mesh(load_mesh(mesh_path).mesh);
    ImageF img = read_png_rgb8(texture_path, /*flip_rows=*/true);
    if (img.width != img.height) throw ConfigError("texture must be square");
    UvTexture tex;
    tex.resolution = img.width;
    tex.rgb = img;
    tex.fresh.assign(tex.texel_count(), 0);
    tex.written.assign(tex.texel_count(), 1);

    Camera cam;
    cam.azimuth_deg = azimuth;
    cam.elevation_deg = elevation;
    cam.radius = radius;
    cam.fov_y_deg = fov;
    cam.image_size = size;
    FrameBuffer fb = rasterize(mesh, tex, cam);
    write_png_rgb8(fb.color, out_path);
    return 0;
}

int cmd_inspect_schedule(int t_full, double beta_start, double beta_end, int reduced_steps,
                         int steps, int base_resolution, double factor, double slope, int t1,
                         const std::string& out_path) {
    NoiseSchedule sched = build_schedule(t_full, beta_start, beta_end, reduced_steps);
    StepPlan plan = StepPlan::make(steps, base_resolution, factor, slope, t1);

    json out;
    out["t_full"] = sched.t_full;
    out["reduced_steps"] = sched.reduced_steps;
    out["reduced_to_full"] = sched.reduced_to_full;
    json abar = json::array();
    for (int k = 0; k <= sched.reduced_steps; ++k) abar.push_back(sched.alpha_bar_reduced(k));
    out["alpha_bar_reduced"] = abar;
    out["alpha_bar_final"] = sched.alpha_bars[sched.t_full];
    out["resolutions"] = plan.resolutions;
    json ts = json::array();
    for (const StepTimesteps& t : plan.timesteps)
        ts.push_back({{"t_n", t.t_n}, {"t1", t.t1}, {"t2", t.t2}});
    out["step_timesteps"] = ts;

    if (out_path.empty())
        std::cout << out.dump(2) << "\n";
    else
        write_text(out_path, out.dump(2) + "\n");
    return 0;
}

int cmd_make_fixture(const std::string& kind, int subdiv, const std::string& out_path,
                     const std::string& texture_out, int texture_res) {
    TriangleMesh mesh;
    if (kind == "icosphere")
        mesh = make_icosphere(subdiv);
    else if (kind == "quad")
        mesh = make_quad();
    else if (kind == "cube")
        mesh = make_cube();
    else
        throw ConfigError("unknown fixture kind: " + kind + " (icosphere|quad|cube)");
    write_obj(mesh, out_path);
    std::cerr << "wrote " << out_path << " (" << mesh.face_count() << " faces)\n";
    if (!texture_out.empty()) {
        write_png_rgb8(checker_gradient_image(texture_res), texture_out, /*flip_rows=*/true);
        std::cerr << "wrote " << texture_out << " (" << texture_res << "x" << texture_res << ")\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"texture optimization pipeline"};
    app.require_subcommand(1);

    // select-views
    auto* sv = app.add_subcommand("select-views", "sample candidates, compute visibility, solve the cover");
    std::string sv_mesh, sv_out;
    int sv_k = 8192;
    double sv_rmin = 1.0, sv_rmax = 1.4, sv_angle = 45.0;
    uint64_t sv_seed = 0;
    sv->add_option("mesh", sv_mesh, "OBJ mesh with UVs")->required();
    sv->add_option("--candidates", sv_k, "candidate viewpoint count");
    sv->add_option("--radius-min", sv_rmin, "shell inner radius");
    sv->add_option("--radius-max", sv_rmax, "shell outer radius");
    sv->add_option("--max-angle", sv_angle, "grazing-angle limit in degrees");
    sv->add_option("--seed", sv_seed, "radius sampling seed");
    sv->add_option("--out", sv_out, "report path (stdout when omitted)");

    // run
    auto* rn = app.add_subcommand("run", "full two-stage texture optimization");
    std::string rn_config, rn_denoiser, rn_out = "out";
    std::vector<std::string> rn_overrides;
    rn->add_option("config", rn_config, "run configuration file")->required();
    rn->add_option("--denoiser", rn_denoiser, "oracle|procedural|remote (overrides config)");
    rn->add_option("--override", rn_overrides, "section.key=value");
    rn->add_option("--out-dir", rn_out, "output directory");

    // render
    auto* rd = app.add_subcommand("render", "render a textured mesh from one pose");
    std::string rd_mesh, rd_tex, rd_out = "render.png";
    double rd_az = 30, rd_el = 75, rd_radius = 2.4, rd_fov = 50;
    int rd_size = 512;
    rd->add_option("mesh", rd_mesh)->required();
    rd->add_option("texture", rd_tex)->required();
    rd->add_option("--azimuth", rd_az);
    rd->add_option("--elevation", rd_el);
    rd->add_option("--radius", rd_radius);
    rd->add_option("--fov", rd_fov);
    rd->add_option("--size", rd_size);
    rd->add_option("--out", rd_out);

    // inspect-schedule
    auto* is = app.add_subcommand("inspect-schedule", "dump alpha-bar tables and the step plan");
    int is_tfull = 1000, is_reduced = 10, is_steps = 5, is_base = 307, is_t1 = 2;
    double is_bstart = 0.00085, is_bend = 0.012, is_factor = 1.5, is_slope = 2.5;
    std::string is_out;
    is->add_option("--t-full", is_tfull);
    is->add_option("--beta-start", is_bstart);
    is->add_option("--beta-end", is_bend);
    is->add_option("--reduced-steps", is_reduced);
    is->add_option("--steps", is_steps);
    is->add_option("--base-resolution", is_base);
    is->add_option("--factor", is_factor);
    is->add_option("--slope", is_slope);
    is->add_option("--t1", is_t1);
    is->add_option("--out", is_out);

    // make-fixture
    auto* mf = app.add_subcommand("make-fixture", "generate test meshes and textures");
    std::string mf_kind = "icosphere", mf_out = "fixture.obj", mf_tex;
    int mf_subdiv = 3, mf_tex_res = 512;
    mf->add_option("kind", mf_kind, "icosphere|quad|cube");
    mf->add_option("--subdiv", mf_subdiv, "icosphere subdivision rounds");
    mf->add_option("--out", mf_out);
    mf->add_option("--texture-out", mf_tex, "also write a checker+gradient texture");
    mf->add_option("--texture-res", mf_tex_res);

    try {
        app.parse(argc, argv);
        if (sv->parsed())
            return cmd_select_views(sv_mesh, sv_k, sv_rmin, sv_rmax, sv_angle, sv_seed, sv_out);
        if (rn->parsed()) return cmd_run(rn_config, rn_denoiser, rn_overrides, rn_out);
        if (rd->parsed())
            return cmd_render(rd_mesh, rd_tex, rd_az, rd_el, rd_radius, rd_fov, rd_size, rd_out);
        if (is->parsed())
            return cmd_inspect_schedule(is_tfull, is_bstart, is_bend, is_reduced, is_steps, is_base,
                                        is_factor, is_slope, is_t1, is_out);
        if (mf->parsed()) return cmd_make_fixture(mf_kind, mf_subdiv, mf_out, mf_tex, mf_tex_res);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        // select-views and render report every failure as a contract error.
        if (rn->parsed()) return exit_code(e.error_class());
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
