#pragma once

#include <memory>
#include <string>

#include "retex/camera.hpp"
#include "retex/image.hpp"
#include "retex/mesh.hpp"
#include "retex/raster.hpp"
#include "retex/rng.hpp"
#include "retex/schedule.hpp"

namespace retex {

// Conditioning bundle for one view. depth dimensions define the working
// image size; init_image (when present) is the clean render being refined.
struct DenoiseContext {
    enum class Mode { Init, Refine };

    std::string prompt;
    ImageF depth;  // 1ch, normalized [0,1]
    Camera view;
    uint64_t seed = 0;
    int t_start = 10;  // reduced timestep the chain starts from
    Mode mode = Mode::Refine;
    const ImageF* init_image = nullptr;

    double view_azimuth() const { return view.azimuth_deg; }
};

// eps_hat = (x_t - sqrt(abar_t) clean) / sqrt(1 - abar_t): the identity that
// turns any clean-image estimate into a noise prediction.
ImageF noise_from_clean(const ImageF& x_t, int t, const ImageF& clean, const NoiseSchedule& sched);

// Noise-prediction boundary. Implementations supply a clean-image estimate;
// the DDIM loop itself always runs locally.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual std::string name() const = 0;
    virtual ImageF generate(const DenoiseContext& ctx) = 0;

    ImageF predict_noise(const ImageF& x_t, int t, const DenoiseContext& ctx,
                         const NoiseSchedule& sched);
};

// Test denoiser with a known target: either a fixed image or per-view
// renders of a ground-truth texture.
class OracleDenoiser : public Denoiser {
public:
    explicit OracleDenoiser(ImageF target);
    OracleDenoiser(const TriangleMesh* mesh, const ImageF& gt_texture);

    std::string name() const override { return "oracle"; }
    ImageF generate(const DenoiseContext& ctx) override;

private:
    ImageF target_;
    const TriangleMesh* mesh_ = nullptr;
    UvTexture gt_texture_;
};

// Seeded synthetic-image denoiser; needs no assets or network.
class ProceduralDenoiser : public Denoiser {
public:
    ProceduralDenoiser(std::string pattern, uint64_t seed);

    std::string name() const override { return "procedural"; }
    ImageF generate(const DenoiseContext& ctx) override;

private:
    std::string pattern_;
    uint64_t seed_;
};

struct RemoteConfig {
    std::string endpoint;  // e.g. http://127.0.0.1:8080
    int timeout_ms = 10000;
    int retries = 3;       // additional attempts after the first
    int backoff_ms = 200;  // doubles per retry
};

// One POST to the generation service. Request JSON:
//   {prompt, mode: "init"|"refine", depth_png_b64, init_image_png_b64?,
//    noise_level, seed, size}
// Response JSON: {image_png_b64}. Retries on connect errors and 5xx with
// exponential backoff; throws RemoteUnavailable / RemoteBadResponse.
ImageF remote_generate(const RemoteConfig& config, const DenoiseContext& ctx,
                       int* retry_events = nullptr);

class RemoteDenoiser : public Denoiser {
public:
    explicit RemoteDenoiser(RemoteConfig config) : config_(std::move(config)) {}

    std::string name() const override { return "remote"; }
    ImageF generate(const DenoiseContext& ctx) override;

    int retry_events() const { return retry_events_; }

private:
    RemoteConfig config_;
    int retry_events_ = 0;
};

// Append ", front" for azimuth in [0,30] u [330,360), ", back" for
// (30,150] u [210,330); the gap (150,210) stays unchanged.
std::string prompt_augment(const std::string& prompt, double azimuth_deg);

// Region-aware refinement of one view: overlap pixels are diffused from t1
// to t_n, everything else (non-overlap, uninitialized, background) from t2,
// sharing a single eps draw; then the sigma=0 DDIM chain runs down to the
// clean boundary. Returns the input unchanged when nothing is covered.
ImageF denoise_region_aware(const ImageF& image, const OverlapMasks& masks,
                            const std::vector<uint8_t>& coverage, const DenoiseContext& ctx,
                            const StepTimesteps& ts, const NoiseSchedule& sched,
                            Denoiser& denoiser, Rng& rng);

}  // namespace retex
