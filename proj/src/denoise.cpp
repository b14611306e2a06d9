#include "retex/denoise.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "retex/base64.hpp"
#include "retex/errors.hpp"
#include "retex/png_io.hpp"

namespace retex {

using nlohmann::json;

ImageF noise_from_clean(const ImageF& x_t, int t, const ImageF& clean,
                        const NoiseSchedule& sched) {
    require_same_shape(x_t, clean, "noise_from_clean");
    if (t < 1 || t > sched.reduced_steps)
        throw ConfigError("noise_from_clean: reduced timestep out of range");
    double abar = sched.alpha_bar_reduced(t);
    double c_clean = std::sqrt(abar) / std::sqrt(1.0 - abar);
    double c_x = 1.0 / std::sqrt(1.0 - abar);
    ImageF out(x_t.width, x_t.height, x_t.channels);
    const float fx = static_cast<float>(c_x), fc = static_cast<float>(c_clean);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = fx * x_t.data[i] - fc * clean.data[i];
    return out;
}

ImageF Denoiser::predict_noise(const ImageF& x_t, int t, const DenoiseContext& ctx,
                               const NoiseSchedule& sched) {
    return noise_from_clean(x_t, t, generate(ctx), sched);
}

OracleDenoiser::OracleDenoiser(ImageF target) : target_(std::move(target)) {}

OracleDenoiser::OracleDenoiser(const TriangleMesh* mesh, const ImageF& gt_texture) : mesh_(mesh) {
    gt_texture_.resolution = gt_texture.width;
    gt_texture_.rgb = gt_texture;
    gt_texture_.fresh.assign(gt_texture_.texel_count(), 0);
    gt_texture_.written.assign(gt_texture_.texel_count(), 1);
}

ImageF OracleDenoiser::generate(const DenoiseContext& ctx) {
    if (!mesh_) return target_;
    return rasterize(*mesh_, gt_texture_, ctx.view).color;
}

ProceduralDenoiser::ProceduralDenoiser(std::string pattern, uint64_t seed)
    : pattern_(std::move(pattern)), seed_(seed) {}

namespace {

float hash01(uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return static_cast<float>(x >> 40) / static_cast<float>(1 << 24);
}

}  // namespace

ImageF ProceduralDenoiser::generate(const DenoiseContext& ctx) {
    int w = ctx.depth.width, h = ctx.depth.height;
    if (w <= 0 || h <= 0) throw ShapeMismatch("procedural denoiser: empty depth image");
    ImageF out(w, h, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float* px = out.px(x, y);
            if (pattern_ == "checker") {
                bool on = (((x >> 5) + (y >> 5)) & 1) == 0;
                px[0] = on ? 0.9f : 0.2f;
                px[1] = on ? 0.3f : 0.7f;
                px[2] = hash01(seed_ * 3 + 1) * 0.5f + 0.25f;
            } else if (pattern_ == "gradient") {
                px[0] = static_cast<float>(x) / w;
                px[1] = static_cast<float>(y) / h;
                px[2] = hash01(seed_);
            } else {  // blocky value noise
                uint64_t cell = (static_cast<uint64_t>(x >> 3) << 24) ^
                                (static_cast<uint64_t>(y >> 3) << 4) ^ seed_ * 0x9e37;
                px[0] = hash01(cell * 3 + 0);
                px[1] = hash01(cell * 3 + 1);
                px[2] = hash01(cell * 3 + 2);
            }
        }
    }
    return out;
}

namespace {

json build_request(const DenoiseContext& ctx) {
    json req;
    req["prompt"] = ctx.prompt;
    req["mode"] = ctx.mode == DenoiseContext::Mode::Init ? "init" : "refine";
    req["depth_png_b64"] = base64_encode(encode_png_gray16(ctx.depth));
    if (ctx.init_image) req["init_image_png_b64"] = base64_encode(encode_png_rgb8(*ctx.init_image));
    req["noise_level"] = ctx.t_start;
    req["seed"] = ctx.seed;
    req["size"] = ctx.depth.width;
    return req;
}

}  // namespace

ImageF remote_generate(const RemoteConfig& config, const DenoiseContext& ctx, int* retry_events) {
    if (config.endpoint.empty()) throw RemoteUnavailable("remote denoiser: no endpoint configured");

    const std::string body = build_request(ctx).dump();
    std::string last_error = "no attempt made";

    for (int attempt = 0; attempt <= config.retries; ++attempt) {
        if (attempt > 0) {
            if (retry_events) ++*retry_events;
            int delay = config.backoff_ms << (attempt - 1);
            std::cerr << "remote denoiser: retry " << attempt << " after " << last_error << " ("
                      << delay << " ms backoff)\n";
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }

        httplib::Client client(config.endpoint);
        client.set_connection_timeout(0, config.timeout_ms * 1000);
        client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
        auto res = client.Post("/generate", body, "application/json");

        if (!res) {
            last_error = "connection error (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status < 200 || res->status >= 300)
            throw RemoteBadResponse("remote denoiser: HTTP " + std::to_string(res->status));

        try {
            json resp = json::parse(res->body);
            ImageF img = decode_png_rgb8(base64_decode(resp.at("image_png_b64")));
            if (img.width != ctx.depth.width || img.height != ctx.depth.height)
                throw RemoteBadResponse("remote denoiser: response image is " +
                                        std::to_string(img.width) + "x" + std::to_string(img.height) +
                                        ", expected " + std::to_string(ctx.depth.width));
            return img;
        } catch (const RemoteBadResponse&) {
            throw;
        } catch (const std::exception& e) {
            throw RemoteBadResponse(std::string("remote denoiser: undecodable response: ") +
                                    e.what());
        }
    }
    throw RemoteUnavailable("remote denoiser: " + last_error + " after " +
                            std::to_string(config.retries) + " retries");
}

ImageF RemoteDenoiser::generate(const DenoiseContext& ctx) {
    return remote_generate(config_, ctx, &retry_events_);
}

std::string prompt_augment(const std::string& prompt, double azimuth_deg) {
    double az = azimuth_deg;
    if (az < 0.0 || az >= 360.0) throw ConfigError("prompt_augment: azimuth outside [0,360)");
    if (az <= 30.0 || az >= 330.0) return prompt + ", front";
    if (az <= 150.0 || (az >= 210.0 && az < 330.0)) return prompt + ", back";
    return prompt;
}

ImageF denoise_region_aware(const ImageF& image, const OverlapMasks& masks,
                            const std::vector<uint8_t>& coverage, const DenoiseContext& ctx,
                            const StepTimesteps& ts, const NoiseSchedule& sched,
                            Denoiser& denoiser, Rng& rng) {
    size_t n_px = static_cast<size_t>(image.width) * image.height;
    if (masks.overlap.size() != n_px || coverage.size() != n_px)
        throw ShapeMismatch("denoise_region_aware: mask dimensions");

    bool any_covered = false;
    for (uint8_t c : coverage)
        if (c) {
            any_covered = true;
            break;
        }
    if (!any_covered) return image;

    ImageF clean = denoiser.generate(ctx);
    require_same_shape(clean, image, "denoise_region_aware: clean estimate");

    // Build x_{t_n}: overlap pixels diffuse from t1, everything else from
    // t2 (uninitialized texels count as non-overlap). One shared eps draw
    // keeps the noised image continuous across region boundaries.
    ImageF eps = gaussian_image<float>(image.width, image.height, image.channels, rng);
    double r1 = sched.alpha_bar_reduced(ts.t_n) / sched.alpha_bar_reduced(ts.t1);
    double r2 = sched.alpha_bar_reduced(ts.t_n) / sched.alpha_bar_reduced(ts.t2);
    float s1 = static_cast<float>(std::sqrt(r1)), n1 = static_cast<float>(std::sqrt(1.0 - r1));
    float s2 = static_cast<float>(std::sqrt(r2)), n2 = static_cast<float>(std::sqrt(1.0 - r2));

    ImageF x = image;
    for (size_t p = 0; p < n_px; ++p) {
        bool overlap = masks.overlap[p] && !masks.uninitialized[p];
        float cs = overlap ? s1 : s2;
        float cn = overlap ? n1 : n2;
        for (int c = 0; c < image.channels; ++c) {
            size_t i = p * image.channels + c;
            x.data[i] = cs * image.data[i] + cn * eps.data[i];
        }
    }

    for (int i = ts.t_n; i >= 1; --i) {
        ImageF eps_hat = noise_from_clean(x, i, clean, sched);
        x = ddim_step(x, eps_hat, i, sched);
    }
    x.clamp01();
    return x;
}

}  // namespace retex
