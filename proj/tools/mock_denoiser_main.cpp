// Mock generation service speaking the remote-denoiser wire format. Refine
// requests echo the init image; init requests synthesize a deterministic
// pattern. --fail-first injects 500s for retry testing.

#include <atomic>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "retex/base64.hpp"
#include "retex/denoise.hpp"
#include "retex/png_io.hpp"

using nlohmann::json;
using namespace retex;

int main(int argc, char** argv) {
    CLI::App app{"mock denoiser service"};
    std::string host = "127.0.0.1";
    int port = 0;  // 0 = pick a free port
    int fail_first = 0;
    int latency_ms = 0;
    app.add_option("--host", host);
    app.add_option("--port", port);
    app.add_option("--fail-first", fail_first, "respond 500 to the first N requests");
    app.add_option("--latency-ms", latency_ms, "artificial delay per request");
    CLI11_PARSE(app, argc, argv);

    httplib::Server server;
    std::atomic<int> request_count{0};

    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });

    server.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
        int n = ++request_count;
        if (latency_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(latency_ms));
        if (n <= fail_first) {
            res.status = 500;
            res.set_content("injected failure", "text/plain");
            return;
        }
        try {
            json body = json::parse(req.body);
            std::string mode = body.at("mode");
            int size = body.at("size");
            json out;
            if (mode == "refine" && body.contains("init_image_png_b64")) {
                out["image_png_b64"] = body.at("init_image_png_b64");  // byte-exact echo
            } else {
                DenoiseContext ctx;
                ctx.depth = decode_png_gray16(base64_decode(body.at("depth_png_b64")));
                if (ctx.depth.width != size || ctx.depth.height != size)
                    throw std::runtime_error("depth size does not match size field");
                ProceduralDenoiser gen("checker", body.at("seed").get<uint64_t>());
                out["image_png_b64"] = base64_encode(encode_png_rgb8(gen.generate(ctx)));
            }
            res.set_content(out.dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(std::string("bad request: ") + e.what(), "text/plain");
        }
    });

    if (port == 0) {
        port = server.bind_to_any_port(host);
        if (port < 0) {
            std::cerr << "failed to bind\n";
            return 1;
        }
        std::cout << "LISTENING " << port << std::endl;
        return server.listen_after_bind() ? 0 : 1;
    }
    std::cout << "LISTENING " << port << std::endl;
    return server.listen(host, port) ? 0 : 1;
}
