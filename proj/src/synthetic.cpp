#include "dvc/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "dvc/config.hpp"

namespace dvc {

namespace {

// Multi-octave value noise in [0,1], 3 channels.
Tensor random_texture(Rng& rng, int h, int w) {
    Tensor tex({3, h, w});
    for (int oct = 0; oct < 5; ++oct) {
        const int cell = std::max(2, 32 >> oct);  // 32,16,8,4,2 px lattice
        const float amp = 1.0f / static_cast<float>(1 << oct);
        const int gh = h / cell + 2, gw = w / cell + 2;
        Tensor grid({3, gh, gw});
        rng.fill_uniform(grid, -1.0f, 1.0f);
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < h; ++y) {
                const float fy = static_cast<float>(y) / cell;
                const int y0 = static_cast<int>(fy);
                const float ty = fy - y0;
                for (int x = 0; x < w; ++x) {
                    const float fx = static_cast<float>(x) / cell;
                    const int x0 = static_cast<int>(fx);
                    const float tx = fx - x0;
                    const float v =
                        (1 - ty) * ((1 - tx) * grid(c, y0, x0) + tx * grid(c, y0, x0 + 1)) +
                        ty * ((1 - tx) * grid(c, y0 + 1, x0) + tx * grid(c, y0 + 1, x0 + 1));
                    tex(c, y, x) += amp * v;
                }
            }
    }
    // map roughly [-2,2] -> [0,1] with headroom
    float* p = tex.data();
    for (int64_t i = 0; i < tex.numel(); ++i) {
        float v = 0.5f + 0.22f * p[i];
        p[i] = v < 0.02f ? 0.02f : (v > 0.98f ? 0.98f : v);
    }
    return tex;
}

float sample_bilinear(const Tensor& t, int c, float y, float x) {
    const int H = t.dim(1), W = t.dim(2);
    x = x < 0.0f ? 0.0f : (x > static_cast<float>(W - 1) ? static_cast<float>(W - 1) : x);
    y = y < 0.0f ? 0.0f : (y > static_cast<float>(H - 1) ? static_cast<float>(H - 1) : y);
    const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, W - 1), y1 = std::min(y0 + 1, H - 1);
    const float fx = x - x0, fy = y - y0;
    return (1 - fy) * ((1 - fx) * t(c, y0, x0) + fx * t(c, y0, x1)) +
           fy * ((1 - fx) * t(c, y1, x0) + fx * t(c, y1, x1));
}

std::vector<Tensor> render_clip(Rng& rng, const SynthConfig& cfg) {
    const int margin = static_cast<int>(std::ceil(cfg.max_shift * cfg.frames)) + 4;
    Tensor tex = random_texture(rng, cfg.height + 2 * margin, cfg.width + 2 * margin);
    const float vx = static_cast<float>(rng.uniform(-cfg.max_shift, cfg.max_shift));
    const float vy = static_cast<float>(rng.uniform(-cfg.max_shift, cfg.max_shift));
    std::vector<Tensor> frames;
    for (int t = 0; t < cfg.frames; ++t) {
        Tensor f({3, cfg.height, cfg.width});
        const float oy = margin + t * vy, ox = margin + t * vx;
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < cfg.height; ++y)
                for (int x = 0; x < cfg.width; ++x) f(c, y, x) = sample_bilinear(tex, c, oy + y, ox + x);
        if (cfg.noise > 0.0f) {
            float* p = f.data();
            for (int64_t i = 0; i < f.numel(); ++i) {
                float v = p[i] + cfg.noise * static_cast<float>(rng.normal());
                p[i] = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
            }
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

}  // namespace

std::vector<TrainingClip> synth_translating_clips(const SynthConfig& cfg) {
    Rng rng(cfg.seed);
    std::vector<TrainingClip> clips;
    for (int i = 0; i < cfg.clips; ++i) {
        TrainingClip c;
        c.clip_id = i;
        c.frames = render_clip(rng, cfg);
        clips.push_back(std::move(c));
    }
    return clips;
}

std::vector<Tensor> synth_sequence(const SynthConfig& cfg) {
    Rng rng(cfg.seed);
    return render_clip(rng, cfg);
}

bool is_synth_uri(const std::string& s) { return s.rfind("synthetic:", 0) == 0; }

SynthConfig parse_synth_uri(const std::string& s) {
    if (!is_synth_uri(s)) throw std::invalid_argument("not a synthetic: uri");
    SynthConfig cfg;
    const std::string args = s.substr(10);
    if (args.empty()) return cfg;
    for (const auto& kv : split(args, ',')) {
        if (kv.empty()) continue;
        const auto parts = split(kv, '=');
        if (parts.size() != 2) throw std::invalid_argument("bad synthetic: parameter " + kv);
        const std::string& k = parts[0];
        const std::string& v = parts[1];
        if (k == "clips")
            cfg.clips = std::stoi(v);
        else if (k == "frames")
            cfg.frames = std::stoi(v);
        else if (k == "size")
            cfg.width = cfg.height = std::stoi(v);
        else if (k == "width")
            cfg.width = std::stoi(v);
        else if (k == "height")
            cfg.height = std::stoi(v);
        else if (k == "seed")
            cfg.seed = std::stoull(v);
        else if (k == "shift")
            cfg.max_shift = std::stof(v);
        else if (k == "noise")
            cfg.noise = std::stof(v);
        else
            throw std::invalid_argument("unknown synthetic: parameter " + k);
    }
    return cfg;
}

}  // namespace dvc
