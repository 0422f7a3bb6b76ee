#include "dvc/frame_io.hpp"

#include <stdexcept>

namespace dvc {

void validate_frame(const Tensor& frame) {
    if (frame.ndim() != 3 || frame.dim(0) != 3) throw std::runtime_error("frame: expected [3,H,W]");
    const float* p = frame.data();
    for (int64_t i = 0; i < frame.numel(); ++i)
        if (!(p[i] >= 0.0f && p[i] <= 1.0f)) throw std::runtime_error("frame: pixel outside [0,1]");
}

PaddedFrame pad_to_multiple(const Tensor& frame, int multiple) {
    if (multiple < 1) throw std::invalid_argument("pad_to_multiple: multiple must be >= 1");
    const int C = frame.dim(0), H = frame.dim(1), W = frame.dim(2);
    const int ph = (H + multiple - 1) / multiple * multiple;
    const int pw = (W + multiple - 1) / multiple * multiple;
    PaddedFrame out;
    out.orig_width = W;
    out.orig_height = H;
    if (ph == H && pw == W) {
        out.pixels = frame;
        return out;
    }
    Tensor t({C, ph, pw});
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < ph; ++y) {
            const int sy = y < H ? y : H - 1;
            for (int x = 0; x < pw; ++x) {
                const int sx = x < W ? x : W - 1;
                t(c, y, x) = frame(c, sy, sx);
            }
        }
    out.pixels = std::move(t);
    return out;
}

Tensor crop_to(const Tensor& frame, int width, int height) {
    const int C = frame.dim(0);
    if (width > frame.dim(2) || height > frame.dim(1))
        throw std::invalid_argument("crop_to: target larger than frame");
    if (width == frame.dim(2) && height == frame.dim(1)) return frame;
    Tensor t({C, height, width});
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) t(c, y, x) = frame(c, y, x);
    return t;
}

std::vector<Gop> make_gops(const std::vector<Tensor>& frames, int gop_size) {
    if (gop_size < 1) throw std::invalid_argument("make_gops: gop_size must be >= 1");
    if (frames.empty()) throw std::invalid_argument("make_gops: empty frame list");
    std::vector<Gop> gops;
    for (size_t i = 0; i < frames.size(); i += static_cast<size_t>(gop_size)) {
        Gop g;
        const size_t end = std::min(frames.size(), i + static_cast<size_t>(gop_size));
        for (size_t j = i; j < end; ++j) {
            g.frames.push_back(frames[j]);
            g.layout.roles.push_back(j == i ? FrameRole::Intra : FrameRole::Predicted);
        }
        g.layout.gop_size = static_cast<int>(g.frames.size());
        gops.push_back(std::move(g));
    }
    return gops;
}

TrainingClip random_crop_clip(const TrainingClip& clip, int crop, Rng& rng) {
    if (clip.frames.empty()) throw std::invalid_argument("random_crop_clip: empty clip");
    const int H = clip.frames[0].dim(1), W = clip.frames[0].dim(2);
    if (crop > H || crop > W) throw std::invalid_argument("random_crop_clip: crop larger than frame");
    const int oy = H == crop ? 0 : rng.uniform_int(0, H - crop);
    const int ox = W == crop ? 0 : rng.uniform_int(0, W - crop);
    TrainingClip out;
    out.clip_id = clip.clip_id;
    for (const auto& f : clip.frames) {
        Tensor t({3, crop, crop});
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < crop; ++y)
                for (int x = 0; x < crop; ++x) t(c, y, x) = f(c, oy + y, ox + x);
        out.frames.push_back(std::move(t));
    }
    return out;
}

}  // namespace dvc
