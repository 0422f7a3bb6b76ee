#pragma once

#include <string>
#include <vector>

#include "dvc/tensor.hpp"

namespace dvc {

// Frames are [3,H,W] tensors with values in [0,1].
void validate_frame(const Tensor& frame);

enum class FrameRole { Intra, Predicted };

struct GopLayout {
    int gop_size = 0;
    std::vector<FrameRole> roles;  // first is always Intra
};

struct Gop {
    GopLayout layout;
    std::vector<Tensor> frames;
};

struct PaddedFrame {
    Tensor pixels;
    int orig_width = 0;
    int orig_height = 0;
};

// Replication-pad on the right/bottom up to the next multiple; records the
// original dims so decoded frames can be cropped back exactly.
PaddedFrame pad_to_multiple(const Tensor& frame, int multiple = 16);
Tensor crop_to(const Tensor& frame, int width, int height);

std::vector<Gop> make_gops(const std::vector<Tensor>& frames, int gop_size);

struct TrainingClip {
    int clip_id = 0;
    std::vector<Tensor> frames;  // length >= 2, shared dims
};

// Same crop window applied to every frame of the clip.
TrainingClip random_crop_clip(const TrainingClip& clip, int crop, Rng& rng);

}  // namespace dvc
