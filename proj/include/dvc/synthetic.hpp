#pragma once

#include <string>
#include <vector>

#include "dvc/frame_io.hpp"

namespace dvc {

// Translating-texture generator: smooth multi-octave textures sliding with a
// constant per-clip subpixel velocity, plus optional per-frame sensor noise
// (the noise forms an irreducible rate floor, keeping the RD tradeoff alive).
struct SynthConfig {
    int clips = 8;
    int frames = 4;
    int width = 64;
    int height = 64;
    uint64_t seed = 1234;
    float max_shift = 2.0f;  // max |velocity| per axis, px/frame
    float noise = 0.01f;     // stddev of per-frame additive noise
};

std::vector<TrainingClip> synth_translating_clips(const SynthConfig& cfg);
std::vector<Tensor> synth_sequence(const SynthConfig& cfg);  // one clip of cfg.frames

// "synthetic:clips=8,frames=4,size=64,seed=1,shift=2,noise=0.01"
bool is_synth_uri(const std::string& s);
SynthConfig parse_synth_uri(const std::string& s);

}  // namespace dvc
