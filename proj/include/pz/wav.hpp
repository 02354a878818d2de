#pragma once

#include <string>
#include <vector>

#include "pz/vem.hpp"

namespace pz {

// Decoded mono PCM file, samples scaled to [-1, 1).
struct WavData {
    Vec samples;
    double sample_rate = 8000.0;
};

WavData read_wav(const std::string& path);

// 16-bit mono PCM; samples are rounded to the nearest quantization step and
// clamped to the representable range.
void write_wav(const std::string& path, const Vec& samples, double sample_rate);

// Cuts full frames of length n every hop samples; a trailing partial frame
// is dropped.
std::vector<Frame> frame_stream(const WavData& data, Eigen::Index n = 240,
                                Eigen::Index hop = 240);

std::vector<Frame> read_wav_frames(const std::string& path,
                                   Eigen::Index n = 240,
                                   Eigen::Index hop = 240);

}  // namespace pz
