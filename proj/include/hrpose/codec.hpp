#pragma once

#include <vector>

#include "hrpose/geometry.hpp"
#include "hrpose/tensor.hpp"

namespace hrpose {

// Heatmap + offset encoding of keypoints at a fixed stride from the network
// input. Heatmaps are unnormalized Gaussians with value exactly 1 at the
// nearest cell; offsets hold input-pixel residuals (true - cell*stride)
// within `radius` cells of the peak. weight_mask marks channels with an
// encoded keypoint (all-ones) vs absent/invisible (all-zeros), and gates
// both heatmap and offset losses.
struct TargetMaps {
    Tensor<float> heatmaps;     // K x H' x W'
    Tensor<float> offsets;      // 2K x H' x W' (channel 2k = x, 2k+1 = y)
    Tensor<float> weight_mask;  // K x H' x W' in {0, 1}
    int stride = 4;
};

struct DecodedKeypoint {
    double x = 0, y = 0;  // input-crop px, clamped into [0, dim-1]
    double score = 0;     // heatmap value at the argmax cell
};

struct CodecParams {
    int stride = 4;
    double sigma = 2.0;  // cells
    int radius = 4;      // cells
};

TargetMaps encode_targets(const KeypointSet& kps, int input_w, int input_h,
                          const CodecParams& params = {});

std::vector<DecodedKeypoint> decode_predictions(const Tensor<float>& heatmaps,
                                                const Tensor<float>& offsets,
                                                int stride);

// Undo a horizontal input flip on predicted maps: mirror along width, swap
// paired channels, and remap x-offsets as off -> (stride-1) - off so that
// decode(flip_back(maps)) == flip_keypoints(decode(maps)) exactly under the
// x -> W-1-x keypoint mirror. `shift_one_cell` additionally shifts all maps
// one cell right (column 0 duplicated); off by default, exposed to study
// flip misalignment.
struct FlipBackOptions {
    bool shift_one_cell = false;
};

void flip_back_maps(Tensor<float>& heatmaps, Tensor<float>& offsets, int stride,
                    const std::vector<std::pair<int, int>>& pairs,
                    const FlipBackOptions& opt = {});

}  // namespace hrpose
