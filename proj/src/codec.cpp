#include "hrpose/codec.hpp"

#include <algorithm>
#include <cmath>

namespace hrpose {

TargetMaps encode_targets(const KeypointSet& kps, int input_w, int input_h,
                          const CodecParams& params) {
    const int s = params.stride;
    if (s <= 0 || input_w % s || input_h % s)
        throw ShapeError("encode_targets: stride must divide input dims");
    const int gw = input_w / s, gh = input_h / s;
    const int K = static_cast<int>(kps.pts.size());

    TargetMaps maps;
    maps.stride = s;
    maps.heatmaps = Tensor<float>({K, gh, gw});
    maps.offsets = Tensor<float>({2 * K, gh, gw});
    maps.weight_mask = Tensor<float>({K, gh, gw});

    const double two_sigma2 = 2.0 * params.sigma * params.sigma;
    for (int k = 0; k < K; ++k) {
        const Keypoint& p = kps.pts[static_cast<size_t>(k)];
        const bool inside = p.x >= 0 && p.x < input_w && p.y >= 0 && p.y < input_h;
        if (p.v <= 0 || !inside) continue;  // zero channel, zero mask

        const double cx = p.x / s, cy = p.y / s;
        const int px = std::clamp(static_cast<int>(std::floor(cx + 0.5)), 0, gw - 1);
        const int py = std::clamp(static_cast<int>(std::floor(cy + 0.5)), 0, gh - 1);

        float* hm = maps.heatmaps.data() + int64_t(k) * gh * gw;
        float* offx = maps.offsets.data() + int64_t(2 * k) * gh * gw;
        float* offy = maps.offsets.data() + int64_t(2 * k + 1) * gh * gw;
        float* mask = maps.weight_mask.data() + int64_t(k) * gh * gw;

        for (int r = 0; r < gh; ++r)
            for (int c = 0; c < gw; ++c) {
                const double dr = r - py, dc = c - px;
                hm[r * gw + c] =
                    static_cast<float>(std::exp(-(dr * dr + dc * dc) / two_sigma2));
                mask[r * gw + c] = 1.0f;
                if (dr * dr + dc * dc <= double(params.radius) * params.radius) {
                    offx[r * gw + c] = static_cast<float>(p.x - double(c) * s);
                    offy[r * gw + c] = static_cast<float>(p.y - double(r) * s);
                }
            }
    }
    return maps;
}

std::vector<DecodedKeypoint> decode_predictions(const Tensor<float>& heatmaps,
                                                const Tensor<float>& offsets,
                                                int stride) {
    if (heatmaps.shape.size() != 3 || offsets.shape.size() != 3 ||
        offsets.dim(0) != 2 * heatmaps.dim(0) || offsets.dim(1) != heatmaps.dim(1) ||
        offsets.dim(2) != heatmaps.dim(2))
        throw ShapeError("decode_predictions: inconsistent map shapes");
    const int K = heatmaps.dim(0), gh = heatmaps.dim(1), gw = heatmaps.dim(2);
    const double max_x = double(gw) * stride - 1;
    const double max_y = double(gh) * stride - 1;

    std::vector<DecodedKeypoint> out(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
        const float* hm = heatmaps.data() + int64_t(k) * gh * gw;
        int best = 0;
        for (int i = 1; i < gh * gw; ++i)
            if (hm[i] > hm[best]) best = i;  // strict > keeps smallest (row, col) on ties
        const int r = best / gw, c = best % gw;
        const float* offx = offsets.data() + int64_t(2 * k) * gh * gw;
        const float* offy = offsets.data() + int64_t(2 * k + 1) * gh * gw;
        DecodedKeypoint d;
        d.x = std::clamp(double(c) * stride + offx[best], 0.0, max_x);
        d.y = std::clamp(double(r) * stride + offy[best], 0.0, max_y);
        d.score = hm[best];
        out[static_cast<size_t>(k)] = d;
    }
    return out;
}

namespace {

void mirror_width(float* ch, int gh, int gw) {
    for (int r = 0; r < gh; ++r)
        std::reverse(ch + int64_t(r) * gw, ch + int64_t(r) * gw + gw);
}

void shift_right_one(float* ch, int gh, int gw) {
    for (int r = 0; r < gh; ++r) {
        float* row = ch + int64_t(r) * gw;
        for (int c = gw - 1; c > 0; --c) row[c] = row[c - 1];
    }
}

}  // namespace

void flip_back_maps(Tensor<float>& heatmaps, Tensor<float>& offsets, int stride,
                    const std::vector<std::pair<int, int>>& pairs,
                    const FlipBackOptions& opt) {
    if (heatmaps.shape.size() != 3 || offsets.shape.size() != 3 ||
        offsets.dim(0) != 2 * heatmaps.dim(0))
        throw ShapeError("flip_back_maps: inconsistent map shapes");
    const int K = heatmaps.dim(0), gh = heatmaps.dim(1), gw = heatmaps.dim(2);
    const int64_t plane = int64_t(gh) * gw;
    for (auto [l, r] : pairs)
        if (l < 0 || r < 0 || l >= K || r >= K)
            throw RangeError("flip pair index out of range");

    for (int k = 0; k < K; ++k) {
        mirror_width(heatmaps.data() + k * plane, gh, gw);
        mirror_width(offsets.data() + int64_t(2 * k) * plane, gh, gw);
        mirror_width(offsets.data() + int64_t(2 * k + 1) * plane, gh, gw);
        // mirrored x-offset: off -> (stride-1) - off keeps decoded positions
        // consistent with the x -> W-1-x keypoint mirror
        float* offx = offsets.data() + int64_t(2 * k) * plane;
        for (int64_t i = 0; i < plane; ++i) offx[i] = float(stride - 1) - offx[i];
    }
    for (auto [l, r] : pairs) {
        std::swap_ranges(heatmaps.data() + l * plane, heatmaps.data() + (l + 1) * plane,
                         heatmaps.data() + r * plane);
        std::swap_ranges(offsets.data() + int64_t(2 * l) * plane,
                         offsets.data() + int64_t(2 * l + 2) * plane,
                         offsets.data() + int64_t(2 * r) * plane);
    }
    if (opt.shift_one_cell) {
        for (int k = 0; k < K; ++k) {
            shift_right_one(heatmaps.data() + k * plane, gh, gw);
            shift_right_one(offsets.data() + int64_t(2 * k) * plane, gh, gw);
            shift_right_one(offsets.data() + int64_t(2 * k + 1) * plane, gh, gw);
        }
    }
}

}  // namespace hrpose
