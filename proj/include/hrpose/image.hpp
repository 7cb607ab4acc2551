#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hrpose/geometry.hpp"
#include "hrpose/tensor.hpp"

namespace hrpose {

// Float image, CHW layout, values nominally in [0, 1].
struct Image {
    int w = 0, h = 0, c = 0;
    std::vector<float> px;

    Image() = default;
    Image(int w_, int h_, int c_) : w(w_), h(h_), c(c_) {
        px.assign(static_cast<size_t>(w) * h * c, 0.0f);
    }
    float& at(int ch, int y, int x) {
        return px[(static_cast<size_t>(ch) * h + y) * w + x];
    }
    float at(int ch, int y, int x) const {
        return px[(static_cast<size_t>(ch) * h + y) * w + x];
    }
};

// Raw image container: magic "HRI1", u32 width/height/channels (LE), then
// row-major (HWC) u8 pixels.
void write_raw_image(const std::string& path, const Image& img);
Image read_raw_image(const std::string& path);

// PPM (P6) writer for overlays; expects 3-channel input.
void write_ppm(const std::string& path, const Image& img);

// Bilinear warp of the source image through the inverse of `xf` onto an
// out_w x out_h grid: dest(u, v) samples src at xf^-1(u, v), zero outside.
Image warp_affine(const Image& src, const AffineXform& xf, int out_w, int out_h);

Image mirror_horizontal(const Image& src);

// CHW tensor of shape {1, C, H, W} with values shifted to [-0.5, 0.5].
Tensor<float> image_to_input(const Image& img);

// Draw keypoints (discs) and COCO limb segments onto an image copy.
Image draw_keypoints(const Image& img, const KeypointSet& kps, double min_score);

}  // namespace hrpose
