#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "hrpose/errors.hpp"
#include "hrpose/rng.hpp"

namespace hrpose {

// Pixel convention used throughout: integer index i denotes sample location
// x = i (not i + 0.5). A horizontal mirror of a frame of width W therefore
// maps x to (W - 1) - x.

struct Vec2 {
    double x = 0, y = 0;
};

enum class CoordFrame { kImage, kCrop, kHeatmap };

struct Keypoint {
    double x = 0, y = 0;
    int v = 0;        // 0 unlabeled, 1 labeled invisible, 2 labeled visible
    double score = 0;
};

struct KeypointSet {
    std::vector<Keypoint> pts;
    CoordFrame frame = CoordFrame::kImage;

    size_t size() const { return pts.size(); }
    int visible_count() const {
        int n = 0;
        for (const auto& p : pts) n += p.v > 0;
        return n;
    }
};

// 2x3 affine matrix mapping source (x, y, 1) to destination (x', y').
struct AffineXform {
    // row-major: m[0..2] first row, m[3..5] second row
    std::array<double, 6> m{1, 0, 0, 0, 1, 0};

    Vec2 apply(Vec2 p) const {
        return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
    }
};

AffineXform affine_identity();
AffineXform affine_translation(double tx, double ty);
AffineXform affine_scale(double sx, double sy);
AffineXform affine_rotation_deg(double degrees);  // about the origin, x->y positive
AffineXform affine_hflip(double width);           // x -> (width - 1) - x

// compose(a, b) applies b first: (a o b)(p) = a(b(p))
AffineXform compose(const AffineXform& a, const AffineXform& b);
AffineXform invert_affine(const AffineXform& xf);

std::vector<Vec2> apply_affine(const std::vector<Vec2>& points, const AffineXform& xf);

struct CropSpec {
    Vec2 center;          // source px
    Vec2 box_size;        // source px, aspect-matched to out_size
    double rotation = 0;  // degrees
    bool flip = false;
    int out_w = 0, out_h = 0;
};

struct Box {
    double x = 0, y = 0, w = 0, h = 0;
};

// Expand the box symmetrically to the output aspect ratio (growing only the
// deficient dimension), then scale by pad_factor.
CropSpec box_to_crop(const Box& box, int out_w, int out_h, double pad_factor);

// translate(out_center) * flip? * scale(out/box) * rotate(-theta) * translate(-center)
AffineXform make_affine(const CropSpec& spec);

struct FlipSpec {
    std::vector<std::pair<int, int>> pairs;  // (left_index, right_index)
    double width = 0;                        // width of the frame being mirrored
};

// COCO 17-keypoint order: nose, eyes, ears, shoulders, elbows, wrists, hips,
// knees, ankles (left before right within each pair).
FlipSpec coco_flip_spec(double width);

KeypointSet flip_keypoints(const KeypointSet& kps, const FlipSpec& spec);

// Upper body = COCO indices 0..10, lower = 11..16. Returns the chosen half
// (other keypoints zeroed out) or nullopt when neither half has >= 3 visible.
std::optional<KeypointSet> half_body_select(const KeypointSet& kps, Rng& rng);

inline constexpr int kCocoUpperBodyEnd = 11;   // first lower-body index
inline constexpr int kHalfBodyMinVisible = 3;

}  // namespace hrpose
