#include "hrpose/geometry.hpp"

#include <cmath>
#include <numbers>

namespace hrpose {

AffineXform affine_identity() { return {}; }

AffineXform affine_translation(double tx, double ty) {
    AffineXform a;
    a.m = {1, 0, tx, 0, 1, ty};
    return a;
}

AffineXform affine_scale(double sx, double sy) {
    AffineXform a;
    a.m = {sx, 0, 0, 0, sy, 0};
    return a;
}

AffineXform affine_rotation_deg(double degrees) {
    const double r = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(r), s = std::sin(r);
    AffineXform a;
    a.m = {c, -s, 0, s, c, 0};
    return a;
}

AffineXform affine_hflip(double width) {
    AffineXform a;
    a.m = {-1, 0, width - 1, 0, 1, 0};
    return a;
}

AffineXform compose(const AffineXform& a, const AffineXform& b) {
    AffineXform r;
    r.m[0] = a.m[0] * b.m[0] + a.m[1] * b.m[3];
    r.m[1] = a.m[0] * b.m[1] + a.m[1] * b.m[4];
    r.m[2] = a.m[0] * b.m[2] + a.m[1] * b.m[5] + a.m[2];
    r.m[3] = a.m[3] * b.m[0] + a.m[4] * b.m[3];
    r.m[4] = a.m[3] * b.m[1] + a.m[4] * b.m[4];
    r.m[5] = a.m[3] * b.m[2] + a.m[4] * b.m[5] + a.m[5];
    return r;
}

AffineXform invert_affine(const AffineXform& xf) {
    const double det = xf.m[0] * xf.m[4] - xf.m[1] * xf.m[3];
    if (std::abs(det) < 1e-12) throw SingularXform("affine matrix is singular");
    AffineXform r;
    r.m[0] = xf.m[4] / det;
    r.m[1] = -xf.m[1] / det;
    r.m[3] = -xf.m[3] / det;
    r.m[4] = xf.m[0] / det;
    r.m[2] = -(r.m[0] * xf.m[2] + r.m[1] * xf.m[5]);
    r.m[5] = -(r.m[3] * xf.m[2] + r.m[4] * xf.m[5]);
    return r;
}

std::vector<Vec2> apply_affine(const std::vector<Vec2>& points, const AffineXform& xf) {
    std::vector<Vec2> out;
    out.reserve(points.size());
    for (const Vec2& p : points) out.push_back(xf.apply(p));
    return out;
}

CropSpec box_to_crop(const Box& box, int out_w, int out_h, double pad_factor) {
    if (box.w <= 0 || box.h <= 0) throw InvalidBox("box dimensions must be positive");
    if (out_w <= 0 || out_h <= 0) throw InvalidBox("output dimensions must be positive");
    CropSpec spec;
    spec.center = {box.x + box.w / 2.0, box.y + box.h / 2.0};
    spec.out_w = out_w;
    spec.out_h = out_h;
    const double aspect = static_cast<double>(out_w) / out_h;
    double w = box.w, h = box.h;
    if (w / h < aspect)
        w = h * aspect;   // too narrow: grow width
    else if (w / h > aspect)
        h = w / aspect;   // too wide: grow height
    spec.box_size = {w * pad_factor, h * pad_factor};
    return spec;
}

AffineXform make_affine(const CropSpec& spec) {
    if (spec.box_size.x <= 0 || spec.box_size.y <= 0 || spec.out_w <= 0 || spec.out_h <= 0)
        throw InvalidBox("crop spec has non-positive dimensions");
    AffineXform a = affine_translation(-spec.center.x, -spec.center.y);
    a = compose(affine_rotation_deg(-spec.rotation), a);
    a = compose(affine_scale(spec.out_w / spec.box_size.x, spec.out_h / spec.box_size.y), a);
    if (spec.flip) {
        // mirror about the box-centred axis; resolves to x -> (out_w-1) - x
        AffineXform f;
        f.m = {-1, 0, -1, 0, 1, 0};
        a = compose(f, a);
    }
    a = compose(affine_translation(spec.out_w / 2.0, spec.out_h / 2.0), a);
    return a;
}

FlipSpec coco_flip_spec(double width) {
    return FlipSpec{
        {{1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10}, {11, 12}, {13, 14}, {15, 16}},
        width};
}

KeypointSet flip_keypoints(const KeypointSet& kps, const FlipSpec& spec) {
    KeypointSet out = kps;
    for (auto& p : out.pts) p.x = spec.width - 1 - p.x;
    for (auto [l, r] : spec.pairs) {
        if (l < 0 || r < 0 || static_cast<size_t>(l) >= out.pts.size() ||
            static_cast<size_t>(r) >= out.pts.size())
            throw RangeError("flip pair index out of range");
        std::swap(out.pts[static_cast<size_t>(l)], out.pts[static_cast<size_t>(r)]);
    }
    return out;
}

std::optional<KeypointSet> half_body_select(const KeypointSet& kps, Rng& rng) {
    int upper = 0, lower = 0;
    for (size_t i = 0; i < kps.pts.size(); ++i) {
        if (kps.pts[i].v > 0) {
            (static_cast<int>(i) < kCocoUpperBodyEnd ? upper : lower)++;
        }
    }
    const bool upper_ok = upper >= kHalfBodyMinVisible;
    const bool lower_ok = lower >= kHalfBodyMinVisible;
    if (!upper_ok && !lower_ok) return std::nullopt;
    bool take_upper = upper_ok;
    if (upper_ok && lower_ok) take_upper = rng.bernoulli(0.5);

    KeypointSet out = kps;
    for (size_t i = 0; i < out.pts.size(); ++i) {
        const bool in_half = take_upper ? static_cast<int>(i) < kCocoUpperBodyEnd
                                        : static_cast<int>(i) >= kCocoUpperBodyEnd;
        if (!in_half) out.pts[i] = Keypoint{};
    }
    return out;
}

}  // namespace hrpose
