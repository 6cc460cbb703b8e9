#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace vplan {

// One row per (pixel or latent) frame, columns are the flattened per-frame
// payload in (channel, row, col) order.
template <class Scalar>
using FrameMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Spatiotemporal patch folding geometry. Defaults follow an 8x8x4 patch.
struct PatchSpec {
    Eigen::Index spatial = 8;
    Eigen::Index temporal = 4;
};

// Pixel-space clip, values expected in [-1, 1]. frames() == 1 + T.
template <class Scalar>
struct PixelVideoT {
    Eigen::Index channels = 0;
    Eigen::Index height = 0;
    Eigen::Index width = 0;
    FrameMatrix<Scalar> data;  // frames x (channels*height*width)

    Eigen::Index frames() const { return data.rows(); }
    Eigen::Index per_frame() const { return channels * height * width; }

    Scalar& at(Eigen::Index f, Eigen::Index c, Eigen::Index y, Eigen::Index x) {
        return data(f, (c * height + y) * width + x);
    }
    Scalar at(Eigen::Index f, Eigen::Index c, Eigen::Index y, Eigen::Index x) const {
        return data(f, (c * height + y) * width + x);
    }

    static PixelVideoT zeros(Eigen::Index frames, Eigen::Index c, Eigen::Index h, Eigen::Index w) {
        PixelVideoT v;
        v.channels = c;
        v.height = h;
        v.width = w;
        v.data = FrameMatrix<Scalar>::Zero(frames, c * h * w);
        return v;
    }
};

// Latent-space clip produced by the invertible patch compressor.
// pixel_frames records the pixel-frame count (1 + T) so that decode can drop
// the temporal padding exactly.
template <class Scalar>
struct LatentVideoT {
    Eigen::Index channels = 0;
    Eigen::Index h = 0;
    Eigen::Index w = 0;
    Eigen::Index pixel_frames = 0;
    FrameMatrix<Scalar> data;  // latent_frames x (channels*h*w)

    Eigen::Index frames() const { return data.rows(); }
    Eigen::Index per_frame() const { return channels * h * w; }

    bool same_shape_as(const LatentVideoT& o) const {
        return channels == o.channels && h == o.h && w == o.w && data.rows() == o.data.rows();
    }

    static LatentVideoT zeros_like(const LatentVideoT& o) {
        LatentVideoT z = o;
        z.data.setZero();
        return z;
    }
};

using PixelVideo = PixelVideoT<double>;
using LatentVideo = LatentVideoT<double>;

inline Eigen::Index latent_frame_count(Eigen::Index pixel_frames, const PatchSpec& patch) {
    const Eigen::Index t = pixel_frames - 1;
    return 1 + (t + patch.temporal - 1) / patch.temporal;
}

namespace detail {
// Expanded timeline: the first pixel frame repeated `temporal` times, then
// the remaining frames, with the last frame held to fill the tail group.
inline Eigen::Index expanded_source_frame(Eigen::Index slot, Eigen::Index pixel_frames,
                                          const PatchSpec& patch) {
    if (slot < patch.temporal) return 0;
    const Eigen::Index f = slot - patch.temporal + 1;
    return f < pixel_frames ? f : pixel_frames - 1;
}
}  // namespace detail

// Lossless space-to-depth + first-frame-replication folding. Output channel
// layout is (dt, c, dy, dx) within each latent pixel.
template <class Scalar>
LatentVideoT<Scalar> encode(const PixelVideoT<Scalar>& video, const PatchSpec& patch = {}) {
    if (video.frames() < 1) throw std::invalid_argument("encode: empty video");
    if (patch.spatial < 1 || patch.temporal < 1)
        throw std::invalid_argument("encode: patch sizes must be positive");
    if (video.height % patch.spatial != 0 || video.width % patch.spatial != 0)
        throw std::invalid_argument(
            "encode: H and W must be divisible by the spatial patch size (got " +
            std::to_string(video.height) + "x" + std::to_string(video.width) + ", patch " +
            std::to_string(patch.spatial) + ")");

    const Eigen::Index ps = patch.spatial, pt = patch.temporal;
    const Eigen::Index C = video.channels, H = video.height, W = video.width;

    LatentVideoT<Scalar> latent;
    latent.channels = C * ps * ps * pt;
    latent.h = H / ps;
    latent.w = W / ps;
    latent.pixel_frames = video.frames();
    latent.data.resize(latent_frame_count(video.frames(), patch), latent.per_frame());

    for (Eigen::Index lf = 0; lf < latent.frames(); ++lf) {
        for (Eigen::Index dt = 0; dt < pt; ++dt) {
            const Eigen::Index src = detail::expanded_source_frame(lf * pt + dt, video.frames(), patch);
            for (Eigen::Index c = 0; c < C; ++c)
                for (Eigen::Index ly = 0; ly < latent.h; ++ly)
                    for (Eigen::Index dy = 0; dy < ps; ++dy)
                        for (Eigen::Index lx = 0; lx < latent.w; ++lx)
                            for (Eigen::Index dx = 0; dx < ps; ++dx) {
                                const Eigen::Index lc = ((dt * C + c) * ps + dy) * ps + dx;
                                latent.data(lf, (lc * latent.h + ly) * latent.w + lx) =
                                    video.at(src, c, ly * ps + dy, lx * ps + dx);
                            }
        }
    }
    return latent;
}

// Exact inverse of encode. Pixel frame 0 is read from the first replicated
// slot; temporal padding beyond pixel_frames is discarded.
template <class Scalar>
PixelVideoT<Scalar> decode(const LatentVideoT<Scalar>& latent, const PatchSpec& patch = {}) {
    const Eigen::Index ps = patch.spatial, pt = patch.temporal;
    if (latent.frames() < 1) throw std::invalid_argument("decode: empty latent");
    if (latent.channels % (ps * ps * pt) != 0)
        throw std::invalid_argument("decode: latent channels inconsistent with patch spec");
    const Eigen::Index C = latent.channels / (ps * ps * pt);

    Eigen::Index pixel_frames = latent.pixel_frames;
    if (pixel_frames == 0) pixel_frames = 1 + (latent.frames() - 1) * pt;
    if (latent_frame_count(pixel_frames, patch) != latent.frames())
        throw std::invalid_argument("decode: pixel_frames inconsistent with latent frame count");

    PixelVideoT<Scalar> video;
    video.channels = C;
    video.height = latent.h * ps;
    video.width = latent.w * ps;
    video.data.resize(pixel_frames, video.per_frame());

    for (Eigen::Index f = 0; f < pixel_frames; ++f) {
        // Frame 0 lives in group 0 slot 0; frame 1+i in slot pt + i.
        const Eigen::Index slot = f == 0 ? 0 : pt + (f - 1);
        const Eigen::Index lf = slot / pt, dt = slot % pt;
        for (Eigen::Index c = 0; c < C; ++c)
            for (Eigen::Index ly = 0; ly < latent.h; ++ly)
                for (Eigen::Index dy = 0; dy < ps; ++dy)
                    for (Eigen::Index lx = 0; lx < latent.w; ++lx)
                        for (Eigen::Index dx = 0; dx < ps; ++dx) {
                            const Eigen::Index lc = ((dt * C + c) * ps + dy) * ps + dx;
                            video.at(f, c, ly * ps + dy, lx * ps + dx) =
                                latent.data(lf, (lc * latent.h + ly) * latent.w + lx);
                        }
    }
    return video;
}

}  // namespace vplan
