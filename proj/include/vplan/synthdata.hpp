#pragma once

#include <string>
#include <vector>

#include "vplan/latent.hpp"
#include "vplan/retarget.hpp"
#include "vplan/rng.hpp"

namespace vplan {

enum class Motion { left, right, up, down };

const char* motion_word(Motion m);

// Toy moving-shape world: a bright square translating one step per frame on
// a dark wrap-around grid, captioned by its motion word.
struct ToyWorldSpec {
    int grid = 16;
    int object_size = 4;
    Motion motion = Motion::right;
    int frames = 13;  // pixel frames (1 + T)
    int speed = 1;    // pixels per frame
    std::uint64_t seed = 0;
    int start_x = -1;  // -1: drawn from seed
    int start_y = -1;
};

struct ToyClip {
    PixelVideo video;  // single channel, values in {-1, +1}
    std::string caption;
};

ToyClip gen_clip(const ToyWorldSpec& spec);

// Ground-truth continuation of a clip: same world state advanced by the same
// motion; frame t of the returned video equals frame (frames + t) of an
// infinite rollout.
PixelVideo continue_clip(const ToyWorldSpec& spec, const ToyClip& clip, int extra_frames);

// Synthetic wrist trace generator: a circular path observed through a known
// camera, with optional pixel noise and dropouts. Ground truth is emitted
// alongside the corrupted trace.
struct TraceSpec {
    int frames = 400;
    double fps = 30.0;
    double radius = 0.2;                             // meters
    Eigen::Vector3d center{0.0, 0.0, 0.9};           // world == camera0 frame
    double wobble_rad = 0.0;                         // orientation oscillation amplitude
    double sigma_px = 0.0;
    double dropout_prob = 0.0;
    std::uint64_t seed = 0;
    CameraModel camera;                              // default: f=525, c=(320,240), static
    double grip_open_width = 0.08;                   // thumb-index distance script
    double grip_close_width = 0.02;
    int grip_cycles = 1;                             // close/open cycles over the trace

    TraceSpec();
};

struct SyntheticTrace {
    PoseTrace trace;
    WristTrajectory truth;  // camera0/world frame, uncorrupted
    std::vector<bool> dropped;
};

SyntheticTrace gen_pose_trace(const TraceSpec& spec);

}  // namespace vplan
