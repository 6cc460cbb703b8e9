#include "vplan/synthdata.hpp"

#include <cmath>
#include <stdexcept>

namespace vplan {

const char* motion_word(Motion m) {
    switch (m) {
        case Motion::left: return "left";
        case Motion::right: return "right";
        case Motion::up: return "up";
        case Motion::down: return "down";
    }
    return "right";
}

namespace {

void motion_delta(Motion m, int speed, int& dx, int& dy) {
    dx = dy = 0;
    switch (m) {
        case Motion::left: dx = -speed; break;
        case Motion::right: dx = speed; break;
        case Motion::up: dy = -speed; break;
        case Motion::down: dy = speed; break;
    }
}

void draw_square(PixelVideo& video, int frame, int grid, int size, int x0, int y0) {
    for (int dy = 0; dy < size; ++dy)
        for (int dx = 0; dx < size; ++dx) {
            const int x = ((x0 + dx) % grid + grid) % grid;  // wrap-around world
            const int y = ((y0 + dy) % grid + grid) % grid;
            video.at(frame, 0, y, x) = 1.0;
        }
}

PixelVideo render_world(const ToyWorldSpec& spec, int start_frame, int frames, int sx, int sy) {
    PixelVideo video = PixelVideo::zeros(frames, 1, spec.grid, spec.grid);
    video.data.setConstant(-1.0);
    int dx, dy;
    motion_delta(spec.motion, spec.speed, dx, dy);
    for (int t = 0; t < frames; ++t) {
        const int step = start_frame + t;
        draw_square(video, t, spec.grid, spec.object_size, sx + step * dx, sy + step * dy);
    }
    return video;
}

void resolve_start(const ToyWorldSpec& spec, int& sx, int& sy) {
    if (spec.start_x >= 0 && spec.start_y >= 0) {
        sx = spec.start_x;
        sy = spec.start_y;
        return;
    }
    Rng rng(spec.seed);
    sx = rng.uniform_int(0, spec.grid - 1);
    sy = rng.uniform_int(0, spec.grid - 1);
}

}  // namespace

ToyClip gen_clip(const ToyWorldSpec& spec) {
    if (spec.grid < 2 || spec.object_size < 1 || spec.object_size > spec.grid)
        throw std::invalid_argument("gen_clip: object does not fit the grid");
    if (spec.frames < 1) throw std::invalid_argument("gen_clip: need at least one frame");
    int sx, sy;
    resolve_start(spec, sx, sy);
    return {render_world(spec, 0, spec.frames, sx, sy), motion_word(spec.motion)};
}

PixelVideo continue_clip(const ToyWorldSpec& spec, const ToyClip&, int extra_frames) {
    int sx, sy;
    resolve_start(spec, sx, sy);
    return render_world(spec, spec.frames, extra_frames, sx, sy);
}

TraceSpec::TraceSpec() {
    camera.fx = 525.0;
    camera.fy = 525.0;
    camera.cx = 320.0;
    camera.cy = 240.0;
}

SyntheticTrace gen_pose_trace(const TraceSpec& spec) {
    if (spec.frames < 2) throw std::invalid_argument("gen_pose_trace: need at least two frames");
    Rng rng(spec.seed);

    SyntheticTrace out;
    out.trace.camera = spec.camera;
    if (out.trace.camera.extrinsics.empty())
        out.trace.camera.extrinsics.assign(static_cast<std::size_t>(spec.frames),
                                           Eigen::Isometry3d::Identity());
    out.trace.camera.validate();

    out.truth.frame_tag = TrajectoryFrame::camera0;
    out.truth.t_sec.resize(spec.frames);
    out.truth.positions.resize(3, spec.frames);
    out.truth.orientations.resize(static_cast<std::size_t>(spec.frames));
    out.dropped.resize(static_cast<std::size_t>(spec.frames), false);

    // Fixed local fingertip offsets; the thumb-index pair follows the width
    // script so gripper retargeting sees open/close cycles.
    Eigen::Matrix3Xd local = Eigen::Matrix3Xd::Zero(3, 21);
    for (int finger = 0; finger < 5; ++finger)
        for (int j = 1; j <= 4; ++j) {
            const int idx = finger * 4 + j;
            local.col(idx) = Eigen::Vector3d(0.02 * j, 0.015 * (finger - 2), 0.0);
        }

    for (int t = 0; t < spec.frames; ++t) {
        const double phase = 2.0 * M_PI * static_cast<double>(t) / spec.frames;
        const Eigen::Vector3d p_world =
            spec.center + Eigen::Vector3d(spec.radius * std::cos(phase),
                                          spec.radius * std::sin(phase),
                                          0.05 * std::sin(2.0 * phase));
        const Eigen::Quaterniond q_world(
            Eigen::AngleAxisd(spec.wobble_rad * std::sin(phase), Eigen::Vector3d::UnitY()));

        out.truth.t_sec[t] = static_cast<double>(t) / spec.fps;
        out.truth.positions.col(t) = p_world;
        out.truth.orientations[static_cast<std::size_t>(t)] = q_world;

        const Eigen::Isometry3d& ext = out.trace.camera.extrinsics[static_cast<std::size_t>(t)];
        const Eigen::Vector3d p_cam = ext.inverse() * p_world;
        const Eigen::Quaterniond q_cam =
            Eigen::Quaterniond(ext.rotation()).inverse() * q_world;

        PoseTraceFrame frame;
        frame.frame_idx = t;
        frame.t_sec = out.truth.t_sec[t];
        frame.quat_cam = q_cam;
        frame.depth = p_cam.z();
        frame.wrist_uv = project(p_cam, spec.camera);
        frame.wrist_uv.x() += spec.sigma_px * rng.normal();
        frame.wrist_uv.y() += spec.sigma_px * rng.normal();
        frame.valid = true;

        // Width script: cosine sweep between open and closed widths.
        const double cyc = std::cos(2.0 * M_PI * spec.grip_cycles * t / spec.frames);
        const double width =
            spec.grip_close_width +
            (spec.grip_open_width - spec.grip_close_width) * 0.5 * (1.0 + cyc);
        Eigen::Matrix3Xd kp = local;
        kp.col(kManoThumbTip) = Eigen::Vector3d(0.08, -width / 2, 0.0);
        kp.col(kManoIndexTip) = Eigen::Vector3d(0.08, width / 2, 0.0);
        const Eigen::Matrix3d r = q_cam.toRotationMatrix();
        for (int i = 0; i < 21; ++i) kp.col(i) = p_cam + r * kp.col(i);
        frame.keypoints_cam = kp;

        if (rng.bernoulli(spec.dropout_prob)) {
            frame.valid = false;
            out.dropped[static_cast<std::size_t>(t)] = true;
        }
        out.trace.frames.push_back(std::move(frame));
    }
    return out;
}

}  // namespace vplan
