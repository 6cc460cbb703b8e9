#include "vplan/retarget.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace vplan {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_rotation(const Eigen::Matrix3d& r, const char* who, double tol = 1e-6) {
    if ((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() > tol ||
        std::abs(r.determinant() - 1.0) > tol)
        throw std::invalid_argument(std::string(who) + ": matrix is not a rotation");
}

}  // namespace

void CameraModel::validate() const {
    require(fx > 0 && fy > 0, "CameraModel: focal lengths must be positive");
    for (const auto& e : extrinsics) check_rotation(e.rotation(), "CameraModel extrinsics");
}

Eigen::VectorXd RobotModel::arm_mid_range() const {
    Eigen::VectorXd q(arm_dof());
    for (Eigen::Index j = 0; j < q.size(); ++j) q[j] = 0.5 * (arm[j].lower + arm[j].upper);
    return q;
}

void RobotModel::validate() const {
    for (const auto& j : arm) {
        require(j.lower < j.upper, "RobotModel: joint '" + j.name + "' limits inverted");
        require(std::abs(j.axis.norm() - 1.0) < 1e-6,
                "RobotModel: joint '" + j.name + "' axis not unit norm");
    }
    for (const auto& j : hand.joints)
        require(j.lower < j.upper, "RobotModel: hand joint '" + j.name + "' limits inverted");
    for (const auto& f : hand.fingers)
        for (int idx : f.joint_indices)
            require(idx >= 0 && idx < static_cast<int>(hand.joints.size()),
                    "RobotModel: finger '" + f.name + "' references unknown joint");
}

void RetargetConfig::validate() const {
    check_rotation(cam_to_robot, "RetargetConfig::cam_to_robot");
    require(sg_window % 2 == 1 && sg_window > sg_order && sg_order >= 0,
            "RetargetConfig: sg_window must be odd and greater than sg_order");
    require(grasp_open_threshold > grasp_close_threshold && grasp_close_threshold > 0,
            "RetargetConfig: grasp thresholds must satisfy open > close > 0");
}

// --- Projection and frame maps ----------------------------------------------

Eigen::Vector3d backproject_wrist(const Eigen::Vector2d& uv, double depth,
                                  const CameraModel& cam) {
    require(depth > 0, "backproject_wrist: depth must be positive");
    require(cam.fx > 0 && cam.fy > 0, "backproject_wrist: invalid camera");
    return {(uv.x() - cam.cx) / cam.fx * depth, (uv.y() - cam.cy) / cam.fy * depth, depth};
}

Eigen::Vector2d project(const Eigen::Vector3d& p_cam, const CameraModel& cam) {
    require(p_cam.z() > 0, "project: point behind camera");
    return {cam.fx * p_cam.x() / p_cam.z() + cam.cx, cam.fy * p_cam.y() / p_cam.z() + cam.cy};
}

Eigen::Vector3d to_world(const Eigen::Vector3d& p_cam, const Eigen::Isometry3d& extrinsic) {
    return extrinsic * p_cam;
}

std::optional<double> sample_depth(const Eigen::MatrixXd& depth_map, const Eigen::Vector2d& uv) {
    const Eigen::Index rows = depth_map.rows(), cols = depth_map.cols();
    const Eigen::Index x = static_cast<Eigen::Index>(std::lround(uv.x()));
    const Eigen::Index y = static_cast<Eigen::Index>(std::lround(uv.y()));
    if (x < 0 || y < 0 || x >= cols || y >= rows) return std::nullopt;
    if (depth_map(y, x) > 0) return depth_map(y, x);

    std::vector<double> neighbours;
    for (Eigen::Index dy = -1; dy <= 1; ++dy)
        for (Eigen::Index dx = -1; dx <= 1; ++dx) {
            const Eigen::Index nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= cols || ny >= rows) continue;
            if (depth_map(ny, nx) > 0) neighbours.push_back(depth_map(ny, nx));
        }
    if (neighbours.empty()) return std::nullopt;
    std::sort(neighbours.begin(), neighbours.end());
    return neighbours[neighbours.size() / 2];
}

WristTrajectory camera_to_robot(const WristTrajectory& traj, const RetargetConfig& cfg) {
    check_rotation(cfg.cam_to_robot, "camera_to_robot");
    const Eigen::Quaterniond qm(cfg.cam_to_robot);

    WristTrajectory out = traj;
    out.frame_tag = TrajectoryFrame::robot;
    out.positions = (cfg.cam_to_robot * traj.positions).colwise() + cfg.t_align;
    for (auto& q : out.orientations) {
        q = cfg.rotation_map_mode == RotationMapMode::left_mult ? (qm * q).normalized()
                                                                : (qm * q * qm.inverse()).normalized();
    }
    return out;
}

// --- Completion and smoothing ------------------------------------------------

Eigen::Quaterniond slerp(const Eigen::Quaterniond& q0, const Eigen::Quaterniond& q1, double t) {
    require(q0.norm() > 1e-12 && q1.norm() > 1e-12, "slerp: zero quaternion");
    Eigen::Quaterniond a = q0.normalized();
    Eigen::Quaterniond b = q1.normalized();
    double dot = a.dot(b);
    if (dot < 0) {  // hemisphere sign flip for continuity
        b.coeffs() = -b.coeffs();
        dot = -dot;
    }
    dot = std::min(dot, 1.0);
    const double angle = std::acos(dot);
    Eigen::Quaterniond out;
    if (angle < 1e-6) {  // nearly parallel: normalized lerp
        out.coeffs() = (1.0 - t) * a.coeffs() + t * b.coeffs();
    } else {
        const double s = std::sin(angle);
        out.coeffs() =
            std::sin((1.0 - t) * angle) / s * a.coeffs() + std::sin(t * angle) / s * b.coeffs();
    }
    out.normalize();
    return out;
}

WristTrajectory complete_trajectory(const std::vector<TimedPose>& poses) {
    const Eigen::Index n = static_cast<Eigen::Index>(poses.size());
    std::vector<Eigen::Index> valid;
    for (Eigen::Index i = 0; i < n; ++i)
        if (poses[i].valid) valid.push_back(i);
    if (valid.size() < 2)
        throw std::runtime_error("complete_trajectory: fewer than two valid frames, trace unrecoverable");

    WristTrajectory traj;
    traj.frame_tag = TrajectoryFrame::camera0;
    traj.t_sec.resize(n);
    traj.positions.resize(3, n);
    traj.orientations.resize(n);

    for (Eigen::Index i = 0; i < n; ++i) traj.t_sec[i] = poses[i].t_sec;

    std::size_t next = 0;  // first valid index >= i
    for (Eigen::Index i = 0; i < n; ++i) {
        while (next < valid.size() && valid[next] < i) ++next;
        if (next < valid.size() && valid[next] == i) {
            traj.positions.col(i) = poses[i].p;
            traj.orientations[i] = poses[i].q.normalized();
            continue;
        }
        const bool has_prev = next > 0;
        const bool has_next = next < valid.size();
        if (!has_prev) {  // boundary: clamp to nearest valid pose
            const auto& ref = poses[valid.front()];
            traj.positions.col(i) = ref.p;
            traj.orientations[i] = ref.q.normalized();
        } else if (!has_next) {
            const auto& ref = poses[valid.back()];
            traj.positions.col(i) = ref.p;
            traj.orientations[i] = ref.q.normalized();
        } else {
            const auto& a = poses[valid[next - 1]];
            const auto& b = poses[valid[next]];
            const double span = b.t_sec - a.t_sec;
            const double u = span > 0 ? (poses[i].t_sec - a.t_sec) / span : 0.0;
            traj.positions.col(i) = (1.0 - u) * a.p + u * b.p;
            traj.orientations[i] = slerp(a.q, b.q, u);
        }
    }
    return traj;
}

WristTrajectory complete_trajectory(const std::vector<PoseTraceFrame>& frames,
                                    const CameraModel& cam) {
    cam.validate();
    std::vector<TimedPose> poses(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        TimedPose& p = poses[i];
        p.t_sec = f.t_sec;
        if (f.valid && f.depth && *f.depth > 0) {
            const Eigen::Vector3d p_cam = backproject_wrist(f.wrist_uv, *f.depth, cam);
            const Eigen::Isometry3d& e =
                i < cam.extrinsics.size() ? cam.extrinsics[i] : Eigen::Isometry3d::Identity();
            p.p = to_world(p_cam, e);
            p.q = Eigen::Quaterniond(e.rotation()) * f.quat_cam.normalized();
            p.valid = true;
        }
    }
    return complete_trajectory(poses);
}

namespace {

// Least-squares polynomial endpoint evaluation over the trailing window.
// With x = -(n-1)..0 the fitted value at the newest sample is coeff 0.
double sg_endpoint_fit(const Eigen::VectorXd& window_vals, int order) {
    const Eigen::Index n = window_vals.size();
    const int d = std::min<int>(order, static_cast<int>(n) - 1);
    Eigen::MatrixXd vand(n, d + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) - static_cast<double>(n - 1);
        double pw = 1.0;
        for (int c = 0; c <= d; ++c) {
            vand(i, c) = pw;
            pw *= x;
        }
    }
    const Eigen::VectorXd coeffs = vand.colPivHouseholderQr().solve(window_vals);
    return coeffs[0];
}

}  // namespace

Eigen::VectorXd savitzky_golay_causal(const Eigen::VectorXd& series, int window, int order) {
    require(series.size() > 0, "savitzky_golay_causal: empty series");
    require(window % 2 == 1 && window > order && order >= 0,
            "savitzky_golay_causal: window must be odd and greater than order");

    const Eigen::Index n = series.size();
    Eigen::VectorXd out(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::Index len = std::min<Eigen::Index>(window, t + 1);
        out[t] = sg_endpoint_fit(series.segment(t - len + 1, len), order);
    }
    return out;
}

WristTrajectory smooth_pose_trajectory(const WristTrajectory& traj, const RetargetConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = traj.size();
    require(n > 0, "smooth_pose_trajectory: empty trajectory");

    WristTrajectory out = traj;
    for (int axis = 0; axis < 3; ++axis)
        out.positions.row(axis) =
            savitzky_golay_causal(traj.positions.row(axis).transpose(), cfg.sg_window, cfg.sg_order)
                .transpose();

    // Global sign-continuity pass before filtering the quaternion channels.
    Eigen::MatrixXd quat(4, n);
    Eigen::Quaterniond prev = traj.orientations.empty() ? Eigen::Quaterniond::Identity()
                                                        : traj.orientations.front();
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Quaterniond q = traj.orientations[i];
        if (q.dot(prev) < 0) q.coeffs() = -q.coeffs();
        quat.col(i) << q.w(), q.x(), q.y(), q.z();
        prev = q;
    }
    for (int c = 0; c < 4; ++c)
        quat.row(c) =
            savitzky_golay_causal(quat.row(c).transpose(), cfg.sg_window, cfg.sg_order).transpose();

    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = quat.col(i).norm();
        if (norm < 1e-12)
            throw std::runtime_error("smooth_pose_trajectory: degenerate quaternion at frame " +
                                     std::to_string(i));
        out.orientations[i] =
            Eigen::Quaterniond(quat(0, i) / norm, quat(1, i) / norm, quat(2, i) / norm,
                               quat(3, i) / norm);
    }
    return out;
}

// --- Kinematics ----------------------------------------------------------------

namespace {

Eigen::VectorXd clamp_to_limits(const std::vector<JointSpec>& chain, const Eigen::VectorXd& q) {
    Eigen::VectorXd out = q;
    for (Eigen::Index j = 0; j < out.size(); ++j)
        out[j] = std::clamp(out[j], chain[j].lower, chain[j].upper);
    return out;
}

// Joint frames along the chain; frames[j] is the pose after joint j.
std::vector<Eigen::Isometry3d> chain_frames(const std::vector<JointSpec>& chain,
                                            const Eigen::VectorXd& q) {
    std::vector<Eigen::Isometry3d> frames(chain.size());
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    for (std::size_t j = 0; j < chain.size(); ++j) {
        t = t * Eigen::Translation3d(chain[j].origin) * Eigen::AngleAxisd(q[j], chain[j].axis);
        frames[j] = t;
    }
    return frames;
}

}  // namespace

Eigen::Isometry3d fk(const std::vector<JointSpec>& chain, const Eigen::Isometry3d& tool,
                     const Eigen::VectorXd& q) {
    require(q.size() == static_cast<Eigen::Index>(chain.size()), "fk: joint vector size mismatch");
    const Eigen::VectorXd qc = clamp_to_limits(chain, q);
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    for (std::size_t j = 0; j < chain.size(); ++j)
        t = t * Eigen::Translation3d(chain[j].origin) * Eigen::AngleAxisd(qc[j], chain[j].axis);
    return t * tool;
}

Eigen::Isometry3d fk(const RobotModel& robot, const Eigen::VectorXd& q) {
    return fk(robot.arm, robot.tool, q);
}

IkResult solve_ik(const RobotModel& robot, const Eigen::Isometry3d& target,
                  const Eigen::VectorXd& q_seed, const RetargetConfig& cfg) {
    require(target.matrix().allFinite(), "solve_ik: non-finite target");
    const auto& chain = robot.arm;
    const Eigen::Index n = robot.arm_dof();
    require(q_seed.size() == n, "solve_ik: seed size mismatch");

    const double lambda2 = cfg.ik_lambda * cfg.ik_lambda;
    constexpr double kMaxStepNorm = 0.5;  // rad, per-iteration cap

    IkResult best;
    best.q = clamp_to_limits(chain, q_seed);
    double best_score = std::numeric_limits<double>::infinity();

    Eigen::VectorXd q = best.q;
    for (int iter = 0; iter <= cfg.ik_max_iters; ++iter) {
        const auto frames = chain_frames(chain, q);
        const Eigen::Isometry3d cur = frames.back() * robot.tool;

        const Eigen::Vector3d e_pos = target.translation() - cur.translation();
        const Eigen::AngleAxisd rel(target.rotation() * cur.rotation().transpose());
        const Eigen::Vector3d e_rot = rel.angle() * rel.axis();

        const double pos_err = e_pos.norm();
        const double rot_err = std::abs(rel.angle());
        const double score = pos_err + 0.1 * rot_err;
        if (score < best_score) {
            best_score = score;
            best.q = q;
            best.pos_err = pos_err;
            best.rot_err = rot_err;
            best.iters = iter;
        }
        if (pos_err < cfg.ik_pos_tol && rot_err < cfg.ik_rot_tol) {
            best.converged = true;
            break;
        }
        if (iter == cfg.ik_max_iters) break;

        Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, n);
        const Eigen::Vector3d p_tool = cur.translation();
        Eigen::Isometry3d prev = Eigen::Isometry3d::Identity();
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Vector3d axis_w =
                (prev.rotation() * chain[j].axis).normalized();
            const Eigen::Vector3d origin_w =
                (prev * Eigen::Translation3d(chain[j].origin)).translation();
            jac.col(j).head<3>() = axis_w.cross(p_tool - origin_w);
            jac.col(j).tail<3>() = axis_w;
            prev = frames[j];
        }

        Eigen::Matrix<double, 6, 1> err;
        err << e_pos, e_rot;
        const Eigen::Matrix<double, 6, 6> gram =
            jac * jac.transpose() + lambda2 * Eigen::Matrix<double, 6, 6>::Identity();
        Eigen::VectorXd dq = jac.transpose() * gram.ldlt().solve(err);
        const double step = dq.norm();
        if (step > kMaxStepNorm) dq *= kMaxStepNorm / step;
        q = clamp_to_limits(chain, q + dq);
    }
    return best;
}

// --- Hand channel -------------------------------------------------------------

namespace {

// Fingertip position in the wrist frame plus its Jacobian w.r.t. the hand
// joint vector (columns only for the finger's own joints).
Eigen::Vector3d finger_tip(const HandModel& hand, const FingerSpec& finger,
                           const Eigen::VectorXd& q_hand, Eigen::MatrixXd* jac) {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.translate(finger.root_offset);

    std::vector<Eigen::Isometry3d> frames;
    std::vector<Eigen::Vector3d> axes_w, origins_w;
    for (int idx : finger.joint_indices) {
        const JointSpec& js = hand.joints[idx];
        const double qj = std::clamp(q_hand[idx], js.lower, js.upper);
        axes_w.push_back((t.rotation() * js.axis).normalized());
        origins_w.push_back((t * Eigen::Translation3d(js.origin)).translation());
        t = t * Eigen::Translation3d(js.origin) * Eigen::AngleAxisd(qj, js.axis);
    }
    const Eigen::Vector3d tip = (t * Eigen::Translation3d(finger.tip_offset)).translation();

    if (jac) {
        jac->setZero(3, q_hand.size());
        for (std::size_t j = 0; j < finger.joint_indices.size(); ++j)
            jac->col(finger.joint_indices[j]) = axes_w[j].cross(tip - origins_w[j]);
    }
    return tip;
}

Eigen::VectorXd clamp_hand(const HandModel& hand, const Eigen::VectorXd& q) {
    Eigen::VectorXd out = q;
    for (Eigen::Index j = 0; j < out.size(); ++j)
        out[j] = std::clamp(out[j], hand.joints[j].lower, hand.joints[j].upper);
    return out;
}

}  // namespace

Eigen::MatrixXd retarget_fingers(const std::vector<Eigen::Matrix3Xd>& keypoints,
                                 const HandModel& hand, const RetargetConfig& cfg,
                                 const std::vector<Eigen::Quaterniond>& wrist_rotations) {
    require(hand.dof() > 0 && !hand.fingers.empty(), "retarget_fingers: hand model has no fingers");
    for (const auto& f : hand.fingers)
        require(f.human_tip_index >= 0 && f.human_tip_index < 21,
                "retarget_fingers: human tip index outside MANO range");
    if (!wrist_rotations.empty())
        require(wrist_rotations.size() == keypoints.size(),
                "retarget_fingers: wrist rotation count mismatch");

    const Eigen::Index dof = hand.dof();
    const Eigen::Index nf = static_cast<Eigen::Index>(hand.fingers.size());
    const int frames = static_cast<int>(keypoints.size());

    Eigen::VectorXd mid(dof);
    for (Eigen::Index j = 0; j < dof; ++j)
        mid[j] = 0.5 * (hand.joints[j].lower + hand.joints[j].upper);

    Eigen::MatrixXd result(frames, dof);
    Eigen::VectorXd q_prev = mid;
    constexpr double kGnDamping = 1e-9;

    for (int t = 0; t < frames; ++t) {
        const Eigen::Matrix3Xd& kp = keypoints[t];
        require(kp.cols() == 21, "retarget_fingers: expected 21 MANO keypoints per frame");
        require(kp.allFinite(), "retarget_fingers: non-finite keypoints at frame " +
                                    std::to_string(t));

        const Eigen::Matrix3d r_wrist = wrist_rotations.empty()
                                            ? Eigen::Matrix3d::Identity()
                                            : wrist_rotations[t].normalized().toRotationMatrix();
        Eigen::Matrix3Xd v_human(3, nf);
        for (Eigen::Index i = 0; i < nf; ++i)
            v_human.col(i) = r_wrist.transpose() *
                             (kp.col(hand.fingers[i].human_tip_index) - kp.col(kManoWrist));

        Eigen::VectorXd q = clamp_hand(hand, q_prev);
        for (int iter = 0; iter < 50; ++iter) {
            Eigen::VectorXd residual(3 * nf);
            Eigen::MatrixXd jac(3 * nf, dof);
            for (Eigen::Index i = 0; i < nf; ++i) {
                Eigen::MatrixXd jf;
                const Eigen::Vector3d tip = finger_tip(hand, hand.fingers[i], q, &jf);
                residual.segment<3>(3 * i) = cfg.alpha * v_human.col(i) - tip;
                jac.middleRows(3 * i, 3) = jf;
            }
            const Eigen::MatrixXd h =
                jac.transpose() * jac +
                (cfg.beta + kGnDamping) * Eigen::MatrixXd::Identity(dof, dof);
            const Eigen::VectorXd g = jac.transpose() * residual + cfg.beta * (q_prev - q);
            const Eigen::VectorXd dq = h.ldlt().solve(g);
            q = clamp_hand(hand, q + dq);
            if (dq.norm() < 1e-6) break;
        }
        result.row(t) = q.transpose();
        q_prev = q;
    }
    return result;
}

GripperTrack gripper_retarget(const std::vector<Eigen::Matrix3Xd>& keypoints,
                              const RetargetConfig& cfg) {
    cfg.validate();
    require(!keypoints.empty(), "gripper_retarget: empty keypoint sequence");

    GripperTrack track;
    track.width.resize(static_cast<Eigen::Index>(keypoints.size()));
    for (std::size_t t = 0; t < keypoints.size(); ++t) {
        const auto& kp = keypoints[t];
        require(kp.cols() == 21, "gripper_retarget: thumb and index fingertips missing");
        track.width[static_cast<Eigen::Index>(t)] =
            (kp.col(kManoThumbTip) - kp.col(kManoIndexTip)).norm();
    }

    // Hysteresis automaton: close when the width drops below the close
    // threshold, open when it rises above the open threshold.
    bool closed = track.width[0] <= cfg.grasp_close_threshold;
    for (Eigen::Index t = 1; t < track.width.size(); ++t) {
        if (!closed && track.width[t] < cfg.grasp_close_threshold) {
            closed = true;
            track.events.push_back({static_cast<int>(t), GripperEvent::Kind::close});
        } else if (closed && track.width[t] > cfg.grasp_open_threshold) {
            closed = false;
            track.events.push_back({static_cast<int>(t), GripperEvent::Kind::open});
        }
    }
    return track;
}

// --- Full pipeline ---------------------------------------------------------------

namespace {

template <class F>
auto run_stage(const char* stage, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(stage) + ": " + e.what());
    }
}

}  // namespace

ActionPlan plan_to_actions(const PoseTrace& trace, const RobotModel& robot,
                           const RetargetConfig& cfg) {
    cfg.validate();
    robot.validate();
    require(!trace.frames.empty(), "plan_to_actions: empty trace");

    const WristTrajectory completed = run_stage(
        "complete", [&] { return complete_trajectory(trace.frames, trace.camera); });
    const WristTrajectory smoothed =
        run_stage("smooth", [&] { return smooth_pose_trajectory(completed, cfg); });
    const WristTrajectory robot_traj =
        run_stage("frame_map", [&] { return camera_to_robot(smoothed, cfg); });

    ActionPlan plan;
    plan.t_sec = robot_traj.t_sec;
    plan.robot_wrist = robot_traj;

    const Eigen::Index n = robot_traj.size();
    plan.arm_q.resize(n, robot.arm_dof());
    plan.ik_converged.resize(static_cast<std::size_t>(n));
    Eigen::VectorXd seed = robot.arm_mid_range();
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Isometry3d target = Eigen::Isometry3d::Identity();
        target.linear() = robot_traj.orientations[i].toRotationMatrix();
        target.translation() = robot_traj.positions.col(i);
        IkResult res;
        try {
            res = solve_ik(robot, target, seed, cfg);
        } catch (const std::exception& e) {
            throw std::runtime_error("ik[frame " + std::to_string(i) + "]: " + e.what());
        }
        plan.arm_q.row(i) = res.q.transpose();
        plan.ik_converged[static_cast<std::size_t>(i)] = res.converged;
        seed = res.q;  // warm start
    }

    // Hand channel: dexterous joints when the robot has them, else gripper.
    std::vector<Eigen::Matrix3Xd> keypoints;
    std::vector<Eigen::Quaterniond> wrist_rot;
    bool any_kp = false;
    Eigen::Matrix3Xd last = Eigen::Matrix3Xd::Zero(3, 21);
    for (const auto& f : trace.frames)
        if (f.keypoints_cam.cols() == 21) {
            last = f.keypoints_cam;  // seed the hold with the first observed hand
            any_kp = true;
            break;
        }
    for (const auto& f : trace.frames) {
        if (f.keypoints_cam.cols() == 21) last = f.keypoints_cam;
        keypoints.push_back(last);  // hold-last for frames without keypoints
        wrist_rot.push_back(f.quat_cam);
    }

    plan.uses_gripper = robot.hand.dof() == 0;
    if (any_kp) {
        if (plan.uses_gripper) {
            plan.gripper = run_stage("gripper", [&] { return gripper_retarget(keypoints, cfg); });
        } else {
            plan.hand_q = run_stage(
                "fingers", [&] { return retarget_fingers(keypoints, robot.hand, cfg, wrist_rot); });
        }
    }
    return plan;
}

}  // namespace vplan
