#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vplan {

// MANO 21-keypoint convention: wrist 0, then four joints per finger in
// thumb/index/middle/ring/pinky order; fingertips at 4, 8, 12, 16, 20.
constexpr int kManoWrist = 0;
constexpr int kManoThumbTip = 4;
constexpr int kManoIndexTip = 8;
constexpr int kManoMiddleTip = 12;
constexpr int kManoRingTip = 16;
constexpr int kManoPinkyTip = 20;

struct CameraModel {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    std::vector<Eigen::Isometry3d> extrinsics;  // per-frame camera-to-world

    void validate() const;
};

struct PoseTraceFrame {
    int frame_idx = 0;
    double t_sec = 0;
    Eigen::Vector2d wrist_uv = Eigen::Vector2d::Zero();
    std::optional<double> depth;                 // meters
    Eigen::Quaterniond quat_cam = Eigen::Quaterniond::Identity();  // wrist in camera frame
    bool valid = false;
    Eigen::Matrix3Xd keypoints_cam;              // 3 x 21 (or 3 x 0 when absent)
};

struct PoseTrace {
    CameraModel camera;
    std::vector<PoseTraceFrame> frames;
};

enum class TrajectoryFrame { camera0, robot };

struct WristTrajectory {
    TrajectoryFrame frame_tag = TrajectoryFrame::camera0;
    Eigen::VectorXd t_sec;
    Eigen::Matrix3Xd positions;                  // 3 x N
    std::vector<Eigen::Quaterniond> orientations;

    Eigen::Index size() const { return positions.cols(); }
};

struct JointSpec {
    std::string name;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();  // offset from previous joint frame
    double lower = -3.14159265358979323846;
    double upper = 3.14159265358979323846;
};

struct FingerSpec {
    std::string name;
    int human_tip_index = kManoIndexTip;
    Eigen::Vector3d root_offset = Eigen::Vector3d::Zero();  // wrist -> finger base
    std::vector<int> joint_indices;                         // into HandModel::joints
    Eigen::Vector3d tip_offset = Eigen::Vector3d::Zero();
};

struct HandModel {
    std::vector<JointSpec> joints;
    std::vector<FingerSpec> fingers;

    Eigen::Index dof() const { return static_cast<Eigen::Index>(joints.size()); }
};

struct RobotModel {
    std::vector<JointSpec> arm;
    Eigen::Isometry3d tool = Eigen::Isometry3d::Identity();
    HandModel hand;  // empty joints => parallel gripper

    Eigen::Index arm_dof() const { return static_cast<Eigen::Index>(arm.size()); }
    Eigen::VectorXd arm_mid_range() const;
    void validate() const;
};

enum class RotationMapMode { left_mult, conjugate };

struct RetargetConfig {
    Eigen::Matrix3d cam_to_robot = Eigen::Matrix3d::Identity();  // M in SO(3)
    Eigen::Vector3d t_align = Eigen::Vector3d::Zero();
    RotationMapMode rotation_map_mode = RotationMapMode::conjugate;
    int sg_window = 9;  // odd, > sg_order
    int sg_order = 3;
    double alpha = 1.0;  // human-to-robot hand scale
    double beta = 0.05;  // temporal regularizer on finger joints
    double grasp_close_threshold = 0.03;  // meters
    double grasp_open_threshold = 0.06;
    double ik_lambda = 0.05;
    int ik_max_iters = 200;
    double ik_pos_tol = 1e-4;   // meters
    double ik_rot_tol = 1e-3;   // radians

    void validate() const;
};

// --- Projection and frame maps -------------------------------------------

Eigen::Vector3d backproject_wrist(const Eigen::Vector2d& uv, double depth, const CameraModel& cam);
Eigen::Vector2d project(const Eigen::Vector3d& p_cam, const CameraModel& cam);
Eigen::Vector3d to_world(const Eigen::Vector3d& p_cam, const Eigen::Isometry3d& extrinsic);

// Nearest-pixel depth lookup with a 3x3 median fallback over valid (>0)
// neighbours when the center sample is invalid.
std::optional<double> sample_depth(const Eigen::MatrixXd& depth_map, const Eigen::Vector2d& uv);

WristTrajectory camera_to_robot(const WristTrajectory& traj, const RetargetConfig& cfg);

// --- Completion and smoothing ---------------------------------------------

Eigen::Quaterniond slerp(const Eigen::Quaterniond& q0, const Eigen::Quaterniond& q1, double t);

struct TimedPose {
    double t_sec = 0;
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
    bool valid = false;
};

WristTrajectory complete_trajectory(const std::vector<TimedPose>& poses);
WristTrajectory complete_trajectory(const std::vector<PoseTraceFrame>& frames,
                                    const CameraModel& cam);

Eigen::VectorXd savitzky_golay_causal(const Eigen::VectorXd& series, int window, int order);

WristTrajectory smooth_pose_trajectory(const WristTrajectory& traj, const RetargetConfig& cfg);

// --- Hand channel ----------------------------------------------------------

// DexPilot-style per-frame optimization of robot finger joints against
// scaled wrist->fingertip vectors. Keypoints may be accompanied by per-frame
// wrist rotations used to express the vectors in the wrist-local frame.
Eigen::MatrixXd retarget_fingers(const std::vector<Eigen::Matrix3Xd>& keypoints,
                                 const HandModel& hand, const RetargetConfig& cfg,
                                 const std::vector<Eigen::Quaterniond>& wrist_rotations = {});

struct GripperEvent {
    int frame_idx = 0;
    enum class Kind { close, open } kind = Kind::close;
};

struct GripperTrack {
    Eigen::VectorXd width;
    std::vector<GripperEvent> events;
};

GripperTrack gripper_retarget(const std::vector<Eigen::Matrix3Xd>& keypoints,
                              const RetargetConfig& cfg);

// External grasp-pose provider seam; ships with a pass-through stub.
class GraspPoseProvider {
public:
    virtual ~GraspPoseProvider() = default;
    virtual std::optional<Eigen::Isometry3d> candidate_grasp(
        const Eigen::Matrix3Xd& keypoints) const = 0;
};

class PassthroughGraspProvider final : public GraspPoseProvider {
public:
    std::optional<Eigen::Isometry3d> candidate_grasp(const Eigen::Matrix3Xd&) const override {
        return std::nullopt;
    }
};

// --- Kinematics ------------------------------------------------------------

// Product of per-joint Trans(origin) * Rot(axis, q) transforms, then the tool
// offset. Joint values outside limits are clamped.
Eigen::Isometry3d fk(const std::vector<JointSpec>& chain, const Eigen::Isometry3d& tool,
                     const Eigen::VectorXd& q);
Eigen::Isometry3d fk(const RobotModel& robot, const Eigen::VectorXd& q);

struct IkResult {
    Eigen::VectorXd q;
    bool converged = false;
    double pos_err = 0;
    double rot_err = 0;
    int iters = 0;
};

// Damped-least-squares IK; returns best-so-far with a converged flag.
IkResult solve_ik(const RobotModel& robot, const Eigen::Isometry3d& target,
                  const Eigen::VectorXd& q_seed, const RetargetConfig& cfg);

// --- Full pipeline ----------------------------------------------------------

struct ActionPlan {
    Eigen::VectorXd t_sec;
    Eigen::MatrixXd arm_q;            // frames x arm_dof
    std::vector<bool> ik_converged;   // per frame
    bool uses_gripper = false;
    Eigen::MatrixXd hand_q;           // frames x hand_dof (dexterous path)
    GripperTrack gripper;             // gripper path
    WristTrajectory robot_wrist;      // smoothed, robot frame
};

ActionPlan plan_to_actions(const PoseTrace& trace, const RobotModel& robot,
                           const RetargetConfig& cfg);

}  // namespace vplan
