#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vplan/curation.hpp"
#include "vplan/denoiser.hpp"
#include "vplan/eval.hpp"
#include "vplan/latent.hpp"
#include "vplan/retarget.hpp"

namespace vplan {

// Raw tensor container: little-endian 32-bit dim count, then the dims, then
// float32 payload in row-major order.
void save_tensor(const std::string& path, const std::vector<std::uint32_t>& dims,
                 const std::vector<float>& values);
std::pair<std::vector<std::uint32_t>, std::vector<float>> load_tensor(const std::string& path);

// Pixel videos as [frames, channels, height, width] tensors.
void save_video(const std::string& path, const PixelVideo& video);
PixelVideo load_video(const std::string& path);

// Checkpoints: magic + version, JSON config header, named float64 tensors.
void save_checkpoint(const std::string& path, const ToyDenoiserParams& params);
ToyDenoiserParams load_checkpoint(const std::string& path);

// Pose trace: JSON-lines with a camera header line, one object per frame.
void save_pose_trace(const std::string& path, const PoseTrace& trace);
PoseTrace load_pose_trace(const std::string& path);

// Robot model: structured text, one joint/finger/tool declaration per line.
RobotModel load_robot_model(const std::string& path);
RobotModel parse_robot_model(const std::string& text);

void save_action_plan_csv(const std::string& path, const ActionPlan& plan);

std::vector<Annotation> load_annotations_csv(const std::string& path);

// Clip metadata: JSON-lines, one record per line.
std::vector<ClipRecord> load_clip_records(const std::string& path);
void save_clip_records(const std::string& path, const std::vector<ClipRecord>& records,
                       const std::vector<std::string>* reasons = nullptr);

// Keyword lists: plain text, one entry per line, '#' comments.
std::vector<std::string> load_keyword_list(const std::string& path);

void save_loss_curve_csv(const std::string& path, const std::vector<double>& curve);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace vplan
