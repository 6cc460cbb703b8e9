#include "vplan/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vplan {

using json = nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream f(path, mode);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream f(path, mode);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("truncated file while reading header");
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

}  // namespace

void save_tensor(const std::string& path, const std::vector<std::uint32_t>& dims,
                 const std::vector<float>& values) {
    std::size_t expect = 1;
    for (auto d : dims) expect *= d;
    if (expect != values.size())
        throw std::invalid_argument("save_tensor: dims do not match payload size");
    auto f = open_out(path, std::ios::binary);
    put_u32(f, static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) put_u32(f, d);
    static_assert(sizeof(float) == 4);
    f.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * 4));
}

std::pair<std::vector<std::uint32_t>, std::vector<float>> load_tensor(const std::string& path) {
    auto f = open_in(path, std::ios::binary);
    const std::uint32_t ndim = get_u32(f);
    if (ndim > 8) throw std::runtime_error("load_tensor: implausible dim count in " + path);
    std::vector<std::uint32_t> dims(ndim);
    std::size_t total = 1;
    for (auto& d : dims) {
        d = get_u32(f);
        total *= d;
    }
    std::vector<float> values(total);
    f.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(total * 4));
    if (!f) throw std::runtime_error("load_tensor: truncated payload in " + path);
    return {std::move(dims), std::move(values)};
}

void save_video(const std::string& path, const PixelVideo& video) {
    std::vector<std::uint32_t> dims = {
        static_cast<std::uint32_t>(video.frames()), static_cast<std::uint32_t>(video.channels),
        static_cast<std::uint32_t>(video.height), static_cast<std::uint32_t>(video.width)};
    std::vector<float> values(static_cast<std::size_t>(video.data.size()));
    for (Eigen::Index f = 0, i = 0; f < video.frames(); ++f)
        for (Eigen::Index c = 0; c < video.per_frame(); ++c)
            values[static_cast<std::size_t>(i++)] = static_cast<float>(video.data(f, c));
    save_tensor(path, dims, values);
}

PixelVideo load_video(const std::string& path) {
    auto [dims, values] = load_tensor(path);
    if (dims.size() != 4) throw std::runtime_error("load_video: expected 4 dims in " + path);
    PixelVideo video;
    video.channels = dims[1];
    video.height = dims[2];
    video.width = dims[3];
    video.data.resize(dims[0], video.per_frame());
    for (Eigen::Index f = 0, i = 0; f < video.frames(); ++f)
        for (Eigen::Index c = 0; c < video.per_frame(); ++c)
            video.data(f, c) = values[static_cast<std::size_t>(i++)];
    return video;
}

// --- Checkpoints -------------------------------------------------------------

namespace {
constexpr char kCheckpointMagic[4] = {'V', 'P', 'C', 'K'};
}

void save_checkpoint(const std::string& path, const ToyDenoiserParams& params) {
    auto f = open_out(path, std::ios::binary);
    f.write(kCheckpointMagic, 4);
    put_u32(f, 1);  // version

    json cfg = {{"input_dim", params.cfg.input_dim},
                {"model_dim", params.cfg.model_dim},
                {"noise_embed_dim", params.cfg.noise_embed_dim},
                {"text_dim", params.cfg.text_dim},
                {"max_frames", params.cfg.max_frames},
                {"loss_variant",
                 params.cfg.loss_variant == LossVariant::plain_flow ? "plain_flow" : "k_scaled"}};
    const std::string header = cfg.dump();
    put_u32(f, static_cast<std::uint32_t>(header.size()));
    f.write(header.data(), static_cast<std::streamsize>(header.size()));

    const auto tensors = params.tensors();
    put_u32(f, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, m] : tensors) {
        put_u32(f, static_cast<std::uint32_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(f, static_cast<std::uint32_t>(m->rows()));
        put_u32(f, static_cast<std::uint32_t>(m->cols()));
        f.write(reinterpret_cast<const char*>(m->data()),
                static_cast<std::streamsize>(m->size() * 8));
    }
}

ToyDenoiserParams load_checkpoint(const std::string& path) {
    auto f = open_in(path, std::ios::binary);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::string(magic, 4) != std::string(kCheckpointMagic, 4))
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    const std::uint32_t version = get_u32(f);
    if (version != 1) throw std::runtime_error("load_checkpoint: unsupported version");

    const std::uint32_t header_len = get_u32(f);
    std::string header(header_len, '\0');
    f.read(header.data(), header_len);
    const json cfg_json = json::parse(header);

    ToyDenoiserConfig cfg;
    cfg.input_dim = cfg_json.at("input_dim").get<Eigen::Index>();
    cfg.model_dim = cfg_json.at("model_dim").get<Eigen::Index>();
    cfg.noise_embed_dim = cfg_json.at("noise_embed_dim").get<Eigen::Index>();
    cfg.text_dim = cfg_json.at("text_dim").get<Eigen::Index>();
    cfg.max_frames = cfg_json.at("max_frames").get<Eigen::Index>();
    cfg.loss_variant = cfg_json.at("loss_variant").get<std::string>() == "k_scaled"
                           ? LossVariant::k_scaled
                           : LossVariant::plain_flow;

    ToyDenoiserParams params = ToyDenoiserParams::zeros(cfg);
    auto tensors = params.tensors();
    const std::uint32_t count = get_u32(f);
    if (count != tensors.size()) throw std::runtime_error("load_checkpoint: tensor count mismatch");
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t name_len = get_u32(f);
        std::string name(name_len, '\0');
        f.read(name.data(), name_len);
        const std::uint32_t rows = get_u32(f), cols = get_u32(f);
        Matrix* target = nullptr;
        for (auto& [tname, m] : tensors)
            if (tname == name) target = m;
        if (!target) throw std::runtime_error("load_checkpoint: unknown tensor '" + name + "'");
        if (target->rows() != static_cast<Eigen::Index>(rows) ||
            target->cols() != static_cast<Eigen::Index>(cols))
            throw std::runtime_error("load_checkpoint: shape mismatch for '" + name + "'");
        f.read(reinterpret_cast<char*>(target->data()),
               static_cast<std::streamsize>(target->size() * 8));
    }
    if (!f) throw std::runtime_error("load_checkpoint: truncated file " + path);
    return params;
}

// --- Pose traces ---------------------------------------------------------------

void save_pose_trace(const std::string& path, const PoseTrace& trace) {
    auto f = open_out(path);
    json extr = json::array();
    for (const auto& e : trace.camera.extrinsics) {
        json r = json::array();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.push_back(e.rotation()(i, j));
        extr.push_back({{"r", r}, {"t", {e.translation().x(), e.translation().y(),
                                         e.translation().z()}}});
    }
    json header = {{"camera",
                    {{"fx", trace.camera.fx},
                     {"fy", trace.camera.fy},
                     {"cx", trace.camera.cx},
                     {"cy", trace.camera.cy},
                     {"extrinsics", extr}}}};
    f << header.dump() << "\n";

    for (const auto& fr : trace.frames) {
        json j = {{"frame_idx", fr.frame_idx},
                  {"t_sec", fr.t_sec},
                  {"wrist_uv", {fr.wrist_uv.x(), fr.wrist_uv.y()}},
                  {"quat_cam", {fr.quat_cam.w(), fr.quat_cam.x(), fr.quat_cam.y(), fr.quat_cam.z()}},
                  {"valid", fr.valid}};
        j["depth"] = fr.depth ? json(*fr.depth) : json(nullptr);
        if (fr.keypoints_cam.cols() > 0) {
            json kps = json::array();
            for (Eigen::Index c = 0; c < fr.keypoints_cam.cols(); ++c)
                kps.push_back({fr.keypoints_cam(0, c), fr.keypoints_cam(1, c),
                               fr.keypoints_cam(2, c)});
            j["keypoints_cam"] = kps;
        }
        f << j.dump() << "\n";
    }
}

PoseTrace load_pose_trace(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("load_pose_trace: empty file " + path);

    PoseTrace trace;
    const json header = json::parse(line);
    const json& cam = header.at("camera");
    trace.camera.fx = cam.at("fx").get<double>();
    trace.camera.fy = cam.at("fy").get<double>();
    trace.camera.cx = cam.at("cx").get<double>();
    trace.camera.cy = cam.at("cy").get<double>();
    for (const auto& e : cam.at("extrinsics")) {
        Eigen::Matrix3d r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                r(i, j) = e.at("r")[static_cast<std::size_t>(3 * i + j)].get<double>();
        Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
        iso.linear() = r;
        iso.translation() = Eigen::Vector3d(e.at("t")[0].get<double>(), e.at("t")[1].get<double>(),
                                            e.at("t")[2].get<double>());
        trace.camera.extrinsics.push_back(iso);
    }

    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        PoseTraceFrame fr;
        fr.frame_idx = j.at("frame_idx").get<int>();
        fr.t_sec = j.at("t_sec").get<double>();
        fr.wrist_uv = Eigen::Vector2d(j.at("wrist_uv")[0].get<double>(),
                                      j.at("wrist_uv")[1].get<double>());
        if (!j.at("depth").is_null()) fr.depth = j.at("depth").get<double>();
        const auto& q = j.at("quat_cam");
        fr.quat_cam = Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(),
                                         q[2].get<double>(), q[3].get<double>());
        fr.valid = j.at("valid").get<bool>();
        if (j.contains("keypoints_cam")) {
            const auto& kps = j.at("keypoints_cam");
            fr.keypoints_cam.resize(3, static_cast<Eigen::Index>(kps.size()));
            for (std::size_t c = 0; c < kps.size(); ++c)
                fr.keypoints_cam.col(static_cast<Eigen::Index>(c)) =
                    Eigen::Vector3d(kps[c][0].get<double>(), kps[c][1].get<double>(),
                                    kps[c][2].get<double>());
        }
        trace.frames.push_back(std::move(fr));
    }
    return trace;
}

// --- Robot model ------------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

Eigen::Vector3d parse_vec3(const std::string& s, const std::string& ctx) {
    const auto parts = split(s, ',');
    if (parts.size() != 3) throw std::runtime_error("robot model: expected 3 values in " + ctx);
    return {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
}

int parse_human_tip(const std::string& s) {
    if (s == "thumb") return kManoThumbTip;
    if (s == "index") return kManoIndexTip;
    if (s == "middle") return kManoMiddleTip;
    if (s == "ring") return kManoRingTip;
    if (s == "pinky") return kManoPinkyTip;
    return std::stoi(s);
}

}  // namespace

RobotModel parse_robot_model(const std::string& text) {
    RobotModel robot;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;

        std::string token;
        std::vector<std::pair<std::string, std::string>> kv;
        while (ls >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("robot model line " + std::to_string(line_no) +
                                         ": expected key=value, got '" + token + "'");
            kv.emplace_back(token.substr(0, eq), token.substr(eq + 1));
        }
        auto get = [&](const std::string& key, const char* fallback = nullptr) -> std::string {
            for (const auto& [k, v] : kv)
                if (k == key) return v;
            if (fallback) return fallback;
            throw std::runtime_error("robot model line " + std::to_string(line_no) +
                                     ": missing key '" + key + "'");
        };

        if (kind == "arm_joint" || kind == "hand_joint") {
            JointSpec j;
            j.name = get("name");
            j.axis = parse_vec3(get("axis"), "axis").normalized();
            j.origin = parse_vec3(get("origin", "0,0,0"), "origin");
            const auto lim = split(get("limits"), ',');
            if (lim.size() != 2)
                throw std::runtime_error("robot model line " + std::to_string(line_no) +
                                         ": limits need two values");
            j.lower = std::stod(lim[0]);
            j.upper = std::stod(lim[1]);
            (kind == "arm_joint" ? robot.arm : robot.hand.joints).push_back(std::move(j));
        } else if (kind == "tool") {
            const Eigen::Vector3d origin = parse_vec3(get("origin", "0,0,0"), "tool origin");
            const Eigen::Vector3d rpy = parse_vec3(get("rpy", "0,0,0"), "tool rpy");
            robot.tool = Eigen::Isometry3d::Identity();
            robot.tool.linear() = (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                                   Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                                   Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
                                      .toRotationMatrix();
            robot.tool.translation() = origin;
        } else if (kind == "finger") {
            FingerSpec fs;
            fs.name = get("name");
            fs.human_tip_index = parse_human_tip(get("human_tip"));
            fs.root_offset = parse_vec3(get("root", "0,0,0"), "finger root");
            fs.tip_offset = parse_vec3(get("tip", "0,0,0"), "finger tip");
            for (const auto& jn : split(get("joints"), ',')) {
                int idx = -1;
                for (std::size_t i = 0; i < robot.hand.joints.size(); ++i)
                    if (robot.hand.joints[i].name == jn) idx = static_cast<int>(i);
                if (idx < 0)
                    throw std::runtime_error("robot model line " + std::to_string(line_no) +
                                             ": finger references unknown joint '" + jn + "'");
                fs.joint_indices.push_back(idx);
            }
            robot.hand.fingers.push_back(std::move(fs));
        } else {
            throw std::runtime_error("robot model line " + std::to_string(line_no) +
                                     ": unknown declaration '" + kind + "'");
        }
    }
    robot.validate();
    return robot;
}

RobotModel load_robot_model(const std::string& path) {
    return parse_robot_model(read_text_file(path));
}

// --- CSV -------------------------------------------------------------------------

void save_action_plan_csv(const std::string& path, const ActionPlan& plan) {
    auto f = open_out(path);
    f << "t_sec";
    for (Eigen::Index j = 0; j < plan.arm_q.cols(); ++j) f << ",arm_q" << j;
    f << ",ik_converged";
    if (plan.uses_gripper) {
        f << ",gripper_width_m,gripper_event";
    } else {
        for (Eigen::Index j = 0; j < plan.hand_q.cols(); ++j) f << ",hand_q" << j;
    }
    f << "\n";
    f.precision(12);

    for (Eigen::Index i = 0; i < plan.t_sec.size(); ++i) {
        f << plan.t_sec[i];
        for (Eigen::Index j = 0; j < plan.arm_q.cols(); ++j) f << "," << plan.arm_q(i, j);
        f << "," << (plan.ik_converged[static_cast<std::size_t>(i)] ? 1 : 0);
        if (plan.uses_gripper) {
            const double width = plan.gripper.width.size() > i ? plan.gripper.width[i] : 0.0;
            std::string event;
            for (const auto& e : plan.gripper.events)
                if (e.frame_idx == static_cast<int>(i))
                    event = e.kind == GripperEvent::Kind::close ? "close" : "open";
            f << "," << width << "," << event;
        } else {
            for (Eigen::Index j = 0; j < plan.hand_q.cols(); ++j)
                f << "," << (plan.hand_q.rows() > i ? plan.hand_q(i, j) : 0.0);
        }
        f << "\n";
    }
}

std::vector<Annotation> load_annotations_csv(const std::string& path) {
    auto f = open_in(path);
    std::vector<Annotation> out;
    std::string line;
    bool first = true;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (first && line.find("prompt_id") != std::string::npos) {
            first = false;
            continue;
        }
        first = false;
        const auto cols = split(line, ',');
        if (cols.size() != 6)
            throw std::runtime_error("annotations line " + std::to_string(line_no) +
                                     ": expected 6 columns");
        Annotation a;
        a.prompt_id = cols[0];
        a.gen_idx = std::stoi(cols[1]);
        for (int l = 0; l < 4; ++l)
            a.levels[static_cast<std::size_t>(l)] = std::stoi(cols[static_cast<std::size_t>(2 + l)]) != 0;
        out.push_back(std::move(a));
    }
    return out;
}

// --- Clip records -----------------------------------------------------------------

std::vector<ClipRecord> load_clip_records(const std::string& path) {
    auto f = open_in(path);
    std::vector<ClipRecord> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        ClipRecord r;
        r.clip_id = j.at("clip_id").get<std::string>();
        r.source = source_from_name(j.at("source").get<std::string>());
        r.fps = j.value("fps", 16.0);
        r.duration = j.at("duration").get<double>();
        r.resolution = j.value("resolution", 0);
        if (j.contains("captions"))
            for (const auto& c : j.at("captions")) r.captions.push_back(c.get<std::string>());
        if (j.contains("flow_stat") && !j.at("flow_stat").is_null())
            r.flow_stat = j.at("flow_stat").get<double>();
        if (j.contains("embodiment_visible") && !j.at("embodiment_visible").is_null())
            r.embodiment_visible = j.at("embodiment_visible").get<bool>();
        if (j.contains("success") && !j.at("success").is_null())
            r.success = j.at("success").get<bool>();
        r.speed_factor = j.value("speed_factor", 1.0);
        if (j.contains("mean_luma") && !j.at("mean_luma").is_null())
            r.mean_luma = j.at("mean_luma").get<double>();
        if (j.contains("video_path") && !j.at("video_path").is_null())
            r.video_path = j.at("video_path").get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

void save_clip_records(const std::string& path, const std::vector<ClipRecord>& records,
                       const std::vector<std::string>* reasons) {
    if (reasons && reasons->size() != records.size())
        throw std::invalid_argument("save_clip_records: reason count mismatch");
    auto f = open_out(path);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        json j = {{"clip_id", r.clip_id},
                  {"source", source_name(r.source)},
                  {"fps", r.fps},
                  {"duration", r.duration},
                  {"resolution", r.resolution},
                  {"captions", r.captions},
                  {"speed_factor", r.speed_factor}};
        if (r.flow_stat) j["flow_stat"] = *r.flow_stat;
        if (r.embodiment_visible) j["embodiment_visible"] = *r.embodiment_visible;
        if (r.success) j["success"] = *r.success;
        if (r.mean_luma) j["mean_luma"] = *r.mean_luma;
        if (r.video_path) j["video_path"] = *r.video_path;
        if (reasons) j["reason"] = (*reasons)[i];
        f << j.dump() << "\n";
    }
}

std::vector<std::string> load_keyword_list(const std::string& path) {
    auto f = open_in(path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(f, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.pop_back();
        std::size_t start = 0;
        while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
        line = line.substr(start);
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

void save_loss_curve_csv(const std::string& path, const std::vector<double>& curve) {
    auto f = open_out(path);
    f << "step,loss\n";
    f.precision(12);
    for (std::size_t i = 0; i < curve.size(); ++i) f << i << "," << curve[i] << "\n";
}

std::string read_text_file(const std::string& path) {
    auto f = open_in(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    auto f = open_out(path, std::ios::binary);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace vplan
