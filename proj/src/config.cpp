#include "vplan/config.hpp"

#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "vplan/io.hpp"

namespace vplan {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

LossVariant parse_loss_variant(const std::string& v) {
    if (v == "plain_flow") return LossVariant::plain_flow;
    if (v == "k_scaled") return LossVariant::k_scaled;
    throw std::invalid_argument("config: loss_variant must be plain_flow or k_scaled");
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config: expected boolean, got '" + v + "'");
}

}  // namespace

void GlobalConfig::validate() const {
    if (!(schedule.shift > 0)) throw std::invalid_argument("config: schedule.shift must be > 0");
    if (schedule.num_steps < 1) throw std::invalid_argument("config: schedule.num_steps must be >= 1");
    if (forcing.clean_history_prob < 0 || forcing.clean_history_prob > 1)
        throw std::invalid_argument("config: forcing.clean_history_prob outside [0,1]");
    if (forcing.max_history_latent_frames < 0 || forcing.max_history_latent_frames > 6)
        throw std::invalid_argument("config: forcing.max_history_latent_frames outside {0..6}");
    guidance.validate();
    retarget.validate();
    curation.weights.validate();
    if (patch.spatial < 1 || patch.temporal < 1)
        throw std::invalid_argument("config: patch sizes must be positive");
}

GlobalConfig parse_config(const std::string& text) {
    GlobalConfig cfg;
    using Setter = std::function<void(GlobalConfig&, const std::string&)>;
    // section -> key -> setter; doubles as the schema for unknown-key rejection.
    std::map<std::string, std::map<std::string, Setter>> schema;

    schema[""]["seed"] = [](GlobalConfig& c, const std::string& v) {
        c.seed = std::stoull(v);
        c.train.seed = c.seed;
    };

    schema["latent"]["patch_spatial"] = [](GlobalConfig& c, const std::string& v) {
        c.patch.spatial = std::stol(v);
    };
    schema["latent"]["patch_temporal"] = [](GlobalConfig& c, const std::string& v) {
        c.patch.temporal = std::stol(v);
        c.guidance.patch_temporal = std::stol(v);
    };

    schema["schedule"]["shift"] = [](GlobalConfig& c, const std::string& v) {
        c.schedule.shift = std::stod(v);
        c.train.schedule.shift = std::stod(v);
    };
    schema["schedule"]["num_steps"] = [](GlobalConfig& c, const std::string& v) {
        c.schedule.num_steps = std::stoi(v);
    };
    schema["schedule"]["loss_variant"] = [](GlobalConfig& c, const std::string& v) {
        c.schedule.loss_variant = parse_loss_variant(v);
        c.train.schedule.loss_variant = c.schedule.loss_variant;
        c.guidance.loss_variant = c.schedule.loss_variant;
    };

    schema["forcing"]["max_history_latent_frames"] = [](GlobalConfig& c, const std::string& v) {
        c.forcing.max_history_latent_frames = std::stoi(v);
        c.train.forcing.max_history_latent_frames = std::stoi(v);
    };
    schema["forcing"]["clean_history_prob"] = [](GlobalConfig& c, const std::string& v) {
        c.forcing.clean_history_prob = std::stod(v);
        c.train.forcing.clean_history_prob = std::stod(v);
    };

    schema["train"]["lr"] = [](GlobalConfig& c, const std::string& v) { c.train.lr = std::stod(v); };
    schema["train"]["warmup_steps"] = [](GlobalConfig& c, const std::string& v) {
        c.train.warmup_steps = std::stoi(v);
    };
    schema["train"]["steps"] = [](GlobalConfig& c, const std::string& v) {
        c.train.steps = std::stoi(v);
    };
    schema["train"]["batch"] = [](GlobalConfig& c, const std::string& v) {
        c.train.batch = std::stoi(v);
    };
    schema["train"]["text_drop_prob"] = [](GlobalConfig& c, const std::string& v) {
        c.train.text_drop_prob = std::stod(v);
    };
    schema["train"]["model_dim"] = [](GlobalConfig& c, const std::string& v) {
        c.model_dim = std::stol(v);
    };
    schema["train"]["noise_embed_dim"] = [](GlobalConfig& c, const std::string& v) {
        c.noise_embed_dim = std::stol(v);
    };
    schema["train"]["text_dim"] = [](GlobalConfig& c, const std::string& v) {
        c.text_dim = std::stol(v);
    };
    schema["train"]["max_frames"] = [](GlobalConfig& c, const std::string& v) {
        c.max_frames = std::stol(v);
    };

    schema["guidance"]["w_hist"] = [](GlobalConfig& c, const std::string& v) {
        c.guidance.w_hist = std::stod(v);
    };
    schema["guidance"]["w_text"] = [](GlobalConfig& c, const std::string& v) {
        c.guidance.w_text = std::stod(v);
    };
    schema["guidance"]["combine_mode"] = [](GlobalConfig& c, const std::string& v) {
        if (v == "normalized")
            c.guidance.combine_mode = CombineMode::normalized;
        else if (v == "literal_eq4")
            c.guidance.combine_mode = CombineMode::literal_eq4;
        else
            throw std::invalid_argument("config: combine_mode must be normalized or literal_eq4");
    };
    schema["guidance"]["num_steps"] = [](GlobalConfig& c, const std::string& v) {
        c.guidance.num_steps = std::stoi(v);
    };
    schema["guidance"]["shift"] = [](GlobalConfig& c, const std::string& v) {
        c.guidance.shift = std::stod(v);
    };
    schema["guidance"]["window"] = [](GlobalConfig& c, const std::string& v) {
        c.guidance.window = std::stol(v);
    };

    schema["retarget"]["rotation_map_mode"] = [](GlobalConfig& c, const std::string& v) {
        if (v == "conjugate")
            c.retarget.rotation_map_mode = RotationMapMode::conjugate;
        else if (v == "left_mult")
            c.retarget.rotation_map_mode = RotationMapMode::left_mult;
        else
            throw std::invalid_argument("config: rotation_map_mode must be conjugate or left_mult");
    };
    schema["retarget"]["sg_window"] = [](GlobalConfig& c, const std::string& v) {
        c.retarget.sg_window = std::stoi(v);
    };
    schema["retarget"]["sg_order"] = [](GlobalConfig& c, const std::string& v) {
        c.retarget.sg_order = std::stoi(v);
    };
    schema["retarget"]["alpha"] = [](GlobalConfig& c, const std::string& v) {
        c.retarget.alpha = std::stod(v);
    };
    schema["retarget"]["beta"] = [](GlobalConfig& c, const std::string& v) {
        c.retarget.beta = std::stod(v);
    };
    schema["retarget"]["grasp_close_threshold"] = [](GlobalConfig& c, const std::string& v) {
        c.retarget.grasp_close_threshold = std::stod(v);
    };
    schema["retarget"]["grasp_open_threshold"] = [](GlobalConfig& c, const std::string& v) {
        c.retarget.grasp_open_threshold = std::stod(v);
    };
    schema["retarget"]["ik_lambda"] = [](GlobalConfig& c, const std::string& v) {
        c.retarget.ik_lambda = std::stod(v);
    };
    schema["retarget"]["ik_max_iters"] = [](GlobalConfig& c, const std::string& v) {
        c.retarget.ik_max_iters = std::stoi(v);
    };
    schema["retarget"]["cam_to_robot"] = [](GlobalConfig& c, const std::string& v) {
        std::istringstream ss(v);
        Eigen::Matrix3d m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (!(ss >> m(i, j)))
                    throw std::invalid_argument("config: cam_to_robot needs 9 values");
        c.retarget.cam_to_robot = m;
    };
    schema["retarget"]["t_align"] = [](GlobalConfig& c, const std::string& v) {
        std::istringstream ss(v);
        Eigen::Vector3d t;
        if (!(ss >> t.x() >> t.y() >> t.z()))
            throw std::invalid_argument("config: t_align needs 3 values");
        c.retarget.t_align = t;
    };

    schema["curation"]["flow_fraction"] = [](GlobalConfig& c, const std::string& v) {
        c.curation.flow_fraction = std::stod(v);
    };
    schema["curation"]["flow_estimator"] = [](GlobalConfig& c, const std::string& v) {
        if (v == "block_match")
            c.curation.flow_estimator = FlowEstimator::block_match;
        else if (v == "frame_diff")
            c.curation.flow_estimator = FlowEstimator::frame_diff;
        else
            throw std::invalid_argument("config: flow_estimator must be block_match or frame_diff");
    };
    schema["curation"]["target_fps"] = [](GlobalConfig& c, const std::string& v) {
        c.curation.target_fps = std::stod(v);
    };
    schema["curation"]["target_len"] = [](GlobalConfig& c, const std::string& v) {
        c.curation.target_len = std::stod(v);
    };
    schema["curation"]["clip_len"] = [](GlobalConfig& c, const std::string& v) {
        c.curation.clip_len = std::stod(v);
    };
    schema["curation"]["min_resolution"] = [](GlobalConfig& c, const std::string& v) {
        c.curation.rules.min_resolution = std::stoi(v);
    };
    schema["curation"]["min_duration"] = [](GlobalConfig& c, const std::string& v) {
        c.curation.rules.min_duration = std::stod(v);
    };
    schema["curation"]["max_duration"] = [](GlobalConfig& c, const std::string& v) {
        c.curation.rules.max_duration = std::stod(v);
    };
    schema["curation"]["luma_min"] = [](GlobalConfig& c, const std::string& v) {
        auto r = c.curation.rules.luma_range.value_or(std::make_pair(0.0, 1.0));
        r.first = std::stod(v);
        c.curation.rules.luma_range = r;
    };
    schema["curation"]["luma_max"] = [](GlobalConfig& c, const std::string& v) {
        auto r = c.curation.rules.luma_range.value_or(std::make_pair(0.0, 1.0));
        r.second = std::stod(v);
        c.curation.rules.luma_range = r;
    };
    schema["curation"]["require_embodiment"] = [](GlobalConfig& c, const std::string& v) {
        c.curation.rules.require_embodiment = parse_bool(v);
    };
    schema["curation"]["require_success"] = [](GlobalConfig& c, const std::string& v) {
        c.curation.rules.require_success = parse_bool(v);
    };
    schema["curation"]["weight_semantics"] = [](GlobalConfig& c, const std::string& v) {
        if (v == "per_clip")
            c.curation.weight_semantics = WeightSemantics::per_clip;
        else if (v == "per_source")
            c.curation.weight_semantics = WeightSemantics::per_source;
        else
            throw std::invalid_argument("config: weight_semantics must be per_clip or per_source");
    };
    schema["curation"]["weights"] = [](GlobalConfig& c, const std::string& v) {
        std::istringstream ss(v);
        for (int i = 0; i < kNumSources; ++i)
            if (!(ss >> c.curation.weights.w[static_cast<std::size_t>(i)]))
                throw std::invalid_argument("config: weights needs 8 values");
    };

    schema["eval"] = {};  // reserved section, no keys yet

    schema["synthdata"]["grid"] = [](GlobalConfig& c, const std::string& v) {
        c.synthdata.grid = std::stoi(v);
    };
    schema["synthdata"]["object_size"] = [](GlobalConfig& c, const std::string& v) {
        c.synthdata.object_size = std::stoi(v);
    };
    schema["synthdata"]["frames"] = [](GlobalConfig& c, const std::string& v) {
        c.synthdata.frames = std::stoi(v);
    };
    schema["synthdata"]["speed"] = [](GlobalConfig& c, const std::string& v) {
        c.synthdata.speed = std::stoi(v);
    };

    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            if (schema.find(section) == schema.end())
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto sec_it = schema.find(section);
        auto key_it = sec_it->second.find(key);
        if (key_it == sec_it->second.end())
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "' in section [" + section + "]");
        key_it->second(cfg, value);
    }

    cfg.validate();
    return cfg;
}

GlobalConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string default_config_text() {
    return R"(# vplan pipeline configuration (all values shown are the defaults)
seed = 0

[latent]
patch_spatial = 8
patch_temporal = 4

[schedule]
shift = 3.0
num_steps = 16
loss_variant = plain_flow

[forcing]
max_history_latent_frames = 6
clean_history_prob = 0.5

[train]
lr = 0.001
warmup_steps = 100
steps = 2000
batch = 4
text_drop_prob = 0.2
model_dim = 64
noise_embed_dim = 32
text_dim = 32
max_frames = 16

[guidance]
w_hist = 2.0
w_text = 5.0
combine_mode = normalized
num_steps = 16
shift = 3.0
window = 13

[retarget]
rotation_map_mode = conjugate
sg_window = 9
sg_order = 3
alpha = 1.0
beta = 0.05
grasp_close_threshold = 0.03
grasp_open_threshold = 0.06
ik_lambda = 0.05
ik_max_iters = 200

[curation]
flow_fraction = 0.30
flow_estimator = block_match
target_fps = 16
target_len = 3
clip_len = 4
min_resolution = 0
min_duration = 0
max_duration = 1000000000
require_embodiment = true
require_success = true
weight_semantics = per_clip
weights = 1.0 0.75 0.05 0.375 1.5 2.0 0.5 0.5

[synthdata]
grid = 16
object_size = 4
frames = 13
speed = 1
)";
}

}  // namespace vplan
