#include "vplan/denoiser.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace vplan {

Eigen::Index ToyDenoiserConfig::param_count() const {
    const Eigen::Index d = model_dim;
    return input_dim * d          // w_in
           + max_frames * d       // pos
           + noise_embed_dim * d  // w_noise
           + 2 * text_dim * d     // w_gamma, w_beta
           + 4 * d * d            // attention
           + d * input_dim        // w_out
           + text_dim;            // null_text
}

void ToyDenoiserConfig::validate() const {
    if (input_dim < 1 || model_dim < 1 || noise_embed_dim < 2 || text_dim < 1 || max_frames < 1)
        throw std::invalid_argument("ToyDenoiserConfig: dimensions must be positive");
    if (noise_embed_dim % 2 != 0)
        throw std::invalid_argument("ToyDenoiserConfig: noise_embed_dim must be even");
    if (param_count() > 100000)
        throw std::invalid_argument("ToyDenoiserConfig: parameter count exceeds 1e5 budget");
}

ToyDenoiserParams ToyDenoiserParams::zeros(const ToyDenoiserConfig& cfg) {
    cfg.validate();
    ToyDenoiserParams p;
    p.cfg = cfg;
    const Eigen::Index d = cfg.model_dim;
    p.w_in = Matrix::Zero(cfg.input_dim, d);
    p.pos = Matrix::Zero(cfg.max_frames, d);
    p.w_noise = Matrix::Zero(cfg.noise_embed_dim, d);
    p.w_gamma = Matrix::Zero(cfg.text_dim, d);
    p.w_beta = Matrix::Zero(cfg.text_dim, d);
    p.w_q = Matrix::Zero(d, d);
    p.w_k = Matrix::Zero(d, d);
    p.w_v = Matrix::Zero(d, d);
    p.w_o = Matrix::Zero(d, d);
    p.w_out = Matrix::Zero(d, cfg.input_dim);
    p.null_text = Matrix::Zero(cfg.text_dim, 1);
    return p;
}

ToyDenoiserParams ToyDenoiserParams::init(const ToyDenoiserConfig& cfg, Rng& rng, double stddev) {
    ToyDenoiserParams p = zeros(cfg);
    for (auto& [name, m] : p.tensors()) *m = rng.gaussian_matrix<double>(m->rows(), m->cols(), stddev);
    return p;
}

std::vector<std::pair<std::string, Matrix*>> ToyDenoiserParams::tensors() {
    return {{"w_in", &w_in},     {"pos", &pos},     {"w_noise", &w_noise}, {"w_gamma", &w_gamma},
            {"w_beta", &w_beta}, {"w_q", &w_q},     {"w_k", &w_k},         {"w_v", &w_v},
            {"w_o", &w_o},       {"w_out", &w_out}, {"null_text", &null_text}};
}

std::vector<std::pair<std::string, const Matrix*>> ToyDenoiserParams::tensors() const {
    auto list = const_cast<ToyDenoiserParams*>(this)->tensors();
    std::vector<std::pair<std::string, const Matrix*>> out;
    out.reserve(list.size());
    for (auto& [name, m] : list) out.emplace_back(name, m);
    return out;
}

bool ToyDenoiserParams::all_finite() const {
    for (auto& [name, m] : tensors())
        if (!m->allFinite()) return false;
    return true;
}

double* ToyDenoiserParams::flat_coeff(Eigen::Index flat_index) {
    for (auto& [name, m] : tensors()) {
        if (flat_index < m->size()) return m->data() + flat_index;
        flat_index -= m->size();
    }
    throw std::out_of_range("ToyDenoiserParams::flat_coeff: index past parameter count");
}

Eigen::VectorXd noise_level_embedding(double k, Eigen::Index dim) {
    Eigen::VectorXd e(dim);
    const Eigen::Index half = dim / 2;
    for (Eigen::Index i = 0; i < half; ++i) {
        const double omega =
            half > 1 ? std::pow(1000.0, static_cast<double>(i) / static_cast<double>(half - 1))
                     : 1.0;
        e[2 * i] = std::sin(omega * k);
        e[2 * i + 1] = std::cos(omega * k);
    }
    return e;
}

Eigen::VectorXd embed_text(const std::string& caption, Eigen::Index dim) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
        for (char c : token) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        v[static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim))] += 1.0;
        token.clear();
    };
    for (char c : caption) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else
            flush();
    }
    flush();
    return v;
}

namespace {

struct ForwardCache {
    Eigen::VectorXd cond;         // text vector actually used
    FrameMatrix<double> phi;      // F x E
    FrameMatrix<double> h;        // pre-FiLM tokens
    Eigen::RowVectorXd gamma, beta;
    FrameMatrix<double> g;        // post-FiLM tokens
    FrameMatrix<double> q, k, v;  // attention projections
    FrameMatrix<double> attn;     // softmax weights, F x F
    FrameMatrix<double> av;       // attn * v
    FrameMatrix<double> u;        // residual sum
    FrameMatrix<double> y;        // output
};

void check_input(const ToyDenoiserParams& params, const DenoiserInput& input) {
    const auto& cfg = params.cfg;
    if (input.z_noisy.per_frame() != cfg.input_dim)
        throw std::invalid_argument("denoiser: latent per-frame size != config input_dim");
    if (input.z_noisy.frames() > cfg.max_frames)
        throw std::invalid_argument("denoiser: more frames than learned positions");
    if (input.grid.size() != input.z_noisy.frames())
        throw std::invalid_argument("denoiser: grid length != latent frames");
    if (input.text_cond.size() != cfg.text_dim)
        throw std::invalid_argument("denoiser: text_cond dim != config text_dim");
    if (!input.text_cond.allFinite())
        throw std::invalid_argument("denoiser: non-finite text_cond");
    if (!params.all_finite()) throw std::invalid_argument("denoiser: non-finite parameters");
}

ForwardCache run_forward(const ToyDenoiserParams& params, const DenoiserInput& input) {
    check_input(params, input);
    const auto& cfg = params.cfg;
    const Eigen::Index f = input.z_noisy.frames();
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.model_dim));

    ForwardCache c;
    c.cond = input.drop_text ? Eigen::VectorXd(params.null_text.col(0)) : input.text_cond;

    c.phi.resize(f, cfg.noise_embed_dim);
    for (Eigen::Index i = 0; i < f; ++i)
        c.phi.row(i) = noise_level_embedding(input.grid[i], cfg.noise_embed_dim).transpose();

    c.h = input.z_noisy.data * params.w_in + params.pos.topRows(f) + c.phi * params.w_noise;

    c.gamma = c.cond.transpose() * params.w_gamma;
    c.beta = c.cond.transpose() * params.w_beta;
    const Eigen::RowVectorXd film_scale = (1.0 + c.gamma.array()).matrix();
    c.g = (c.h.array().rowwise() * film_scale.array()).matrix();
    c.g.rowwise() += c.beta;

    c.q = c.g * params.w_q;
    c.k = c.g * params.w_k;
    c.v = c.g * params.w_v;

    FrameMatrix<double> scores = scale * (c.q * c.k.transpose());
    c.attn.resize(f, f);
    for (Eigen::Index i = 0; i < f; ++i) {
        const double m = scores.row(i).maxCoeff();
        c.attn.row(i) = (scores.row(i).array() - m).exp().matrix();
        c.attn.row(i) /= c.attn.row(i).sum();
    }
    c.av = c.attn * c.v;
    c.u = c.g + c.av * params.w_o;
    c.y = c.u * params.w_out;
    return c;
}

}  // namespace

LatentVideo forward(const ToyDenoiserParams& params, const DenoiserInput& input) {
    ForwardCache c = run_forward(params, input);
    LatentVideo out = input.z_noisy;
    out.data = std::move(c.y);
    return out;
}

ToyDenoiserParams backward(const ToyDenoiserParams& params, const DenoiserInput& input,
                           const FrameMatrix<double>& upstream_grad) {
    const ForwardCache c = run_forward(params, input);
    const auto& cfg = params.cfg;
    const Eigen::Index f = input.z_noisy.frames();
    if (upstream_grad.rows() != f || upstream_grad.cols() != cfg.input_dim)
        throw std::invalid_argument("backward: upstream gradient shape mismatch");
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.model_dim));

    ToyDenoiserParams grads = ToyDenoiserParams::zeros(cfg);

    grads.w_out = c.u.transpose() * upstream_grad;
    FrameMatrix<double> du = upstream_grad * params.w_out.transpose();

    FrameMatrix<double> dg = du;  // residual branch
    const FrameMatrix<double> dattn_out = du;
    grads.w_o = c.av.transpose() * dattn_out;
    FrameMatrix<double> dav = dattn_out * params.w_o.transpose();

    FrameMatrix<double> dattn = dav * c.v.transpose();
    FrameMatrix<double> dv = c.attn.transpose() * dav;

    FrameMatrix<double> dscores(f, f);
    for (Eigen::Index i = 0; i < f; ++i) {
        const double dot = dattn.row(i).dot(c.attn.row(i));
        dscores.row(i) = ((dattn.row(i).array() - dot) * c.attn.row(i).array()).matrix();
    }
    FrameMatrix<double> dq = scale * (dscores * c.k);
    FrameMatrix<double> dk = scale * (dscores.transpose() * c.q);

    grads.w_q = c.g.transpose() * dq;
    grads.w_k = c.g.transpose() * dk;
    grads.w_v = c.g.transpose() * dv;
    dg += dq * params.w_q.transpose() + dk * params.w_k.transpose() + dv * params.w_v.transpose();

    // FiLM: g = h .* (1 + gamma) + beta (rows broadcast).
    const Eigen::RowVectorXd film_scale = (1.0 + c.gamma.array()).matrix();
    FrameMatrix<double> dh = (dg.array().rowwise() * film_scale.array()).matrix();
    Eigen::RowVectorXd dgamma = (dg.array() * c.h.array()).colwise().sum();
    Eigen::RowVectorXd dbeta = dg.colwise().sum();
    grads.w_gamma = c.cond * dgamma;
    grads.w_beta = c.cond * dbeta;
    if (input.drop_text)
        grads.null_text = params.w_gamma * dgamma.transpose() + params.w_beta * dbeta.transpose();

    grads.w_in = input.z_noisy.data.transpose() * dh;
    grads.pos.topRows(f) = dh;
    grads.w_noise = c.phi.transpose() * dh;
    return grads;
}

TrainResult train(ToyDenoiserParams& params, const std::vector<TrainExample>& dataset,
                  const TrainConfig& config) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    for (const auto& ex : dataset)
        if (ex.z0.per_frame() != params.cfg.input_dim)
            throw std::invalid_argument("train: dataset latent size != model input_dim");

    Rng rng(config.seed);
    TrainResult result;
    result.loss_curve.reserve(config.steps);

    for (int step = 0; step < config.steps; ++step) {
        ToyDenoiserParams grads = ToyDenoiserParams::zeros(params.cfg);
        double batch_loss = 0.0;
        for (int b = 0; b < config.batch; ++b) {
            const TrainExample& ex = dataset[rng.uniform_int(0, static_cast<int>(dataset.size()) - 1)];
            const ForcingPlan plan =
                sample_forcing_plan(rng, ex.z0.frames(), config.schedule, config.forcing);
            LatentVideo eps = ex.z0;
            eps.data = rng.gaussian_matrix<double>(ex.z0.data.rows(), ex.z0.data.cols());
            auto [z_noisy, grid] = noised_batch(ex.z0, eps, plan);

            DenoiserInput input{std::move(z_noisy), std::move(grid), ex.text_cond,
                                rng.bernoulli(config.text_drop_prob)};
            const LatentVideo pred = forward(params, input);
            const LatentVideo target =
                flow_target(ex.z0, eps, input.grid, params.cfg.loss_variant);

            const double numel = static_cast<double>(pred.data.size());
            batch_loss += (pred.data - target.data).squaredNorm() / numel / config.batch;

            const FrameMatrix<double> dy =
                2.0 / (numel * config.batch) * (pred.data - target.data);
            ToyDenoiserParams g = backward(params, input, dy);
            auto gs = grads.tensors();
            auto s = g.tensors();
            for (std::size_t i = 0; i < gs.size(); ++i) *gs[i].second += *s[i].second;
        }
        if (!std::isfinite(batch_loss))
            throw std::runtime_error("train: loss diverged (non-finite) at step " +
                                     std::to_string(step));

        const double warm =
            config.warmup_steps > 0
                ? std::min(1.0, static_cast<double>(step + 1) / config.warmup_steps)
                : 1.0;
        const double lr = config.lr * warm;
        auto ps = params.tensors();
        auto gs = grads.tensors();
        for (std::size_t i = 0; i < ps.size(); ++i) *ps[i].second -= lr * *gs[i].second;

        result.loss_curve.push_back(batch_loss);
    }
    return result;
}

}  // namespace vplan
