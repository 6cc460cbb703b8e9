#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "vplan/forcing.hpp"
#include "vplan/latent.hpp"
#include "vplan/rng.hpp"
#include "vplan/schedule.hpp"

namespace vplan {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ToyDenoiserConfig {
    Eigen::Index input_dim = 0;  // flattened per-latent-frame size
    Eigen::Index model_dim = 64;
    Eigen::Index noise_embed_dim = 32;
    Eigen::Index text_dim = 32;
    Eigen::Index max_frames = 16;
    LossVariant loss_variant = LossVariant::plain_flow;

    Eigen::Index param_count() const;
    void validate() const;
};

// Single-block sequence model: per-frame embedding + learned positions +
// per-token noise embedding, text FiLM, one full-sequence attention head
// with residual, linear head back to latent space.
struct ToyDenoiserParams {
    ToyDenoiserConfig cfg;

    Matrix w_in;     // input_dim x model_dim
    Matrix pos;      // max_frames x model_dim
    Matrix w_noise;  // noise_embed_dim x model_dim
    Matrix w_gamma;  // text_dim x model_dim (FiLM scale)
    Matrix w_beta;   // text_dim x model_dim (FiLM shift)
    Matrix w_q, w_k, w_v, w_o;  // model_dim x model_dim
    Matrix w_out;    // model_dim x input_dim
    Matrix null_text;  // text_dim x 1, learned embedding used when text is dropped

    static ToyDenoiserParams init(const ToyDenoiserConfig& cfg, Rng& rng, double stddev = 0.05);
    static ToyDenoiserParams zeros(const ToyDenoiserConfig& cfg);

    // Named views over every tensor, in a fixed order (checkpointing,
    // finite-difference indexing, SGD updates).
    std::vector<std::pair<std::string, Matrix*>> tensors();
    std::vector<std::pair<std::string, const Matrix*>> tensors() const;

    bool all_finite() const;
    double* flat_coeff(Eigen::Index flat_index);
};

struct DenoiserInput {
    LatentVideo z_noisy;
    NoiseGrid grid;
    Eigen::VectorXd text_cond;
    bool drop_text = false;
};

// Sinusoidal features of a scalar noise level in [0, 1].
Eigen::VectorXd noise_level_embedding(double k, Eigen::Index dim);

// Bag-of-hashed-tokens caption embedding (FNV-1a buckets, raw counts).
Eigen::VectorXd embed_text(const std::string& caption, Eigen::Index dim = 32);

LatentVideo forward(const ToyDenoiserParams& params, const DenoiserInput& input);

// Exact parameter gradients given dLoss/dOutput.
ToyDenoiserParams backward(const ToyDenoiserParams& params, const DenoiserInput& input,
                           const FrameMatrix<double>& upstream_grad);

struct TrainExample {
    LatentVideo z0;
    Eigen::VectorXd text_cond;
};

struct TrainConfig {
    double lr = 1e-3;
    int warmup_steps = 100;
    int steps = 2000;
    int batch = 4;
    std::uint64_t seed = 0;
    double text_drop_prob = 0.2;
    ScheduleConfig schedule;
    ForcingConfig forcing;
};

struct TrainResult {
    std::vector<double> loss_curve;
};

// Plain gradient descent with linear warmup over the diffusion-forcing
// objective. Deterministic given the seed. Throws on non-finite loss.
TrainResult train(ToyDenoiserParams& params, const std::vector<TrainExample>& dataset,
                  const TrainConfig& config);

}  // namespace vplan
