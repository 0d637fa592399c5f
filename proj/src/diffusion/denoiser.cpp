#include "mvr/diffusion/denoiser.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "mvr/common/errors.hpp"

namespace mvr::diffusion {

DenoiserConfig DenoiserConfig::full_scale()
{
    DenoiserConfig c;
    c.d_model = 512;
    c.heads = 8;
    return c;
}

void DenoiserConfig::validate() const
{
    if (features < 1 || cond_dim < 1 || levels < 0) {
        throw std::invalid_argument("denoiser: features and cond_dim must be >= 1, levels >= 0");
    }
    if (d_model < 2 || d_model % 2 != 0) {
        throw std::invalid_argument("denoiser: d_model must be even and >= 2");
    }
    if (heads < 1 || d_model % heads != 0) {
        throw std::invalid_argument("denoiser: d_model must be divisible by heads");
    }
}

Denoiser::Denoiser(const DenoiserConfig& config, std::uint64_t seed) : config_(config)
{
    config_.validate();
    Rng rng(seed);
    const Eigen::Index d = config_.d_model;
    input_ = Linear::create(params_, "input", config_.features, d, rng);
    time_embed_ = EmbeddingMlp::create(params_, "time_embed", d, d, rng);
    cond_embed_ = EmbeddingMlp::create(params_, "cond_embed", config_.cond_dim, d, rng);
    for (int i = 0; i < config_.levels; ++i) {
        encoder_.push_back(ResBlock::create(params_, fmt::format("encoder{}", i), d, rng));
    }
    middle_ = ResBlock::create(params_, "middle", d, rng);
    attention_ = MultiHeadAttention::create(params_, "attention", d, config_.heads, rng);
    for (int i = 0; i < config_.levels; ++i) {
        gates_.push_back(AttentionGate::create(params_, fmt::format("gate{}", i), d, std::max<Eigen::Index>(1, d / 2), rng));
        fuse_.push_back(Conv1d::create(params_, fmt::format("fuse{}", i), 2 * d, d, rng));
        decoder_.push_back(ResBlock::create(params_, fmt::format("decoder{}", i), d, rng));
    }
    output_ = Linear::create(params_, "output", d, config_.features, rng);
}

void Denoiser::check_shapes(const Matrix& x_t, const Vector& condition) const
{
    if (x_t.cols() != config_.features) {
        throw std::invalid_argument(fmt::format("denoiser: expected {} feature columns, got {}",
                                                config_.features, x_t.cols()));
    }
    const Eigen::Index factor = Eigen::Index{1} << config_.levels;
    if (x_t.rows() < 1 || x_t.rows() % factor != 0) {
        throw std::invalid_argument(fmt::format("denoiser: sequence length {} is not a multiple of {}",
                                                x_t.rows(), factor));
    }
    if (condition.size() != config_.cond_dim) {
        throw std::invalid_argument(fmt::format("denoiser: expected condition of size {}, got {}",
                                                config_.cond_dim, condition.size()));
    }
}

Matrix Denoiser::forward(const Matrix& x_t, int step, const Vector& condition, Trace& trace) const
{
    check_shapes(x_t, condition);
    const auto levels = static_cast<std::size_t>(config_.levels);
    trace.input = x_t;
    trace.encoder.resize(levels);
    trace.gates.resize(levels);
    trace.fuse_inputs.resize(levels);
    trace.decoder.resize(levels);

    const Matrix t_emb = time_embed_.forward(params_, timestep_embedding(step, config_.d_model), trace.time);
    const Matrix c_emb = cond_embed_.forward(params_, condition.transpose(), trace.cond);
    Matrix h = input_.forward(params_, x_t);
    h.rowwise() += (t_emb + c_emb).row(0);

    std::vector<Matrix> skips(levels);
    for (std::size_t i = 0; i < levels; ++i) {
        skips[i] = encoder_[i].forward(params_, h, trace.encoder[i]);
        h = avg_pool2(skips[i]);
    }
    h = middle_.forward(params_, h, trace.middle);
    h += attention_.forward(params_, h, trace.attention);

    for (std::size_t j = levels; j-- > 0;) {
        const Matrix g = upsample2(h);
        const Matrix gated = gates_[j].forward(params_, skips[j], g, trace.gates[j]);
        Matrix joined(g.rows(), 2 * g.cols());
        joined << g, gated;
        trace.fuse_inputs[j] = std::move(joined);
        h = decoder_[j].forward(params_, fuse_[j].forward(params_, trace.fuse_inputs[j]), trace.decoder[j]);
    }
    trace.last_hidden = h;
    return output_.forward(params_, h);
}

void Denoiser::backward(const Trace& trace, const Matrix& d_output)
{
    const auto levels = static_cast<std::size_t>(config_.levels);
    const Eigen::Index d = config_.d_model;
    Matrix dh = output_.backward(params_, trace.last_hidden, d_output);

    std::vector<Matrix> d_skips(levels);
    for (std::size_t j = 0; j < levels; ++j) {
        const Matrix d_fused = decoder_[j].backward(params_, trace.decoder[j], dh);
        const Matrix d_joined = fuse_[j].backward(params_, trace.fuse_inputs[j], d_fused);
        auto [d_skip, d_gate] = gates_[j].backward(params_, trace.gates[j], d_joined.rightCols(d));
        d_skips[j] = std::move(d_skip);
        dh = upsample2_backward(d_joined.leftCols(d) + d_gate);
    }

    dh += attention_.backward(params_, trace.attention, dh);
    dh = middle_.backward(params_, trace.middle, dh);

    for (std::size_t i = levels; i-- > 0;) {
        dh = encoder_[i].backward(params_, trace.encoder[i], avg_pool2_backward(dh) + d_skips[i]);
    }

    const Matrix d_emb = dh.colwise().sum();
    time_embed_.backward(params_, trace.time, d_emb);
    cond_embed_.backward(params_, trace.cond, d_emb);
    input_.backward(params_, trace.input, dh);
}

Matrix Denoiser::predict(const Matrix& x_t, int step, const Vector& condition) const
{
    Trace trace;
    Matrix out = forward(x_t, step, condition, trace);
    if (!out.allFinite()) {
        throw NumericalError(fmt::format("denoiser produced non-finite output at step {}", step));
    }
    return out;
}

}  // namespace mvr::diffusion
