#pragma once

// Noise-prediction network: a 1-D encoder-decoder over the preference
// sequence with attention-gated skip connections, self-attention at the
// bottleneck, and the diffusion step plus resource constraint injected as
// embeddings added at every position.
//
//   h = x Win + b + emb_t(t) + emb_s(S)
//   encoder level i:  skip_i = Res(h);  h = pool(skip_i)
//   bottleneck:       h = Res(h);  h = h + MHA(h)
//   decoder level i:  g = up(h);  h = Res(Conv([g | Gate(skip_i, g)]))
//   out = h Wout + b

#include <cstdint>
#include <vector>

#include "mvr/diffusion/nn.hpp"

namespace mvr::diffusion {

struct DenoiserConfig {
    int features = 6;   ///< F
    int cond_dim = 4;   ///< resource constraint width
    int d_model = 64;
    int heads = 4;
    int levels = 2;     ///< down/up-sampling stages; L must be divisible by 2^levels

    /// Full-scale width and head count (512 wide, 8 heads).
    static DenoiserConfig full_scale();
    void validate() const;
};

class Denoiser {
public:
    struct Trace;

    Denoiser(const DenoiserConfig& config, std::uint64_t seed);

    const DenoiserConfig& config() const { return config_; }
    ParameterSet& params() { return params_; }
    const ParameterSet& params() const { return params_; }

    /// Predicted noise, same shape as x_t. Throws NumericalError on non-finite output.
    Matrix predict(const Matrix& x_t, int step, const Vector& condition) const;

    /// Forward pass that records what backward() needs.
    Matrix forward(const Matrix& x_t, int step, const Vector& condition, Trace& trace) const;
    /// Accumulates parameter gradients for dL/d(output).
    void backward(const Trace& trace, const Matrix& d_output);

private:
    void check_shapes(const Matrix& x_t, const Vector& condition) const;

    DenoiserConfig config_;
    ParameterSet params_;
    Linear input_;
    EmbeddingMlp time_embed_;
    EmbeddingMlp cond_embed_;
    std::vector<ResBlock> encoder_;
    ResBlock middle_;
    MultiHeadAttention attention_;
    std::vector<AttentionGate> gates_;
    std::vector<Conv1d> fuse_;
    std::vector<ResBlock> decoder_;
    Linear output_;
};

struct Denoiser::Trace {
    Matrix input;
    EmbeddingMlp::Cache time;
    EmbeddingMlp::Cache cond;
    std::vector<ResBlock::Cache> encoder;
    ResBlock::Cache middle;
    MultiHeadAttention::Cache attention;
    std::vector<AttentionGate::Cache> gates;
    std::vector<Matrix> fuse_inputs;
    std::vector<ResBlock::Cache> decoder;
    Matrix last_hidden;
};

}  // namespace mvr::diffusion
