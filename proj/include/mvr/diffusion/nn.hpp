#pragma once

// Minimal layer set for the denoiser, with explicit backward passes.
// Activations are (sequence position x channel) matrices. Every layer keeps
// its weights in a shared ParameterSet and refers to them by index, so a
// model is a plain value that can be copied, checkpointed, and
// finite-difference checked tensor by tensor.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvr/common/rng.hpp"

namespace mvr::diffusion {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
};

class ParameterSet {
public:
    /// Adds a tensor initialized from N(0, scale^2).
    std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng);
    std::size_t add_zero(std::string name, Eigen::Index rows, Eigen::Index cols);

    Parameter& operator[](std::size_t i) { return params_[i]; }
    const Parameter& operator[](std::size_t i) const { return params_[i]; }
    std::size_t size() const { return params_.size(); }
    std::size_t scalar_count() const;

    const Matrix& value(std::size_t i) const { return params_[i].value; }
    Matrix& grad(std::size_t i) { return params_[i].grad; }

    void zero_grad();

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::vector<Parameter> params_;
};

Matrix silu(const Matrix& x);
/// d/dx silu(x) applied to an upstream gradient.
Matrix silu_backward(const Matrix& x, const Matrix& dy);

/// Mean of adjacent row pairs; rows must be even.
Matrix avg_pool2(const Matrix& x);
Matrix avg_pool2_backward(const Matrix& dy);
/// Each row repeated twice.
Matrix upsample2(const Matrix& x);
Matrix upsample2_backward(const Matrix& dy);

/// Per-position affine map y = x W + b.
struct Linear {
    std::size_t weight = 0;
    std::size_t bias = 0;

    static Linear create(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng);
    Matrix forward(const ParameterSet& ps, const Matrix& x) const;
    /// Accumulates weight/bias gradients and returns dL/dx.
    Matrix backward(ParameterSet& ps, const Matrix& x, const Matrix& dy) const;
};

/// Kernel-3 convolution along the sequence with zero padding.
struct Conv1d {
    std::size_t weight = 0;  ///< (3 * in) x out, taps ordered [prev | self | next]
    std::size_t bias = 0;

    static Conv1d create(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng);
    Matrix forward(const ParameterSet& ps, const Matrix& x) const;
    Matrix backward(ParameterSet& ps, const Matrix& x, const Matrix& dy) const;
};

/// x + conv2(silu(conv1(silu(x)))).
struct ResBlock {
    Conv1d first;
    Conv1d second;

    struct Cache {
        Matrix input;
        Matrix hidden;  ///< conv1 output, pre-activation
    };

    static ResBlock create(ParameterSet& ps, const std::string& name, Eigen::Index channels, Rng& rng);
    Matrix forward(const ParameterSet& ps, const Matrix& x, Cache& cache) const;
    Matrix backward(ParameterSet& ps, const Cache& cache, const Matrix& dy) const;
};

/// Scaled dot-product self-attention over sequence positions, split in heads.
struct MultiHeadAttention {
    Linear query;
    Linear key;
    Linear value;
    Linear output;
    int heads = 1;

    struct Cache {
        Matrix input;
        Matrix q, k, v;
        std::vector<Matrix> weights;  ///< per head, L x L softmax rows
        Matrix mixed;                 ///< concatenated head outputs
    };

    static MultiHeadAttention create(ParameterSet& ps, const std::string& name, Eigen::Index channels,
                                     int heads, Rng& rng);
    Matrix forward(const ParameterSet& ps, const Matrix& x, Cache& cache) const;
    Matrix backward(ParameterSet& ps, const Cache& cache, const Matrix& dy) const;
};

/// Additive attention gate on a skip connection: each position of the skip
/// features is scaled by sigmoid(psi . silu(x Wx + g Wg + b)), where g is the
/// (upsampled) decoder signal at the same resolution.
struct AttentionGate {
    Linear skip_proj;
    Linear gate_proj;
    Linear psi;

    struct Cache {
        Matrix skip;
        Matrix gate;
        Matrix pre;    ///< x Wx + g Wg + b
        Matrix alpha;  ///< L x 1 gate coefficients
    };

    static AttentionGate create(ParameterSet& ps, const std::string& name, Eigen::Index channels,
                                Eigen::Index inner, Rng& rng);
    Matrix forward(const ParameterSet& ps, const Matrix& skip, const Matrix& gate, Cache& cache) const;
    /// Returns {d skip, d gate}.
    std::pair<Matrix, Matrix> backward(ParameterSet& ps, const Cache& cache, const Matrix& dy) const;
};

/// Two-layer MLP on a single row: silu(x W1 + b1) W2 + b2.
struct EmbeddingMlp {
    Linear first;
    Linear second;

    struct Cache {
        Matrix input;
        Matrix hidden;
    };

    static EmbeddingMlp create(ParameterSet& ps, const std::string& name, Eigen::Index in,
                               Eigen::Index out, Rng& rng);
    Matrix forward(const ParameterSet& ps, const Matrix& x, Cache& cache) const;
    void backward(ParameterSet& ps, const Cache& cache, const Matrix& dy) const;
};

/// Sinusoidal embedding of a diffusion step, 1 x width (width even).
RowVector timestep_embedding(int step, Eigen::Index width);

}  // namespace mvr::diffusion
