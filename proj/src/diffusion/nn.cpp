#include "mvr/diffusion/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace mvr::diffusion {

std::size_t ParameterSet::add(std::string name, Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng)
{
    Parameter p{std::move(name), Matrix(rows, cols), Matrix::Zero(rows, cols)};
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            p.value(r, c) = scale * rng.normal();
        }
    }
    params_.push_back(std::move(p));
    return params_.size() - 1;
}

std::size_t ParameterSet::add_zero(std::string name, Eigen::Index rows, Eigen::Index cols)
{
    params_.push_back(Parameter{std::move(name), Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)});
    return params_.size() - 1;
}

std::size_t ParameterSet::scalar_count() const
{
    std::size_t n = 0;
    for (const auto& p : params_) {
        n += static_cast<std::size_t>(p.value.size());
    }
    return n;
}

void ParameterSet::zero_grad()
{
    for (auto& p : params_) {
        p.grad.setZero();
    }
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Matrix silu(const Matrix& x)
{
    return x.unaryExpr([](double v) { return v * sigmoid(v); });
}

Matrix silu_backward(const Matrix& x, const Matrix& dy)
{
    return x.binaryExpr(dy, [](double v, double g) {
        const double s = sigmoid(v);
        return g * s * (1.0 + v * (1.0 - s));
    });
}

Matrix avg_pool2(const Matrix& x)
{
    if (x.rows() % 2 != 0) {
        throw std::invalid_argument("avg_pool2: sequence length must be even");
    }
    Matrix y(x.rows() / 2, x.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        y.row(i) = 0.5 * (x.row(2 * i) + x.row(2 * i + 1));
    }
    return y;
}

Matrix avg_pool2_backward(const Matrix& dy)
{
    Matrix dx(dy.rows() * 2, dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
        dx.row(2 * i) = 0.5 * dy.row(i);
        dx.row(2 * i + 1) = 0.5 * dy.row(i);
    }
    return dx;
}

Matrix upsample2(const Matrix& x)
{
    Matrix y(x.rows() * 2, x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        y.row(2 * i) = x.row(i);
        y.row(2 * i + 1) = x.row(i);
    }
    return y;
}

Matrix upsample2_backward(const Matrix& dy)
{
    Matrix dx(dy.rows() / 2, dy.cols());
    for (Eigen::Index i = 0; i < dx.rows(); ++i) {
        dx.row(i) = dy.row(2 * i) + dy.row(2 * i + 1);
    }
    return dx;
}

Linear Linear::create(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng)
{
    Linear layer;
    layer.weight = ps.add(name + ".weight", in, out, 1.0 / std::sqrt(static_cast<double>(in)), rng);
    layer.bias = ps.add_zero(name + ".bias", 1, out);
    return layer;
}

Matrix Linear::forward(const ParameterSet& ps, const Matrix& x) const
{
    Matrix y = x * ps.value(weight);
    y.rowwise() += ps.value(bias).row(0);
    return y;
}

Matrix Linear::backward(ParameterSet& ps, const Matrix& x, const Matrix& dy) const
{
    ps.grad(weight).noalias() += x.transpose() * dy;
    ps.grad(bias) += dy.colwise().sum();
    return dy * ps.value(weight).transpose();
}

namespace {

Matrix unfold3(const Matrix& x)
{
    const Eigen::Index L = x.rows();
    const Eigen::Index C = x.cols();
    Matrix cols = Matrix::Zero(L, 3 * C);
    if (L > 1) {
        cols.block(1, 0, L - 1, C) = x.topRows(L - 1);
        cols.block(0, 2 * C, L - 1, C) = x.bottomRows(L - 1);
    }
    cols.middleCols(C, C) = x;
    return cols;
}

}  // namespace

Conv1d Conv1d::create(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng)
{
    Conv1d layer;
    layer.weight = ps.add(name + ".weight", 3 * in, out, 1.0 / std::sqrt(3.0 * static_cast<double>(in)), rng);
    layer.bias = ps.add_zero(name + ".bias", 1, out);
    return layer;
}

Matrix Conv1d::forward(const ParameterSet& ps, const Matrix& x) const
{
    Matrix y = unfold3(x) * ps.value(weight);
    y.rowwise() += ps.value(bias).row(0);
    return y;
}

Matrix Conv1d::backward(ParameterSet& ps, const Matrix& x, const Matrix& dy) const
{
    const Eigen::Index L = x.rows();
    const Eigen::Index C = x.cols();
    ps.grad(weight).noalias() += unfold3(x).transpose() * dy;
    ps.grad(bias) += dy.colwise().sum();
    const Matrix dcols = dy * ps.value(weight).transpose();
    Matrix dx = dcols.middleCols(C, C);
    if (L > 1) {
        dx.topRows(L - 1) += dcols.block(1, 0, L - 1, C);
        dx.bottomRows(L - 1) += dcols.block(0, 2 * C, L - 1, C);
    }
    return dx;
}

ResBlock ResBlock::create(ParameterSet& ps, const std::string& name, Eigen::Index channels, Rng& rng)
{
    ResBlock block;
    block.first = Conv1d::create(ps, name + ".conv1", channels, channels, rng);
    block.second = Conv1d::create(ps, name + ".conv2", channels, channels, rng);
    return block;
}

Matrix ResBlock::forward(const ParameterSet& ps, const Matrix& x, Cache& cache) const
{
    cache.input = x;
    cache.hidden = first.forward(ps, silu(x));
    return x + second.forward(ps, silu(cache.hidden));
}

Matrix ResBlock::backward(ParameterSet& ps, const Cache& cache, const Matrix& dy) const
{
    const Matrix d_act2 = second.backward(ps, silu(cache.hidden), dy);
    const Matrix d_hidden = silu_backward(cache.hidden, d_act2);
    const Matrix d_act1 = first.backward(ps, silu(cache.input), d_hidden);
    return dy + silu_backward(cache.input, d_act1);
}

MultiHeadAttention MultiHeadAttention::create(ParameterSet& ps, const std::string& name, Eigen::Index channels,
                                              int heads, Rng& rng)
{
    if (heads < 1 || channels % heads != 0) {
        throw std::invalid_argument("attention: channels must be divisible by heads");
    }
    MultiHeadAttention mha;
    mha.query = Linear::create(ps, name + ".query", channels, channels, rng);
    mha.key = Linear::create(ps, name + ".key", channels, channels, rng);
    mha.value = Linear::create(ps, name + ".value", channels, channels, rng);
    mha.output = Linear::create(ps, name + ".output", channels, channels, rng);
    mha.heads = heads;
    return mha;
}

Matrix MultiHeadAttention::forward(const ParameterSet& ps, const Matrix& x, Cache& cache) const
{
    const Eigen::Index L = x.rows();
    const Eigen::Index width = x.cols() / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(width));
    cache.input = x;
    cache.q = query.forward(ps, x);
    cache.k = key.forward(ps, x);
    cache.v = value.forward(ps, x);
    cache.weights.resize(heads);
    cache.mixed.resize(L, x.cols());
    for (int h = 0; h < heads; ++h) {
        const auto q = cache.q.middleCols(h * width, width);
        const auto k = cache.k.middleCols(h * width, width);
        const auto v = cache.v.middleCols(h * width, width);
        Matrix scores = scale * (q * k.transpose());
        for (Eigen::Index r = 0; r < L; ++r) {
            const double top = scores.row(r).maxCoeff();
            scores.row(r) = (scores.row(r).array() - top).exp().matrix();
            scores.row(r) /= scores.row(r).sum();
        }
        cache.mixed.middleCols(h * width, width) = scores * v;
        cache.weights[h] = std::move(scores);
    }
    return output.forward(ps, cache.mixed);
}

Matrix MultiHeadAttention::backward(ParameterSet& ps, const Cache& cache, const Matrix& dy) const
{
    const Eigen::Index L = cache.input.rows();
    const Eigen::Index width = cache.input.cols() / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(width));
    const Matrix d_mixed = output.backward(ps, cache.mixed, dy);
    Matrix dq(L, cache.input.cols());
    Matrix dk(L, cache.input.cols());
    Matrix dv(L, cache.input.cols());
    for (int h = 0; h < heads; ++h) {
        const Matrix& a = cache.weights[h];
        const auto q = cache.q.middleCols(h * width, width);
        const auto k = cache.k.middleCols(h * width, width);
        const auto v = cache.v.middleCols(h * width, width);
        const auto d_out = d_mixed.middleCols(h * width, width);
        const Matrix d_weights = d_out * v.transpose();
        dv.middleCols(h * width, width) = a.transpose() * d_out;
        // softmax Jacobian, row by row
        const Eigen::VectorXd row_dot = (d_weights.array() * a.array()).rowwise().sum();
        Matrix d_scores = a.array() * (d_weights.colwise() - row_dot).array();
        d_scores *= scale;
        dq.middleCols(h * width, width) = d_scores * k;
        dk.middleCols(h * width, width) = d_scores.transpose() * q;
    }
    Matrix dx = query.backward(ps, cache.input, dq);
    dx += key.backward(ps, cache.input, dk);
    dx += value.backward(ps, cache.input, dv);
    return dx;
}

AttentionGate AttentionGate::create(ParameterSet& ps, const std::string& name, Eigen::Index channels,
                                    Eigen::Index inner, Rng& rng)
{
    AttentionGate gate;
    gate.skip_proj = Linear::create(ps, name + ".skip", channels, inner, rng);
    gate.gate_proj = Linear::create(ps, name + ".gate", channels, inner, rng);
    gate.psi = Linear::create(ps, name + ".psi", inner, 1, rng);
    return gate;
}

Matrix AttentionGate::forward(const ParameterSet& ps, const Matrix& skip, const Matrix& gate, Cache& cache) const
{
    cache.skip = skip;
    cache.gate = gate;
    cache.pre = skip_proj.forward(ps, skip) + gate_proj.forward(ps, gate);
    const Matrix logits = psi.forward(ps, silu(cache.pre));
    cache.alpha = logits.unaryExpr([](double v) { return sigmoid(v); });
    return skip.array().colwise() * cache.alpha.col(0).array();
}

std::pair<Matrix, Matrix> AttentionGate::backward(ParameterSet& ps, const Cache& cache, const Matrix& dy) const
{
    Matrix d_skip = dy.array().colwise() * cache.alpha.col(0).array();
    const Matrix d_alpha = (dy.array() * cache.skip.array()).rowwise().sum().matrix();
    const Matrix d_logits = d_alpha.array() * cache.alpha.array() * (1.0 - cache.alpha.array());
    const Matrix d_act = psi.backward(ps, silu(cache.pre), d_logits);
    const Matrix d_pre = silu_backward(cache.pre, d_act);
    d_skip += skip_proj.backward(ps, cache.skip, d_pre);
    Matrix d_gate = gate_proj.backward(ps, cache.gate, d_pre);
    return {std::move(d_skip), std::move(d_gate)};
}

EmbeddingMlp EmbeddingMlp::create(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index out,
                                  Rng& rng)
{
    EmbeddingMlp mlp;
    mlp.first = Linear::create(ps, name + ".fc1", in, out, rng);
    mlp.second = Linear::create(ps, name + ".fc2", out, out, rng);
    return mlp;
}

Matrix EmbeddingMlp::forward(const ParameterSet& ps, const Matrix& x, Cache& cache) const
{
    cache.input = x;
    cache.hidden = first.forward(ps, x);
    return second.forward(ps, silu(cache.hidden));
}

void EmbeddingMlp::backward(ParameterSet& ps, const Cache& cache, const Matrix& dy) const
{
    const Matrix d_act = second.backward(ps, silu(cache.hidden), dy);
    first.backward(ps, cache.input, silu_backward(cache.hidden, d_act));
}

RowVector timestep_embedding(int step, Eigen::Index width)
{
    const Eigen::Index half = width / 2;
    RowVector e(width);
    for (Eigen::Index i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
        e(i) = std::sin(step * freq);
        e(half + i) = std::cos(step * freq);
    }
    return e;
}

}  // namespace mvr::diffusion
