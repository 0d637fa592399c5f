#include "mvr/diffusion/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "mvr/common/errors.hpp"
#include "mvr/common/format.hpp"

namespace mvr::diffusion {

OptimizerState OptimizerState::for_params(const ParameterSet& ps)
{
    OptimizerState state;
    for (const auto& p : ps) {
        state.first_moment.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
        state.second_moment.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
    return state;
}

void TrainSettings::validate() const
{
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("training: learning_rate must be > 0");
    }
    if (batch_size < 1 || epochs < 1 || patience < 1 || loss_buckets < 1) {
        throw std::invalid_argument("training: batch_size, epochs, patience and loss_buckets must be >= 1");
    }
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw std::invalid_argument("training: validation_fraction must be in [0, 1)");
    }
}

double noise_prediction_loss(const Denoiser& denoiser, const std::vector<Probe>& probes,
                             const NoiseSchedule& schedule)
{
    if (probes.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (const auto& probe : probes) {
        const Matrix noisy = forward_diffuse(probe.clean, probe.step, schedule, probe.noise);
        Denoiser::Trace trace;
        const Matrix predicted = denoiser.forward(noisy, probe.step, probe.condition, trace);
        total += (predicted - probe.noise).squaredNorm() / static_cast<double>(probe.noise.size());
    }
    return total / static_cast<double>(probes.size());
}

double loss_and_gradient(Denoiser& denoiser, const std::vector<Probe>& probes, const NoiseSchedule& schedule)
{
    denoiser.params().zero_grad();
    if (probes.empty()) {
        return 0.0;
    }
    const double batch = static_cast<double>(probes.size());
    double total = 0.0;
    for (const auto& probe : probes) {
        const Matrix noisy = forward_diffuse(probe.clean, probe.step, schedule, probe.noise);
        Denoiser::Trace trace;
        const Matrix residual = denoiser.forward(noisy, probe.step, probe.condition, trace) - probe.noise;
        const double count = static_cast<double>(residual.size());
        total += residual.squaredNorm() / count;
        denoiser.backward(trace, (2.0 / (count * batch)) * residual);
    }
    return total / batch;
}

namespace {
constexpr double kGradientFloor = 1e-6;
}

double analytic_gradient_check(Denoiser& denoiser, const std::vector<Probe>& probes,
                               const NoiseSchedule& schedule, double step)
{
    loss_and_gradient(denoiser, probes, schedule);
    auto& params = denoiser.params();
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Matrix analytic = params[i].grad;
        Matrix numeric(analytic.rows(), analytic.cols());
        Matrix& value = params[i].value;
        for (Eigen::Index r = 0; r < value.rows(); ++r) {
            for (Eigen::Index c = 0; c < value.cols(); ++c) {
                const double saved = value(r, c);
                value(r, c) = saved + step;
                const double up = noise_prediction_loss(denoiser, probes, schedule);
                value(r, c) = saved - step;
                const double down = noise_prediction_loss(denoiser, probes, schedule);
                value(r, c) = saved;
                numeric(r, c) = (up - down) / (2.0 * step);
            }
        }
        const double scale =
            std::max({analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff(), kGradientFloor});
        worst = std::max(worst, (analytic - numeric).cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

void adam_step(ParameterSet& params, OptimizerState& state, const TrainSettings& settings)
{
    if (state.first_moment.size() != params.size()) {
        state = OptimizerState::for_params(params);
    }
    ++state.step;
    const double correction1 = 1.0 - std::pow(settings.adam_beta1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(settings.adam_beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        const Matrix& g = params[i].grad;
        m = settings.adam_beta1 * m + (1.0 - settings.adam_beta1) * g;
        v = settings.adam_beta2 * v + (1.0 - settings.adam_beta2) * g.cwiseProduct(g);
        params[i].value.array() -= settings.learning_rate * (m.array() / correction1) /
                                   ((v.array() / correction2).sqrt() + settings.adam_epsilon);
    }
}

namespace {

void shuffle(std::vector<std::size_t>& items, Rng& rng)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[rng.index(i)]);
    }
}

int sample_step(const NoiseSchedule& schedule, Rng& rng)
{
    return 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(schedule.steps())));
}

std::vector<Probe> fixed_probes(const std::vector<TrainingSample>& data, const NoiseSchedule& schedule, Rng& rng)
{
    std::vector<Probe> probes;
    probes.reserve(data.size());
    for (const auto& sample : data) {
        Probe p;
        p.clean = sample.sequence;
        p.condition = sample.condition;
        p.step = sample_step(schedule, rng);
        p.noise = gaussian_like(sample.sequence.rows(), sample.sequence.cols(), rng);
        probes.push_back(std::move(p));
    }
    return probes;
}

}  // namespace

TrainResult train(const std::vector<TrainingSample>& dataset, const ColumnLayout& layout,
                  const NoiseSchedule& schedule, const DenoiserConfig& config, const TrainSettings& settings)
{
    settings.validate();
    layout.validate();
    if (dataset.empty()) {
        throw std::invalid_argument("training: dataset is empty");
    }
    if (config.features != layout.total()) {
        throw std::invalid_argument("training: model feature count differs from the column layout");
    }
    for (const auto& sample : dataset) {
        if (sample.sequence.cols() != layout.total() || sample.condition.size() != config.cond_dim) {
            throw std::invalid_argument("training: sample shape differs from the model configuration");
        }
        if (!sample.sequence.allFinite() || !sample.condition.allFinite()) {
            throw std::invalid_argument("training: non-finite sample");
        }
    }

    // deterministic split
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng split_rng = Rng::derive(settings.seed, 1);
    shuffle(order, split_rng);
    std::size_t val_count = static_cast<std::size_t>(std::floor(settings.validation_fraction * dataset.size()));
    if (settings.validation_fraction > 0.0 && dataset.size() >= 2) {
        val_count = std::clamp<std::size_t>(val_count, 1, dataset.size() - 1);
    }
    const std::size_t train_count = dataset.size() - val_count;

    Eigen::Index rows = 0;
    for (std::size_t i = 0; i < train_count; ++i) {
        rows += dataset[order[i]].sequence.rows();
    }
    Matrix stacked(rows, layout.total());
    Matrix conditions(static_cast<Eigen::Index>(train_count), config.cond_dim);
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < train_count; ++i) {
        const auto& s = dataset[order[i]];
        stacked.middleRows(at, s.sequence.rows()) = s.sequence;
        at += s.sequence.rows();
        conditions.row(static_cast<Eigen::Index>(i)) = s.condition.transpose();
    }
    const Standardizer seq_scaler = Standardizer::fit(stacked);
    const Standardizer cond_scaler = Standardizer::fit(conditions);

    std::vector<TrainingSample> train_set;
    std::vector<TrainingSample> val_set;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& s = dataset[order[i]];
        TrainingSample z{seq_scaler.apply(s.sequence), cond_scaler.apply(s.condition)};
        (i < train_count ? train_set : val_set).push_back(std::move(z));
    }

    Denoiser denoiser(config, mix_seed(settings.seed ^ 0x2545f4914f6cdd1dULL));
    OptimizerState optimizer = OptimizerState::for_params(denoiser.params());

    Rng eval_rng = Rng::derive(settings.seed, 3);
    const auto train_probes = fixed_probes(train_set, schedule, eval_rng);
    const auto val_probes = fixed_probes(val_set, schedule, eval_rng);
    auto evaluate = [&](int epoch) {
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = noise_prediction_loss(denoiser, train_probes, schedule);
        stats.val_loss = val_probes.empty() ? stats.train_loss
                                            : noise_prediction_loss(denoiser, val_probes, schedule);
        return stats;
    };

    TrainResult result{PreferenceModel{schedule, layout, seq_scaler, cond_scaler, denoiser, optimizer}, {}, 0, false, {}};
    result.curve.push_back(evaluate(0));
    double best_val = result.curve.back().val_loss;
    ParameterSet best_params = denoiser.params();
    OptimizerState best_optimizer = optimizer;
    int since_best = 0;

    Rng order_rng = Rng::derive(settings.seed, 4);
    Rng noise_rng = Rng::derive(settings.seed, 5);
    std::vector<std::size_t> batch_order(train_set.size());
    std::iota(batch_order.begin(), batch_order.end(), std::size_t{0});
    for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
        shuffle(batch_order, order_rng);
        for (std::size_t begin = 0; begin < batch_order.size(); begin += settings.batch_size) {
            const std::size_t end = std::min(batch_order.size(), begin + static_cast<std::size_t>(settings.batch_size));
            std::vector<Probe> batch;
            batch.reserve(end - begin);
            for (std::size_t k = begin; k < end; ++k) {
                const auto& s = train_set[batch_order[k]];
                Probe p{s.sequence, s.condition, sample_step(schedule, noise_rng), {}};
                p.noise = gaussian_like(s.sequence.rows(), s.sequence.cols(), noise_rng);
                batch.push_back(std::move(p));
            }
            const double loss = loss_and_gradient(denoiser, batch, schedule);
            if (!std::isfinite(loss)) {
                throw NumericalError(fmt::format("training diverged: non-finite loss at epoch {}, batch {}",
                                                 epoch, begin / settings.batch_size));
            }
            adam_step(denoiser.params(), optimizer, settings);
        }

        result.curve.push_back(evaluate(epoch));
        const double val = result.curve.back().val_loss;
        if (!std::isfinite(val)) {
            throw NumericalError(fmt::format("training diverged: non-finite validation loss at epoch {}", epoch));
        }
        if (val < best_val) {
            best_val = val;
            best_params = denoiser.params();
            best_optimizer = optimizer;
            result.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= settings.patience) {
            result.early_stopped = true;
            break;
        }
    }

    denoiser.params() = best_params;
    result.model.denoiser = denoiser;
    result.model.optimizer = best_optimizer;

    // per-bucket error of the restored model
    std::vector<double> sums(settings.loss_buckets, 0.0);
    std::vector<int> counts(settings.loss_buckets, 0);
    for (const auto& probe : train_probes) {
        const int bucket = std::min(settings.loss_buckets - 1,
                                    (probe.step - 1) * settings.loss_buckets / schedule.steps());
        sums[bucket] += noise_prediction_loss(denoiser, {probe}, schedule);
        ++counts[bucket];
    }
    for (int b = 0; b < settings.loss_buckets; ++b) {
        result.bucket_losses.push_back(counts[b] > 0 ? sums[b] / counts[b] : 0.0);
    }
    return result;
}

void write_loss_curve(std::ostream& out, const std::vector<EpochStats>& curve)
{
    out << "epoch,train_loss,val_loss\n";
    for (const auto& row : curve) {
        out << row.epoch << ',' << format_double(row.train_loss) << ',' << format_double(row.val_loss) << '\n';
    }
}

}  // namespace mvr::diffusion
