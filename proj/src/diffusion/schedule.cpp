#include "mvr/diffusion/schedule.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace mvr::diffusion {

NoiseSchedule::NoiseSchedule(int steps, double beta_start, double beta_end)
    : steps_(steps), beta_start_(beta_start), beta_end_(beta_end)
{
    if (steps < 1) {
        throw std::invalid_argument("noise schedule: steps must be >= 1");
    }
    if (!(beta_start > 0.0) || !(beta_end < 1.0) || (steps > 1 && !(beta_start < beta_end))) {
        throw std::invalid_argument("noise schedule: need 0 < beta_start < beta_end < 1");
    }
    betas_.resize(steps);
    alpha_bars_.resize(steps + 1);
    alpha_bars_[0] = 1.0;
    for (int t = 1; t <= steps; ++t) {
        const double frac = steps > 1 ? static_cast<double>(t - 1) / (steps - 1) : 0.0;
        betas_[t - 1] = beta_start + (beta_end - beta_start) * frac;
        alpha_bars_[t] = alpha_bars_[t - 1] * (1.0 - betas_[t - 1]);
    }
}

double NoiseSchedule::beta(int t) const
{
    if (t < 1 || t > steps_) {
        throw std::out_of_range(fmt::format("noise schedule: step {} outside [1, {}]", t, steps_));
    }
    return betas_[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const
{
    if (t < 0 || t > steps_) {
        throw std::out_of_range(fmt::format("noise schedule: step {} outside [0, {}]", t, steps_));
    }
    return alpha_bars_[t];
}

Matrix forward_diffuse(const Matrix& clean, int t, const NoiseSchedule& schedule, const Matrix& noise)
{
    if (clean.rows() != noise.rows() || clean.cols() != noise.cols()) {
        throw std::invalid_argument("forward_diffuse: noise shape differs from the sequence");
    }
    if (t < 1 || t > schedule.steps()) {
        throw std::out_of_range("forward_diffuse: step outside schedule");
    }
    const double ab = schedule.alpha_bar(t);
    return std::sqrt(ab) * clean + std::sqrt(1.0 - ab) * noise;
}

Matrix forward_step(const Matrix& previous, int t, const NoiseSchedule& schedule, const Matrix& noise)
{
    if (previous.rows() != noise.rows() || previous.cols() != noise.cols()) {
        throw std::invalid_argument("forward_step: noise shape differs from the sequence");
    }
    const double b = schedule.beta(t);
    return std::sqrt(1.0 - b) * previous + std::sqrt(b) * noise;
}

Matrix gaussian_like(Eigen::Index rows, Eigen::Index cols, Rng& rng)
{
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = rng.normal();
        }
    }
    return m;
}

}  // namespace mvr::diffusion
