#pragma once

#include <vector>

#include "mvr/diffusion/nn.hpp"

namespace mvr::diffusion {

/// Linear variance schedule beta_1..beta_T and its cumulative products.
class NoiseSchedule {
public:
    explicit NoiseSchedule(int steps = 700, double beta_start = 1e-4, double beta_end = 0.04);

    int steps() const { return steps_; }
    double beta_start() const { return beta_start_; }
    double beta_end() const { return beta_end_; }

    /// t in [1, T].
    double beta(int t) const;
    /// t in [0, T]; alpha_bar(0) = 1.
    double alpha_bar(int t) const;

private:
    int steps_;
    double beta_start_;
    double beta_end_;
    std::vector<double> betas_;
    std::vector<double> alpha_bars_;  ///< index 0 holds the t = 0 value
};

/// Closed-form marginal q(x_t | x_0): sqrt(ab_t) x0 + sqrt(1 - ab_t) noise.
Matrix forward_diffuse(const Matrix& clean, int t, const NoiseSchedule& schedule, const Matrix& noise);

/// Single transition q(x_t | x_{t-1}): sqrt(1 - beta_t) x + sqrt(beta_t) noise.
Matrix forward_step(const Matrix& previous, int t, const NoiseSchedule& schedule, const Matrix& noise);

Matrix gaussian_like(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace mvr::diffusion
