#pragma once

#include <cstdint>
#include <vector>

#include "mvr/diffusion/denoiser.hpp"
#include "mvr/diffusion/schedule.hpp"
#include "mvr/diffusion/sequence.hpp"

namespace mvr::diffusion {

/// Adam moments, one pair per parameter tensor.
struct OptimizerState {
    long step = 0;
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;

    static OptimizerState for_params(const ParameterSet& ps);
};

/// Everything needed to run inference on raw (unstandardized) data.
struct PreferenceModel {
    NoiseSchedule schedule;
    ColumnLayout layout;
    Standardizer sequence_scaler;
    Standardizer condition_scaler;
    Denoiser denoiser;
    OptimizerState optimizer;
};

}  // namespace mvr::diffusion
