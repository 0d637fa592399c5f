#pragma once

#include <array>
#include <string_view>

#include "mvr/diffusion/nn.hpp"

namespace mvr::diffusion {

/// Column grouping of a preference sequence. Columns are laid out as
/// [interaction | latency | fluency], so the groups always partition F.
struct ColumnLayout {
    int interaction = 2;
    int latency = 2;
    int fluency = 2;

    int total() const { return interaction + latency + fluency; }
    int interaction_begin() const { return 0; }
    int latency_begin() const { return interaction; }
    int fluency_begin() const { return interaction + latency; }
    void validate() const;
};

/// L x F history of standardized interaction, latency and fluency signals.
struct PreferenceSequence {
    Matrix features;
    ColumnLayout layout;

    Eigen::Index length() const { return features.rows(); }
    void validate() const;
};

/// Device and network status that conditions the reverse process.
struct ResourceConstraint {
    static constexpr std::array<std::string_view, 4> kFields{"cpu_load", "gpu_load", "battery_level", "bandwidth"};

    Vector values = Vector::Zero(4);

    static ResourceConstraint from(double cpu_load, double gpu_load, double battery_level, double bandwidth);
    void validate() const;
};

/// Per-column affine standardization with statistics frozen at fit time.
struct Standardizer {
    RowVector mean;
    RowVector scale;

    /// Fits on the rows of `samples`; zero-variance columns keep scale 1.
    static Standardizer fit(const Matrix& samples);
    static Standardizer identity(Eigen::Index columns);

    Matrix apply(const Matrix& x) const;
    Matrix invert(const Matrix& z) const;
    Vector apply(const Vector& x) const;
};

}  // namespace mvr::diffusion
