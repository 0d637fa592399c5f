#include "mvr/diffusion/sequence.hpp"

#include <cmath>
#include <stdexcept>

namespace mvr::diffusion {

void ColumnLayout::validate() const
{
    if (interaction < 1 || latency < 0 || fluency < 0) {
        throw std::invalid_argument("column layout: need at least one interaction column");
    }
}

void PreferenceSequence::validate() const
{
    layout.validate();
    if (features.cols() != layout.total()) {
        throw std::invalid_argument("preference sequence: column groups do not cover every column");
    }
    if (!features.allFinite()) {
        throw std::invalid_argument("preference sequence: non-finite entry");
    }
}

ResourceConstraint ResourceConstraint::from(double cpu_load, double gpu_load, double battery_level, double bandwidth)
{
    ResourceConstraint c;
    c.values << cpu_load, gpu_load, battery_level, bandwidth;
    return c;
}

void ResourceConstraint::validate() const
{
    if (!values.allFinite()) {
        throw std::invalid_argument("resource constraint: non-finite entry");
    }
}

Standardizer Standardizer::fit(const Matrix& samples)
{
    Standardizer s;
    const double n = static_cast<double>(samples.rows());
    s.mean = samples.colwise().mean();
    s.scale.resize(samples.cols());
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
        const double var = (samples.col(c).array() - s.mean(c)).square().sum() / n;
        s.scale(c) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    return s;
}

Standardizer Standardizer::identity(Eigen::Index columns)
{
    return Standardizer{RowVector::Zero(columns), RowVector::Ones(columns)};
}

Matrix Standardizer::apply(const Matrix& x) const
{
    if (x.cols() != mean.size()) {
        throw std::invalid_argument("standardizer: column count mismatch");
    }
    return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

Matrix Standardizer::invert(const Matrix& z) const
{
    if (z.cols() != mean.size()) {
        throw std::invalid_argument("standardizer: column count mismatch");
    }
    return ((z.array().rowwise() * scale.array()).rowwise() + mean.array()).matrix();
}

Vector Standardizer::apply(const Vector& x) const
{
    if (x.size() != mean.size()) {
        throw std::invalid_argument("standardizer: dimension mismatch");
    }
    return ((x.transpose() - mean).array() / scale.array()).matrix().transpose();
}

}  // namespace mvr::diffusion
