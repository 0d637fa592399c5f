#include "mvr/diffusion/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace mvr::diffusion {

namespace {

constexpr std::array<char, 8> kMagic{'M', 'V', 'R', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put(std::ostream& out, T value)
{
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto bits = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.put(static_cast<char>(bits & 0xFFu));
        bits = static_cast<U>(bits >> 8);
    }
}

void put_f64(std::ostream& out, double value) { put(out, std::bit_cast<std::uint64_t>(value)); }

template <typename T>
T get(std::istream& in)
{
    using U = std::make_unsigned_t<T>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) {
            throw std::runtime_error("checkpoint: unexpected end of file");
        }
        bits = static_cast<U>(bits | (static_cast<U>(static_cast<unsigned char>(c)) << (8 * i)));
    }
    return static_cast<T>(bits);
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get<std::uint64_t>(in)); }

void put_matrix_data(std::ostream& out, const Matrix& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            put_f64(out, m(r, c));
        }
    }
}

Matrix get_matrix_data(std::istream& in, Eigen::Index rows, Eigen::Index cols)
{
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = get_f64(in);
        }
    }
    return m;
}

void put_scaler(std::ostream& out, const Standardizer& s)
{
    put(out, static_cast<std::uint32_t>(s.mean.size()));
    for (Eigen::Index i = 0; i < s.mean.size(); ++i) put_f64(out, s.mean(i));
    for (Eigen::Index i = 0; i < s.scale.size(); ++i) put_f64(out, s.scale(i));
}

Standardizer get_scaler(std::istream& in)
{
    const auto n = get<std::uint32_t>(in);
    if (n > 1u << 20) {
        throw std::runtime_error("checkpoint: implausible scaler width");
    }
    Standardizer s;
    s.mean.resize(n);
    s.scale.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) s.mean(i) = get_f64(in);
    for (std::uint32_t i = 0; i < n; ++i) s.scale(i) = get_f64(in);
    return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const PreferenceModel& model)
{
    out.write(kMagic.data(), kMagic.size());
    put(out, kCheckpointVersion);
    put(out, static_cast<std::int32_t>(model.schedule.steps()));
    put_f64(out, model.schedule.beta_start());
    put_f64(out, model.schedule.beta_end());
    const auto& cfg = model.denoiser.config();
    for (int v : {cfg.features, cfg.cond_dim, cfg.d_model, cfg.heads, cfg.levels}) {
        put(out, static_cast<std::int32_t>(v));
    }
    for (int v : {model.layout.interaction, model.layout.latency, model.layout.fluency}) {
        put(out, static_cast<std::int32_t>(v));
    }
    put_scaler(out, model.sequence_scaler);
    put_scaler(out, model.condition_scaler);
    put(out, static_cast<std::int64_t>(model.optimizer.step));

    const auto& params = model.denoiser.params();
    const bool has_moments = model.optimizer.first_moment.size() == params.size();
    put(out, static_cast<std::uint32_t>(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& p = params[i];
        put(out, static_cast<std::uint32_t>(p.name.size()));
        out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        put(out, static_cast<std::uint32_t>(p.value.rows()));
        put(out, static_cast<std::uint32_t>(p.value.cols()));
        put_matrix_data(out, p.value);
        const Matrix zero = Matrix::Zero(p.value.rows(), p.value.cols());
        put_matrix_data(out, has_moments ? model.optimizer.first_moment[i] : zero);
        put_matrix_data(out, has_moments ? model.optimizer.second_moment[i] : zero);
    }
    if (!out) {
        throw std::runtime_error("checkpoint: write failed");
    }
}

PreferenceModel read_checkpoint(std::istream& in)
{
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw std::runtime_error("checkpoint: not a model checkpoint");
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw std::runtime_error(fmt::format("checkpoint: unsupported version {}", version));
    }
    const auto steps = get<std::int32_t>(in);
    const double beta_start = get_f64(in);
    const double beta_end = get_f64(in);
    NoiseSchedule schedule(steps, beta_start, beta_end);

    DenoiserConfig cfg;
    cfg.features = get<std::int32_t>(in);
    cfg.cond_dim = get<std::int32_t>(in);
    cfg.d_model = get<std::int32_t>(in);
    cfg.heads = get<std::int32_t>(in);
    cfg.levels = get<std::int32_t>(in);
    ColumnLayout layout;
    layout.interaction = get<std::int32_t>(in);
    layout.latency = get<std::int32_t>(in);
    layout.fluency = get<std::int32_t>(in);
    layout.validate();
    cfg.validate();

    Standardizer seq_scaler = get_scaler(in);
    Standardizer cond_scaler = get_scaler(in);
    if (seq_scaler.mean.size() != cfg.features || cond_scaler.mean.size() != cfg.cond_dim) {
        throw std::invalid_argument("checkpoint: scaler widths disagree with the model configuration");
    }

    Denoiser denoiser(cfg, 0);
    OptimizerState optimizer = OptimizerState::for_params(denoiser.params());
    optimizer.step = get<std::int64_t>(in);
    auto& params = denoiser.params();
    const auto count = get<std::uint32_t>(in);
    if (count != params.size()) {
        throw std::invalid_argument(
            fmt::format("checkpoint: {} tensors stored, configuration expects {}", count, params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto length = get<std::uint32_t>(in);
        if (length > 4096) {
            throw std::runtime_error("checkpoint: implausible tensor name length");
        }
        std::string name(length, '\0');
        in.read(name.data(), length);
        const auto rows = get<std::uint32_t>(in);
        const auto cols = get<std::uint32_t>(in);
        auto& p = params[i];
        if (!in || name != p.name || rows != p.value.rows() || cols != p.value.cols()) {
            throw std::invalid_argument(fmt::format("checkpoint: tensor {} ('{}' {}x{}) does not match '{}' {}x{}", i,
                                                    name, rows, cols, p.name, p.value.rows(), p.value.cols()));
        }
        p.value = get_matrix_data(in, rows, cols);
        optimizer.first_moment[i] = get_matrix_data(in, rows, cols);
        optimizer.second_moment[i] = get_matrix_data(in, rows, cols);
    }
    return PreferenceModel{schedule, layout, std::move(seq_scaler), std::move(cond_scaler), std::move(denoiser),
                           std::move(optimizer)};
}

void save_checkpoint(const std::filesystem::path& path, const PreferenceModel& model)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(fmt::format("checkpoint: cannot open {} for writing", path.string()));
    }
    write_checkpoint(out, model);
}

PreferenceModel load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(fmt::format("checkpoint: cannot open {}", path.string()));
    }
    return read_checkpoint(in);
}

}  // namespace mvr::diffusion
