#include "mvr/common/digest.hpp"

#include <bit>
#include <cstring>

#include <fmt/format.h>

namespace mvr {

namespace {
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
}

Digest& Digest::add(std::string_view bytes)
{
    for (unsigned char c : bytes) {
        state_ ^= c;
        state_ *= kFnvPrime;
    }
    return *this;
}

Digest& Digest::add(std::uint64_t value)
{
    for (int i = 0; i < 8; ++i) {
        state_ ^= static_cast<unsigned char>((value >> (8 * i)) & 0xffU);
        state_ *= kFnvPrime;
    }
    return *this;
}

Digest& Digest::add(double value)
{
    if (value == 0.0) {
        value = 0.0;  // fold -0.0
    }
    return add(std::bit_cast<std::uint64_t>(value));
}

Digest& Digest::add(std::span<const double> values)
{
    add(static_cast<std::uint64_t>(values.size()));
    for (double v : values) {
        add(v);
    }
    return *this;
}

std::string Digest::hex() const { return to_hex(state_); }

std::string to_hex(std::uint64_t value) { return fmt::format("{:016x}", value); }

}  // namespace mvr
