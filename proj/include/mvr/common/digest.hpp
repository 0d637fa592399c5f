#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace mvr {

/// 64-bit FNV-1a. Values are hashed through explicit little-endian byte
/// sequences so digests agree across platforms.
class Digest {
public:
    Digest& add(std::string_view bytes);
    Digest& add(std::uint64_t value);
    Digest& add(std::int64_t value) { return add(static_cast<std::uint64_t>(value)); }
    Digest& add(int value) { return add(static_cast<std::uint64_t>(static_cast<std::int64_t>(value))); }
    Digest& add(double value);
    Digest& add(bool value) { return add(static_cast<std::uint64_t>(value ? 1 : 0)); }
    Digest& add(std::span<const double> values);

    std::uint64_t value() const noexcept { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);

}  // namespace mvr
