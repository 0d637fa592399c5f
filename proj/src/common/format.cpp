#include "mvr/common/format.hpp"

#include <fmt/format.h>

namespace mvr {

std::string format_double(double value)
{
    return fmt::format("{}", value);
}

}  // namespace mvr
