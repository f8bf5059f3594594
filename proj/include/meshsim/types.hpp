#pragma once

#include <cstdint>
#include <limits>

namespace meshsim
{

/// Simulated time in seconds.
using SimTime = double;

using NodeId = std::uint32_t;
using GroupId = std::uint32_t;

/// Rates are carried as whole bits per second so that reservation
/// bookkeeping is exact.
using BitRate = std::int64_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Vec2
{
    double x{0.0};
    double y{0.0};

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

double Distance(const Vec2& a, const Vec2& b);

enum class Variant : std::uint8_t
{
    Odmrp,
    Cqmp,
    Proposed,
};

const char* VariantName(Variant v);

} // namespace meshsim
