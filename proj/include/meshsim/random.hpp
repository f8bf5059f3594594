#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace meshsim
{

/**
 * The single pseudo-random stream of a run.
 *
 * Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
 * converts raw draws to doubles/integers with explicit arithmetic, so the
 * stream of values does not depend on the standard library's distribution
 * implementations.
 */
class Rng
{
  public:
    explicit Rng(std::uint64_t seed)
        : m_engine(seed)
    {
    }

    /// Uniform in [0, 1).
    double Uniform01()
    {
        return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi]; returns lo when the interval is degenerate.
    double Uniform(double lo, double hi)
    {
        if (!(hi > lo))
        {
            return lo;
        }
        return lo + (hi - lo) * Uniform01();
    }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t Below(std::uint64_t n)
    {
        // Rejection sampling keeps the draw unbiased.
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v = m_engine();
        while (v >= limit)
        {
            v = m_engine();
        }
        return v % n;
    }

  private:
    std::mt19937_64 m_engine;
};

} // namespace meshsim
