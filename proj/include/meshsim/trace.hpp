#pragma once

#include "meshsim/types.hpp"
#include "meshsim/wire.hpp"

#include <ostream>
#include <string_view>

namespace meshsim
{

/**
 * Packet event trace, one line per event:
 *
 *     <time %.9f> <node> <direction> <KIND> <key=value ...>
 *
 * direction is one of tx, rx, collide (frame lost to overlap at this
 * receiver) or qdrop (transmit queue overflow at this sender).
 */
class Trace
{
  public:
    explicit Trace(std::ostream& out)
        : m_out(out)
    {
    }

    void Packet(SimTime t, NodeId node, std::string_view direction, const meshsim::Packet& packet);

  private:
    std::ostream& m_out;
};

} // namespace meshsim
