#include "meshsim/trace.hpp"

#include <fmt/format.h>

namespace meshsim
{

void
Trace::Packet(SimTime t, NodeId node, std::string_view direction, const meshsim::Packet& packet)
{
    m_out << fmt::format("{:.9f} {} {} {} {}\n", t, node, direction, KindName(KindOf(packet)),
                         Describe(packet));
}

} // namespace meshsim
