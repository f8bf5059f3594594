#include "meshsim/metrics.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace meshsim
{

std::uint32_t
MetricsLedger::AddFlow(NodeId source, GroupId group, std::uint32_t receivers)
{
    const auto index = static_cast<std::uint32_t>(m_flows.size());
    m_flows.push_back(FlowRecord{source, group, receivers, 0, 0});
    m_flowIndex.emplace(std::make_pair(source, group), index);
    return index;
}

std::optional<std::uint32_t>
MetricsLedger::FlowIndex(NodeId source, GroupId group) const
{
    auto it = m_flowIndex.find({source, group});
    if (it == m_flowIndex.end())
    {
        return std::nullopt;
    }
    return it->second;
}

void
MetricsLedger::RecordDelivery(NodeId receiver, std::uint32_t flow, double delay)
{
    DeliveryRecord& rec = m_deliveries[{receiver, flow}];
    ++rec.delivered;
    rec.delaySum += delay;
}

void
MetricsLedger::RecordTransmission(NodeId node, const Packet& packet, std::uint64_t frameBits)
{
    const PacketKind kind = KindOf(packet);
    const auto k = static_cast<std::size_t>(kind);
    ++m_txByKind[k];
    m_bitsByKind[k] += frameBits;
    if (kind == PacketKind::Rreq)
    {
        if (node >= m_rreqTx.size())
        {
            m_rreqTx.resize(node + 1, 0);
        }
        ++m_rreqTx[node];
    }
}

std::uint64_t
MetricsLedger::ControlBits() const
{
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < kPacketKindCount; ++k)
    {
        if (IsControl(static_cast<PacketKind>(k)))
        {
            total += m_bitsByKind[k];
        }
    }
    return total;
}

std::uint64_t
MetricsLedger::TotalSent() const
{
    std::uint64_t total = 0;
    for (const auto& f : m_flows)
    {
        total += f.sent;
    }
    return total;
}

std::uint64_t
MetricsLedger::TotalDelivered() const
{
    std::uint64_t total = 0;
    for (const auto& [key, rec] : m_deliveries)
    {
        total += rec.delivered;
    }
    return total;
}

double
Pdr(const MetricsLedger& ledger)
{
    double expected = 0.0;
    for (const auto& f : ledger.Flows())
    {
        expected += static_cast<double>(f.sent) * f.receivers;
    }
    if (expected == 0.0)
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return static_cast<double>(ledger.TotalDelivered()) / expected;
}

double
AvgDelay(const MetricsLedger& ledger)
{
    std::uint64_t count = 0;
    double sum = 0.0;
    for (const auto& [key, rec] : ledger.Deliveries())
    {
        count += rec.delivered;
        sum += rec.delaySum;
    }
    if (count == 0)
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return sum / static_cast<double>(count);
}

double
RreqLoad(const MetricsLedger& ledger, std::size_t nodeCount)
{
    std::uint64_t total = 0;
    for (auto n : ledger.RreqTransmissions())
    {
        total += n;
    }
    return static_cast<double>(total) / static_cast<double>(nodeCount);
}

} // namespace meshsim
