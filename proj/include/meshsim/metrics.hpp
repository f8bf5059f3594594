#pragma once

#include "meshsim/types.hpp"
#include "meshsim/wire.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace meshsim
{

struct FlowRecord
{
    NodeId source{kNoNode};
    GroupId group{0};
    std::uint32_t receivers{0};
    std::uint64_t sent{0};
    // CBR ticks that produced no packet because the source had no usable route.
    std::uint64_t blocked{0};
};

struct DeliveryRecord
{
    std::uint64_t delivered{0};
    double delaySum{0.0};
};

/**
 * Raw counters of one run. Every derived metric is a pure function of this
 * ledger.
 */
class MetricsLedger
{
  public:
    explicit MetricsLedger(std::size_t nodeCount = 0)
        : m_rreqTx(nodeCount, 0)
    {
    }

    std::uint32_t AddFlow(NodeId source, GroupId group, std::uint32_t receivers);
    std::optional<std::uint32_t> FlowIndex(NodeId source, GroupId group) const;

    void RecordSent(std::uint32_t flow)
    {
        ++m_flows.at(flow).sent;
    }

    void RecordBlocked(std::uint32_t flow)
    {
        ++m_flows.at(flow).blocked;
    }

    /// Callers guarantee first-arrival semantics; one call per delivered tuple.
    void RecordDelivery(NodeId receiver, std::uint32_t flow, double delay);

    void RecordTransmission(NodeId node, const Packet& packet, std::uint64_t frameBits);

    const std::vector<FlowRecord>& Flows() const
    {
        return m_flows;
    }

    const std::map<std::pair<NodeId, std::uint32_t>, DeliveryRecord>& Deliveries() const
    {
        return m_deliveries;
    }

    const std::vector<std::uint64_t>& RreqTransmissions() const
    {
        return m_rreqTx;
    }

    std::uint64_t TransmissionsOf(PacketKind kind) const
    {
        return m_txByKind[static_cast<std::size_t>(kind)];
    }

    std::uint64_t BitsOf(PacketKind kind) const
    {
        return m_bitsByKind[static_cast<std::size_t>(kind)];
    }

    /// Frame bits over every control packet kind.
    std::uint64_t ControlBits() const;

    std::uint64_t TotalSent() const;
    std::uint64_t TotalDelivered() const;

    std::uint64_t macDrops{0};
    std::uint64_t collisions{0};
    std::uint64_t bufferDrops{0};
    std::uint64_t rejectedAuth{0};
    std::uint64_t admissionRejects{0};
    std::uint64_t recoveryStarted{0};
    std::uint64_t recoveryCompleted{0};
    std::uint64_t recoveryFailed{0};

  private:
    std::vector<FlowRecord> m_flows;
    std::map<std::pair<NodeId, GroupId>, std::uint32_t> m_flowIndex;
    std::map<std::pair<NodeId, std::uint32_t>, DeliveryRecord> m_deliveries;
    std::vector<std::uint64_t> m_rreqTx;
    std::array<std::uint64_t, kPacketKindCount> m_txByKind{};
    std::array<std::uint64_t, kPacketKindCount> m_bitsByKind{};
};

/// Delivered over sent times receiver count; NaN when nothing was sent.
double Pdr(const MetricsLedger& ledger);

/// Mean first-arrival delay in seconds; NaN without deliveries.
double AvgDelay(const MetricsLedger& ledger);

/// RREQ transmissions per node.
double RreqLoad(const MetricsLedger& ledger, std::size_t nodeCount);

} // namespace meshsim
