#include "meshsim/medium.hpp"

#include <algorithm>

namespace meshsim
{

const char*
ChannelModelName(ChannelModel model)
{
    return model == ChannelModel::Ideal ? "ideal" : "csma";
}

std::uint64_t
FrameBits(const Packet& packet, const RadioParams& radio)
{
    const std::uint64_t header = std::uint64_t{radio.headerBytes} * 8;
    if (const auto* data = std::get_if<DataPacket>(&packet))
    {
        return header + std::uint64_t{data->payloadBytes} * 8;
    }
    return header + SerializedSize(packet);
}

double
Airtime(const Packet& packet, const RadioParams& radio)
{
    return static_cast<double>(FrameBits(packet, radio)) / radio.capacity;
}

Medium::Medium(RadioParams radio,
               MacParams mac,
               const MobilityModel& mobility,
               Scheduler& scheduler,
               Rng& rng,
               MetricsLedger& metrics)
    : m_radio(radio),
      m_mac(mac),
      m_mobility(mobility),
      m_scheduler(scheduler),
      m_rng(rng),
      m_metrics(metrics),
      m_nodes(mobility.NodeCount()),
      m_receiving(mobility.NodeCount())
{
}

const std::vector<Vec2>&
Medium::PositionsAt(SimTime t) const
{
    if (t != m_cachedAt || m_cachedPositions.size() != m_nodes.size())
    {
        m_cachedPositions.resize(m_nodes.size());
        for (NodeId n = 0; n < m_nodes.size(); ++n)
        {
            m_cachedPositions[n] = m_mobility.PositionOf(n, t);
        }
        m_cachedAt = t;
    }
    return m_cachedPositions;
}

bool
Medium::Linked(NodeId a, NodeId b, SimTime t) const
{
    if (a == b)
    {
        return false;
    }
    if (!m_downLinks.empty() && m_downLinks.count(std::minmax(a, b)) != 0)
    {
        return false;
    }
    const auto& pos = PositionsAt(t);
    return WithinRange(pos[a], pos[b], m_radio.range);
}

std::vector<NodeId>
Medium::NeighborsOf(NodeId node, SimTime t) const
{
    std::vector<NodeId> out;
    for (NodeId n = 0; n < m_nodes.size(); ++n)
    {
        if (Linked(node, n, t))
        {
            out.push_back(n);
        }
    }
    return out;
}

void
Medium::SetLinkDown(NodeId a, NodeId b, bool down)
{
    if (down)
    {
        m_downLinks.insert(std::minmax(a, b));
    }
    else
    {
        m_downLinks.erase(std::minmax(a, b));
    }
}

bool
Medium::Broadcast(NodeId sender, Packet packet)
{
    NodeMac& mac = m_nodes[sender];
    if (mac.queue.size() >= m_mac.queueCapacity)
    {
        ++m_metrics.macDrops;
        if (m_trace != nullptr)
        {
            m_trace->Packet(m_scheduler.Now(), sender, "qdrop", packet);
        }
        return false;
    }
    mac.queue.push_back(std::make_shared<const Packet>(std::move(packet)));
    if (!mac.accessPending)
    {
        StartAccess(sender);
    }
    return true;
}

double
Medium::Backoff()
{
    const auto slots = m_rng.Below(std::uint64_t{m_mac.contentionWindow} + 1);
    return m_mac.difs + static_cast<double>(slots) * m_mac.slot;
}

void
Medium::StartAccess(NodeId sender)
{
    m_nodes[sender].accessPending = true;
    if (m_mac.model == ChannelModel::Ideal)
    {
        Transmit(sender);
        return;
    }
    m_scheduler.Schedule(m_scheduler.Now() + Backoff(),
                         TimerExpiry{sender, TimerKind::MacAttempt, 0});
}

void
Medium::Attempt(NodeId sender)
{
    const SimTime now = m_scheduler.Now();
    SimTime busyUntil = now;
    std::erase_if(m_airborne, [now](const AirborneFrame& a) { return a.end <= now; });
    for (const AirborneFrame& a : m_airborne)
    {
        if (a.sender != sender && Linked(sender, a.sender, now))
        {
            busyUntil = std::max(busyUntil, a.end);
        }
    }
    if (busyUntil > now)
    {
        m_scheduler.Schedule(busyUntil + Backoff(), TimerExpiry{sender, TimerKind::MacAttempt, 0});
        return;
    }
    Transmit(sender);
}

void
Medium::Transmit(NodeId sender)
{
    NodeMac& mac = m_nodes[sender];
    auto packet = std::move(mac.queue.front());
    mac.queue.pop_front();

    const SimTime now = m_scheduler.Now();
    const std::uint64_t bits = FrameBits(*packet, m_radio);
    const SimTime end = now + static_cast<double>(bits) / m_radio.capacity;
    mac.airborneUntil = end;
    m_metrics.RecordTransmission(sender, *packet, bits);
    if (m_trace != nullptr)
    {
        m_trace->Packet(now, sender, "tx", *packet);
    }

    const bool lossy = m_mac.model == ChannelModel::Csma;
    if (lossy)
    {
        m_airborne.push_back(AirborneFrame{sender, end});
        // Half duplex: anything the sender was hearing is lost.
        for (Reception& r : m_receiving[sender])
        {
            if (r.end > now)
            {
                r.corrupted = true;
            }
        }
    }

    Frame frame{sender, packet};
    for (NodeId r : NeighborsOf(sender, now))
    {
        Reception rec{m_nextReception++, end, false};
        if (lossy)
        {
            auto& active = m_receiving[r];
            bool overlap = m_nodes[r].airborneUntil > now;
            for (Reception& other : active)
            {
                if (other.end > now)
                {
                    other.corrupted = true;
                    overlap = true;
                }
            }
            rec.corrupted = overlap;
            active.push_back(rec);
        }
        m_scheduler.Schedule(end + m_radio.propDelay, PacketDelivery{r, frame, rec.id});
    }
    m_scheduler.Schedule(end, TimerExpiry{sender, TimerKind::MacTxEnd, 0});
}

void
Medium::OnTimer(const TimerExpiry& timer)
{
    if (timer.timer == TimerKind::MacAttempt)
    {
        Attempt(timer.node);
        return;
    }
    if (timer.timer == TimerKind::MacTxEnd)
    {
        NodeMac& mac = m_nodes[timer.node];
        mac.accessPending = false;
        if (!mac.queue.empty())
        {
            StartAccess(timer.node);
        }
    }
}

bool
Medium::OnDelivery(const PacketDelivery& delivery)
{
    bool intact = true;
    if (m_mac.model == ChannelModel::Csma)
    {
        auto& active = m_receiving[delivery.node];
        auto it = std::find_if(active.begin(), active.end(),
                               [&](const Reception& r) { return r.id == delivery.reception; });
        if (it != active.end())
        {
            intact = !it->corrupted;
            active.erase(it);
        }
    }
    if (!intact)
    {
        ++m_metrics.collisions;
        if (m_trace != nullptr)
        {
            m_trace->Packet(m_scheduler.Now(), delivery.node, "collide", *delivery.frame.packet);
        }
        return false;
    }
    if (m_trace != nullptr)
    {
        m_trace->Packet(m_scheduler.Now(), delivery.node, "rx", *delivery.frame.packet);
    }
    return true;
}

} // namespace meshsim
