#pragma once

#include "meshsim/engine.hpp"
#include "meshsim/metrics.hpp"
#include "meshsim/mobility.hpp"
#include "meshsim/random.hpp"
#include "meshsim/trace.hpp"
#include "meshsim/wire.hpp"

#include <deque>
#include <memory>
#include <set>
#include <utility>
#include <vector>

namespace meshsim
{

enum class ChannelModel : std::uint8_t
{
    Ideal,
    Csma,
};

const char* ChannelModelName(ChannelModel model);

struct RadioParams
{
    double range{250.0};
    double capacity{2e6};
    std::uint32_t headerBytes{48};
    double propDelay{0.0};
};

struct MacParams
{
    ChannelModel model{ChannelModel::Csma};
    std::size_t queueCapacity{64};
    double slot{20e-6};
    double difs{50e-6};
    std::uint32_t contentionWindow{31};
};

/// Bits on the air: MAC/IP header plus the application payload for data, or
/// the serialized field layout for control packets.
std::uint64_t FrameBits(const Packet& packet, const RadioParams& radio);

double Airtime(const Packet& packet, const RadioParams& radio);

/// Unit-disk connectivity; the boundary distance counts as in range.
inline bool
WithinRange(const Vec2& a, const Vec2& b, double range)
{
    return Distance(a, b) <= range;
}

/**
 * Shared broadcast medium.
 *
 * Every node owns a FIFO transmit queue and has at most one frame on the air.
 * Under the ideal model frames start as soon as the sender is free and are
 * never lost. Under the csma model a sender waits DIFS plus a random backoff,
 * defers while any in-range node is airborne, and a receiver that is covered
 * by two overlapping frames (or transmits itself) loses all of them.
 */
class Medium
{
  public:
    Medium(RadioParams radio,
           MacParams mac,
           const MobilityModel& mobility,
           Scheduler& scheduler,
           Rng& rng,
           MetricsLedger& metrics);

    void SetTrace(Trace* trace)
    {
        m_trace = trace;
    }

    const RadioParams& Radio() const
    {
        return m_radio;
    }

    const MacParams& Mac() const
    {
        return m_mac;
    }

    bool Linked(NodeId a, NodeId b, SimTime t) const;

    std::vector<NodeId> NeighborsOf(NodeId node, SimTime t) const;

    /// Administrative link state, used to script link failures.
    void SetLinkDown(NodeId a, NodeId b, bool down);

    /// Queues a broadcast frame. Returns false when the queue was full and the
    /// frame was dropped.
    bool Broadcast(NodeId sender, Packet packet);

    /// Handles MacAttempt and MacTxEnd timers.
    void OnTimer(const TimerExpiry& timer);

    /// Resolves a delivery event; true if the frame arrived intact.
    bool OnDelivery(const PacketDelivery& delivery);

    std::size_t QueueLength(NodeId node) const
    {
        return m_nodes[node].queue.size();
    }

    bool Airborne(NodeId node, SimTime t) const
    {
        return m_nodes[node].airborneUntil > t;
    }

  private:
    struct NodeMac
    {
        std::deque<std::shared_ptr<const Packet>> queue;
        bool accessPending{false};
        SimTime airborneUntil{-1.0};
    };

    struct Reception
    {
        std::uint64_t id{0};
        SimTime end{0.0};
        bool corrupted{false};
    };

    struct AirborneFrame
    {
        NodeId sender{kNoNode};
        SimTime end{0.0};
    };

    const std::vector<Vec2>& PositionsAt(SimTime t) const;
    void StartAccess(NodeId sender);
    void Attempt(NodeId sender);
    void Transmit(NodeId sender);
    double Backoff();

    RadioParams m_radio;
    MacParams m_mac;
    const MobilityModel& m_mobility;
    Scheduler& m_scheduler;
    Rng& m_rng;
    MetricsLedger& m_metrics;
    Trace* m_trace{nullptr};

    std::vector<NodeMac> m_nodes;
    std::vector<std::vector<Reception>> m_receiving;
    std::vector<AirborneFrame> m_airborne;
    std::set<std::pair<NodeId, NodeId>> m_downLinks;
    std::uint64_t m_nextReception{0};

    mutable SimTime m_cachedAt{-1.0};
    mutable std::vector<Vec2> m_cachedPositions;
};

} // namespace meshsim
