#pragma once

#include "meshsim/engine.hpp"
#include "meshsim/metrics.hpp"
#include "meshsim/types.hpp"
#include "meshsim/wire.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

namespace meshsim
{

struct RecoveryParams
{
    bool enabled{true};
    double detectTimeout{1.0};
    double replyTimeout{0.1};
    std::uint32_t ttlHops{2};
    std::size_t bufferCapacity{32};
};

/// Nodes between this forwarding node and a receiver of the group, as
/// accumulated by the last reply: the receiver first, then forwarding nodes.
struct DownstreamChain
{
    GroupId group{0};
    std::vector<NodeId> chain;

    bool Contains(NodeId node) const;

    /// True when at least one forwarding node (besides the receiver) is known.
    bool HasDownstreamForwarder() const
    {
        return chain.size() >= 2;
    }
};

/// What the recovery logic needs from the node it runs on.
class RecoveryHost
{
  public:
    virtual ~RecoveryHost() = default;

    virtual SimTime Now() const = 0;
    virtual void Send(Packet packet) = 0;
    virtual EventHandle StartTimer(TimerKind kind, std::uint64_t arg, SimTime delay) = 0;
    virtual bool CancelTimer(EventHandle handle) = 0;
    virtual MetricsLedger& Ledger() = 0;

    /// Live registered/reserved sessions of the group at this node.
    virtual std::vector<Session> SessionsFor(GroupId group) const = 0;

    /// Makes this node a forwarder of the given sessions, bypassing admission.
    virtual void InstallPatch(GroupId group, const std::vector<Session>& sessions, NodeId upstream) = 0;

    /// Rebroadcasts a packet that was held back by recovery.
    virtual void Reforward(const DataPacket& data) = 0;
};

/**
 * Local route repair run by a forwarding node.
 *
 * After forwarding a data packet the node keeps a copy until it overhears a
 * downstream chain member forwarding the same packet. A copy that stays
 * unconfirmed for detectTimeout signals a break: the node floods a recovery
 * request ttlHops hops naming its downstream chain, holds data for the group
 * in a bounded buffer, and either patches the route through the relay that
 * answers within replyTimeout or drops the buffer.
 */
class RecoveryManager
{
  public:
    RecoveryManager(NodeId self, RecoveryParams params, RecoveryHost& host);

    const RecoveryParams& Params() const
    {
        return m_params;
    }

    void SetChain(GroupId group, std::vector<NodeId> chain);
    const DownstreamChain* ChainFor(GroupId group) const;

    bool Recovering(GroupId group) const
    {
        return m_active.count(group) != 0;
    }

    /// Called after the node rebroadcast `data`, which it first heard from
    /// `receivedFrom`.
    void WatchForwarding(const DataPacket& data, NodeId receivedFrom);

    /// Any reception of a data packet, duplicates included.
    void OnOverheard(const DataPacket& data, NodeId transmitter);

    /// Holds a packet that arrived while the group is being repaired.
    void Buffer(const DataPacket& data);

    void InitiateRecovery(GroupId group);
    void ProcessRecoveryReq(const RecoveryReq& req, NodeId transmitter);
    void ProcessRecoveryReply(const RecoveryReply& reply, NodeId transmitter);

    void OnTimer(TimerKind kind, std::uint64_t arg);

    std::size_t WatchCount(GroupId group) const;
    std::size_t BufferedCount(GroupId group) const;

  private:
    struct Watched
    {
        DataPacket packet;
        SimTime deadline{0.0};
    };

    struct GroupWatch
    {
        std::deque<Watched> pending;
        bool armed{false};
    };

    struct ActiveRecovery
    {
        std::uint32_t instance{0};
        SimTime deadline{0.0};
        EventHandle timer;
        std::deque<DataPacket> buffer;
    };

    struct RelayedRequest
    {
        NodeId upstream{kNoNode};
        std::vector<Session> sessions;
        bool replyForwarded{false};
    };

    using RequestKey = std::tuple<NodeId, GroupId, std::uint32_t>;

    void Detect(GroupId group);
    void CompleteRecovery(const RecoveryReply& reply);
    void PushBuffer(ActiveRecovery& active, const DataPacket& data);
    void ArmWatch(GroupId group);

    NodeId m_self;
    RecoveryParams m_params;
    RecoveryHost& m_host;
    std::uint32_t m_nextInstance{0};
    std::map<GroupId, DownstreamChain> m_chains;
    std::map<GroupId, GroupWatch> m_watch;
    std::map<GroupId, ActiveRecovery> m_active;
    // Recent (source, flowSeq) already heard from a chain member, so a forward
    // that happens after the downstream one is not mistaken for a break.
    std::map<GroupId, std::deque<std::pair<NodeId, std::uint32_t>>> m_confirmed;
    std::set<RequestKey> m_seenRequests;
    std::map<RequestKey, RelayedRequest> m_relayed;
};

} // namespace meshsim
