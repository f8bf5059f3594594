#pragma once

#include "meshsim/engine.hpp"
#include "meshsim/metrics.hpp"
#include "meshsim/recovery.hpp"
#include "meshsim/types.hpp"
#include "meshsim/wire.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

namespace meshsim
{

struct ProtocolParams
{
    Variant variant{Variant::Proposed};
    double helloInterval{3.0};
    double rreqInterval{3.0};
    double timeInterval{1.5};
    double tExplored{3.0};
    double tRegistered{3.0};
    double tReserved{6.0};
    double fgTimeout{9.0};
    double macEfficiency{0.8};
    double capacity{2e6};
    /// Nominal per-hop delay used by the RREQ delay filter.
    double perHopDelay{0.00224 + 0.001};
    double sweepInterval{0.5};
    /// Delay before a triggered Hello; increments in the meantime share it.
    double helloHoldoff{0.05};

    BitRate AdmissionCapacity() const;
};

struct NeighborEntry
{
    NodeId neighbor{kNoNode};
    BitRate bAvailable{0};
    BitRate consumedRate{0};
    std::uint32_t coNeighbor{0};
    SimTime lastHeard{0.0};
    /// The neighbor's own neighbor list, as last advertised in an RREQ it relayed.
    std::vector<NodeId> neighborIds;
    bool neighborIdsKnown{false};
};

enum class RouteStatus : std::uint8_t
{
    Explored,
    Registered,
    Reserved,
};

const char* RouteStatusName(RouteStatus status);

struct RouteEntry
{
    NodeId source{kNoNode};
    GroupId group{0};
    std::uint32_t seq{0};
    NodeId upstream{kNoNode};
    RouteStatus status{RouteStatus::Explored};
    SimTime statusSince{0.0};
    BitRate bReq{0};
    /// Round whose reply this node already passed upstream.
    std::optional<std::uint32_t> repliedSeq;
};

struct FgFlag
{
    GroupId group{0};
    SimTime expiresAt{0.0};
};

enum class AdmissionVerdict : std::uint8_t
{
    Admit,
    RejectSelf,
    RejectNeighbor,
};

struct Admission
{
    AdmissionVerdict verdict{AdmissionVerdict::Admit};
    NodeId failingNeighbor{kNoNode};

    bool Admitted() const
    {
        return verdict == AdmissionVerdict::Admit;
    }
};

/// A CBR flow originated by this node.
struct FlowSpec
{
    std::uint32_t id{0};
    NodeId source{kNoNode};
    GroupId group{0};
    double rate{4.0};
    BitRate bReq{0};
    double maxDelay{kInfinity};
    std::uint32_t payloadBytes{512};
    SimTime start{0.0};
    SimTime stop{0.0};
    /// First route request; start plus a small per-flow jitter.
    SimTime firstRreq{0.0};
};

/// Counters checked by the state-machine audit.
struct AuditCounters
{
    std::uint64_t statusRegressions{0};
    std::uint64_t duplicateRebroadcasts{0};
};

/// Everything an agent may ask of the simulated world.
class NodeServices
{
  public:
    virtual ~NodeServices() = default;

    virtual SimTime Now() const = 0;
    virtual void Broadcast(NodeId sender, Packet packet) = 0;
    virtual EventHandle Schedule(SimTime at, EventPayload payload) = 0;
    virtual bool Cancel(EventHandle handle) = 0;
    virtual MetricsLedger& Ledger() = 0;
};

/**
 * Per-node multicast routing state machine.
 *
 * Sources flood RREQs every rreqInterval; group members answer with Replies
 * that walk the reverse route and set the forwarding-group flag on every node
 * they pass. Data is rebroadcast by forwarding-group nodes holding a
 * registered or reserved route entry. The proposed variant adds Hello-based
 * neighbor tables, bandwidth admission control on RREQ and Reply, and local
 * recovery; cqmp and proposed consolidate RREQs at sources.
 */
class MulticastAgent : private RecoveryHost
{
  public:
    MulticastAgent(NodeId self,
                   const ProtocolParams& params,
                   const RecoveryParams& recovery,
                   NodeServices& services);

    MulticastAgent(const MulticastAgent&) = delete;
    MulticastAgent& operator=(const MulticastAgent&) = delete;

    NodeId Id() const
    {
        return m_self;
    }

    const ProtocolParams& Params() const
    {
        return m_params;
    }

    void JoinGroup(GroupId group);
    bool IsMember(GroupId group) const;

    /// Registers a flow sourced at this node; returns its local index.
    std::size_t AddFlow(const FlowSpec& flow);

    /// Schedules the first Hello (proposed only), the periodic sweep and the
    /// first RREQ at the earliest flow start.
    void Start(SimTime helloPhase);

    void EnableAudit(bool on)
    {
        m_auditEnabled = on;
    }

    // Event entry points.
    void OnFrame(const Frame& frame);
    void OnPeriodic(EmitKind kind);
    void OnTimer(TimerKind kind, std::uint64_t arg);
    void OnTrafficTick(std::size_t localFlow);

    // Neighborhood.
    void EmitHello();
    /// Triggered Hello after consumption grows.
    void AnnounceReservation();
    void RequestHello();
    void ProcessHello(const Hello& hello);
    BitRate AvailableBandwidth() const;
    Admission AdmissionCheck(BitRate bReq, std::span<const NodeId> pending = {}) const;

    // Discovery.
    void OriginateRreq();
    bool MaybeConsolidate(Rreq& outgoing);
    void ProcessRreq(const Rreq& rreq);
    void ProcessReply(const Reply& reply);

    // Forwarding.
    void ProcessData(const DataPacket& data, NodeId transmitter);

    void SweepTimers();

    // Inspection.
    BitRate ConsumedRate() const
    {
        return m_consumed;
    }

    /// Sum of b_req over live registered/reserved entries and consuming flows.
    BitRate RecomputedConsumption() const;

    const std::map<NodeId, NeighborEntry>& Neighbors() const
    {
        return m_neighbors;
    }

    std::vector<NodeId> LiveNeighborIds() const;
    std::optional<RouteEntry> Route(NodeId source, GroupId group) const;
    bool IsForwarder(GroupId group) const;
    std::optional<SimTime> NextRreqAt() const;
    const AuditCounters& Audit() const
    {
        return m_audit;
    }

    bool FlowUsable(std::size_t localFlow) const;

    const RecoveryManager& Recovery() const
    {
        return m_recovery;
    }

    bool RecoveryEnabled() const
    {
        return m_recoveryEnabled;
    }

  private:
    using Key = std::pair<NodeId, GroupId>;

    struct SourceState
    {
        FlowSpec spec;
        std::uint32_t seq{0};
        std::uint32_t nextFlowSeq{0};
        bool everRouted{false};
        bool consuming{false};
        SimTime admittedUntil{-kInfinity};
    };

    /// Sliding duplicate filter over the most recent 64 sequence numbers.
    struct SeenWindow
    {
        bool any{false};
        std::uint32_t highest{0};
        std::uint64_t mask{0};

        bool Contains(std::uint32_t seq) const;
        /// Returns false if seq was already present (or is too old to tell).
        bool Insert(std::uint32_t seq);
    };

    // RecoveryHost.
    SimTime Now() const override;
    void Send(Packet packet) override;
    EventHandle StartTimer(TimerKind kind, std::uint64_t arg, SimTime delay) override;
    bool CancelTimer(EventHandle handle) override;
    MetricsLedger& Ledger() override;
    std::vector<Session> SessionsFor(GroupId group) const override;
    void InstallPatch(GroupId group, const std::vector<Session>& sessions, NodeId upstream) override;
    void Reforward(const DataPacket& data) override;

    bool Proposed() const
    {
        return m_params.variant == Variant::Proposed;
    }

    bool NeighborLive(const NeighborEntry& entry, SimTime now) const;
    double Lifetime(RouteStatus status) const;
    bool EntryLive(const RouteEntry& entry, SimTime now) const;
    RouteEntry* LiveEntry(const Key& key);
    void Evict(std::map<Key, RouteEntry>::iterator it);
    void SetStatus(RouteEntry& entry, RouteStatus status);
    bool HoldsReservation(const Key& key);
    void StartConsuming(SourceState& flow);
    void StopConsuming(SourceState& flow);
    std::vector<SourceRow> OwnRows(SimTime now, SimTime horizon);
    std::vector<NeighborInfo> NeighborList() const;
    void ScheduleRreq(SimTime at);
    void RecordRebroadcast(const SourceRow& row);
    void RecordDataRebroadcast(const DataPacket& data);
    void BroadcastData(const DataPacket& data);
    std::uint32_t CountPending(std::span<const NodeId> pending, NodeId around) const;

    NodeId m_self;
    ProtocolParams m_params;
    NodeServices& m_services;
    RecoveryManager m_recovery;
    bool m_recoveryEnabled{false};

    std::set<GroupId> m_groups;
    std::vector<SourceState> m_flows;
    std::map<NodeId, NeighborEntry> m_neighbors;
    std::map<Key, RouteEntry> m_routes;
    std::map<GroupId, FgFlag> m_fgFlags;
    std::map<Key, std::uint32_t> m_seenRows;
    std::map<Key, SeenWindow> m_forwarded;
    std::map<Key, SeenWindow> m_delivered;
    BitRate m_consumed{0};

    EventHandle m_rreqTimer;
    SimTime m_nextRreqAt{kInfinity};

    bool m_auditEnabled{false};
    bool m_helloPending{false};
    AuditCounters m_audit;
    std::set<std::tuple<NodeId, GroupId, std::uint32_t>> m_rebroadcastRows;
    std::set<std::tuple<NodeId, GroupId, std::uint32_t>> m_rebroadcastData;
};

} // namespace meshsim
