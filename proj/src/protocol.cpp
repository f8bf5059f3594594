#include "meshsim/protocol.hpp"

#include <algorithm>
#include <cmath>

namespace meshsim
{

BitRate
ProtocolParams::AdmissionCapacity() const
{
    return static_cast<BitRate>(std::llround(macEfficiency * capacity));
}

const char*
RouteStatusName(RouteStatus status)
{
    switch (status)
    {
    case RouteStatus::Explored:
        return "explored";
    case RouteStatus::Registered:
        return "registered";
    case RouteStatus::Reserved:
        return "reserved";
    }
    return "?";
}

bool
MulticastAgent::SeenWindow::Contains(std::uint32_t seq) const
{
    if (!any || seq > highest)
    {
        return false;
    }
    const std::uint32_t back = highest - seq;
    return back >= 64 || ((mask >> back) & 1u) != 0;
}

bool
MulticastAgent::SeenWindow::Insert(std::uint32_t seq)
{
    if (!any)
    {
        any = true;
        highest = seq;
        mask = 1;
        return true;
    }
    if (seq > highest)
    {
        const std::uint32_t shift = seq - highest;
        mask = shift >= 64 ? 0 : mask << shift;
        mask |= 1;
        highest = seq;
        return true;
    }
    const std::uint32_t back = highest - seq;
    if (back >= 64 || ((mask >> back) & 1u) != 0)
    {
        return false;
    }
    mask |= std::uint64_t{1} << back;
    return true;
}

MulticastAgent::MulticastAgent(NodeId self,
                               const ProtocolParams& params,
                               const RecoveryParams& recovery,
                               NodeServices& services)
    : m_self(self),
      m_params(params),
      m_services(services),
      m_recovery(self, recovery, *this),
      m_recoveryEnabled(params.variant == Variant::Proposed && recovery.enabled)
{
}

void
MulticastAgent::JoinGroup(GroupId group)
{
    m_groups.insert(group);
}

bool
MulticastAgent::IsMember(GroupId group) const
{
    return m_groups.count(group) != 0;
}

std::size_t
MulticastAgent::AddFlow(const FlowSpec& flow)
{
    m_flows.push_back(SourceState{flow});
    return m_flows.size() - 1;
}

void
MulticastAgent::Start(SimTime helloPhase)
{
    const SimTime now = m_services.Now();
    if (Proposed())
    {
        m_services.Schedule(now + helloPhase, PeriodicEmit{m_self, EmitKind::Hello});
    }
    m_services.Schedule(now + m_params.sweepInterval, TimerExpiry{m_self, TimerKind::Sweep, 0});
    SimTime first = kInfinity;
    for (const SourceState& flow : m_flows)
    {
        first = std::min(first, std::max(flow.spec.firstRreq, flow.spec.start));
    }
    if (std::isfinite(first))
    {
        ScheduleRreq(std::max(first, now));
    }
}

void
MulticastAgent::ScheduleRreq(SimTime at)
{
    m_rreqTimer = m_services.Schedule(at, PeriodicEmit{m_self, EmitKind::Rreq});
    m_nextRreqAt = at;
}

std::optional<SimTime>
MulticastAgent::NextRreqAt() const
{
    if (!std::isfinite(m_nextRreqAt))
    {
        return std::nullopt;
    }
    return m_nextRreqAt;
}

void
MulticastAgent::OnFrame(const Frame& frame)
{
    std::visit(
        [&](const auto& packet) {
            using T = std::decay_t<decltype(packet)>;
            if constexpr (std::is_same_v<T, Hello>)
            {
                if (Proposed())
                {
                    ProcessHello(packet);
                }
            }
            else if constexpr (std::is_same_v<T, Rreq>)
            {
                ProcessRreq(packet);
            }
            else if constexpr (std::is_same_v<T, Reply>)
            {
                ProcessReply(packet);
            }
            else if constexpr (std::is_same_v<T, DataPacket>)
            {
                ProcessData(packet, frame.transmitter);
            }
            else if constexpr (std::is_same_v<T, RecoveryReq>)
            {
                if (m_recoveryEnabled)
                {
                    m_recovery.ProcessRecoveryReq(packet, frame.transmitter);
                }
            }
            else if constexpr (std::is_same_v<T, RecoveryReply>)
            {
                if (m_recoveryEnabled)
                {
                    m_recovery.ProcessRecoveryReply(packet, frame.transmitter);
                }
            }
        },
        *frame.packet);
}

void
MulticastAgent::OnPeriodic(EmitKind kind)
{
    if (kind == EmitKind::Hello)
    {
        EmitHello();
        m_services.Schedule(m_services.Now() + m_params.helloInterval,
                            PeriodicEmit{m_self, EmitKind::Hello});
        return;
    }
    m_nextRreqAt = kInfinity;
    OriginateRreq();
}

void
MulticastAgent::OnTimer(TimerKind kind, std::uint64_t arg)
{
    if (kind == TimerKind::Sweep)
    {
        SweepTimers();
        m_services.Schedule(m_services.Now() + m_params.sweepInterval,
                            TimerExpiry{m_self, TimerKind::Sweep, 0});
        return;
    }
    if (kind == TimerKind::TriggeredHello)
    {
        m_helloPending = false;
        EmitHello();
        return;
    }
    if (kind == TimerKind::RecoveryWatch || kind == TimerKind::RecoveryReply)
    {
        m_recovery.OnTimer(kind, arg);
    }
}

// ---------------------------------------------------------------------------
// Neighborhood

bool
MulticastAgent::NeighborLive(const NeighborEntry& entry, SimTime now) const
{
    return now - entry.lastHeard <= 2.0 * m_params.helloInterval;
}

std::vector<NodeId>
MulticastAgent::LiveNeighborIds() const
{
    std::vector<NodeId> out;
    const SimTime now = m_services.Now();
    for (const auto& [id, entry] : m_neighbors)
    {
        if (NeighborLive(entry, now))
        {
            out.push_back(id);
        }
    }
    return out;
}

std::vector<NeighborInfo>
MulticastAgent::NeighborList() const
{
    std::vector<NeighborInfo> out;
    const SimTime now = m_services.Now();
    for (const auto& [id, entry] : m_neighbors)
    {
        if (NeighborLive(entry, now))
        {
            out.push_back(NeighborInfo{id, entry.coNeighbor});
        }
    }
    return out;
}

void
MulticastAgent::EmitHello()
{
    Send(Hello{m_self, AvailableBandwidth(), m_consumed});
}

void
MulticastAgent::ProcessHello(const Hello& hello)
{
    NeighborEntry& entry = m_neighbors[hello.origin];
    const bool grew = hello.consumedRate > entry.consumedRate;
    entry.neighbor = hello.origin;
    entry.bAvailable = hello.bAvailable;
    entry.consumedRate = hello.consumedRate;
    entry.lastHeard = m_services.Now();
    // Our advertised availability just shrank; pass it on one hop.
    if (grew)
    {
        RequestHello();
    }
}

BitRate
MulticastAgent::AvailableBandwidth() const
{
    const SimTime now = m_services.Now();
    BitRate used = m_consumed;
    for (const auto& [id, entry] : m_neighbors)
    {
        if (NeighborLive(entry, now))
        {
            used += entry.consumedRate;
        }
    }
    return std::max<BitRate>(0, m_params.AdmissionCapacity() - used);
}

std::uint32_t
MulticastAgent::CountPending(std::span<const NodeId> pending, NodeId around) const
{
    // Reservations made earlier in the same reply walk that `around` does not
    // know about yet: nodes in its closed neighborhood. Without a neighbor list
    // for `around`, every pending node is assumed to be adjacent.
    const NeighborEntry* entry = nullptr;
    if (around != m_self)
    {
        auto it = m_neighbors.find(around);
        entry = it == m_neighbors.end() ? nullptr : &it->second;
    }
    std::uint32_t count = 0;
    for (NodeId p : pending)
    {
        if (p == around)
        {
            ++count;
        }
        else if (around == m_self)
        {
            auto it = m_neighbors.find(p);
            count += (it != m_neighbors.end() && NeighborLive(it->second, m_services.Now())) ? 1 : 0;
        }
        else if (entry == nullptr || !entry->neighborIdsKnown ||
                 std::find(entry->neighborIds.begin(), entry->neighborIds.end(), p) !=
                     entry->neighborIds.end())
        {
            ++count;
        }
    }
    return count;
}

Admission
MulticastAgent::AdmissionCheck(BitRate bReq, std::span<const NodeId> pending) const
{
    const SimTime now = m_services.Now();
    const BitRate selfAvailable =
        AvailableBandwidth() - static_cast<BitRate>(CountPending(pending, m_self)) * bReq;
    if (selfAvailable < bReq)
    {
        return Admission{AdmissionVerdict::RejectSelf, kNoNode};
    }
    for (const auto& [id, entry] : m_neighbors)
    {
        if (!NeighborLive(entry, now))
        {
            continue;
        }
        const BitRate announced =
            entry.bAvailable - static_cast<BitRate>(CountPending(pending, id)) * bReq;
        if (announced < bReq)
        {
            return Admission{AdmissionVerdict::RejectNeighbor, id};
        }
    }
    return Admission{};
}

// ---------------------------------------------------------------------------
// Route table

double
MulticastAgent::Lifetime(RouteStatus status) const
{
    switch (status)
    {
    case RouteStatus::Explored:
        return m_params.tExplored;
    case RouteStatus::Registered:
        return m_params.tRegistered;
    case RouteStatus::Reserved:
        return m_params.tReserved;
    }
    return 0.0;
}

bool
MulticastAgent::EntryLive(const RouteEntry& entry, SimTime now) const
{
    return now - entry.statusSince <= Lifetime(entry.status);
}

void
MulticastAgent::Evict(std::map<Key, RouteEntry>::iterator it)
{
    if (it->second.status != RouteStatus::Explored)
    {
        m_consumed -= it->second.bReq;
    }
    m_routes.erase(it);
}

RouteEntry*
MulticastAgent::LiveEntry(const Key& key)
{
    auto it = m_routes.find(key);
    if (it == m_routes.end())
    {
        return nullptr;
    }
    if (!EntryLive(it->second, m_services.Now()))
    {
        Evict(it);
        return nullptr;
    }
    return &it->second;
}

std::optional<RouteEntry>
MulticastAgent::Route(NodeId source, GroupId group) const
{
    auto it = m_routes.find({source, group});
    if (it == m_routes.end() || !EntryLive(it->second, m_services.Now()))
    {
        return std::nullopt;
    }
    return it->second;
}

void
MulticastAgent::SetStatus(RouteEntry& entry, RouteStatus status)
{
    if (status < entry.status)
    {
        ++m_audit.statusRegressions;
    }
    const bool reserve = entry.status == RouteStatus::Explored && status != RouteStatus::Explored;
    if (reserve)
    {
        m_consumed += entry.bReq;
    }
    entry.status = status;
    entry.statusSince = m_services.Now();
    if (reserve)
    {
        AnnounceReservation();
    }
}

bool
MulticastAgent::HoldsReservation(const Key& key)
{
    const RouteEntry* entry = LiveEntry(key);
    return entry != nullptr && entry->status != RouteStatus::Explored;
}

bool
MulticastAgent::IsForwarder(GroupId group) const
{
    auto it = m_fgFlags.find(group);
    return it != m_fgFlags.end() && it->second.expiresAt >= m_services.Now();
}

BitRate
MulticastAgent::RecomputedConsumption() const
{
    BitRate total = 0;
    for (const auto& [key, entry] : m_routes)
    {
        if (entry.status != RouteStatus::Explored)
        {
            total += entry.bReq;
        }
    }
    for (const SourceState& flow : m_flows)
    {
        if (flow.consuming)
        {
            total += flow.spec.bReq;
        }
    }
    return total;
}

void
MulticastAgent::StartConsuming(SourceState& flow)
{
    if (!flow.consuming)
    {
        flow.consuming = true;
        m_consumed += flow.spec.bReq;
        AnnounceReservation();
    }
}

void
MulticastAgent::AnnounceReservation()
{
    if (Proposed())
    {
        RequestHello();
    }
}

void
MulticastAgent::RequestHello()
{
    if (m_helloPending)
    {
        return;
    }
    m_helloPending = true;
    m_services.Schedule(m_services.Now() + m_params.helloHoldoff, TimerExpiry{m_self, TimerKind::TriggeredHello, 0});
}

void
MulticastAgent::StopConsuming(SourceState& flow)
{
    if (flow.consuming)
    {
        flow.consuming = false;
        m_consumed -= flow.spec.bReq;
    }
}

void
MulticastAgent::SweepTimers()
{
    const SimTime now = m_services.Now();
    for (auto it = m_routes.begin(); it != m_routes.end();)
    {
        auto next = std::next(it);
        if (!EntryLive(it->second, now))
        {
            Evict(it);
        }
        it = next;
    }
    std::erase_if(m_fgFlags, [now](const auto& kv) { return kv.second.expiresAt < now; });
    std::erase_if(m_neighbors, [&](const auto& kv) { return !NeighborLive(kv.second, now); });
    for (SourceState& flow : m_flows)
    {
        const bool lapsed = Proposed() && now > flow.admittedUntil;
        if (flow.consuming && (now >= flow.spec.stop || lapsed))
        {
            StopConsuming(flow);
        }
    }
}

// ---------------------------------------------------------------------------
// Discovery

std::vector<SourceRow>
MulticastAgent::OwnRows(SimTime now, SimTime horizon)
{
    std::vector<SourceRow> rows;
    for (SourceState& flow : m_flows)
    {
        if (flow.spec.start <= horizon && now < flow.spec.stop)
        {
            SourceRow row;
            row.source = m_self;
            row.group = flow.spec.group;
            row.seq = ++flow.seq;
            row.bReq = flow.spec.bReq;
            row.maxDelay = flow.spec.maxDelay;
            row.hopCount = 0;
            m_seenRows[{m_self, row.group}] = row.seq;
            rows.push_back(row);
        }
    }
    return rows;
}

void
MulticastAgent::OriginateRreq()
{
    const SimTime now = m_services.Now();
    std::vector<SourceRow> rows = OwnRows(now, now);
    if (rows.empty())
    {
        SimTime next = kInfinity;
        for (const SourceState& flow : m_flows)
        {
            if (flow.spec.start > now)
            {
                next = std::min(next, flow.spec.start);
            }
        }
        if (std::isfinite(next))
        {
            ScheduleRreq(next);
        }
        return;
    }
    Rreq rreq;
    rreq.rows = std::move(rows);
    rreq.relay = m_self;
    if (Proposed())
    {
        rreq.relayNeighbors = NeighborList();
    }
    for (const SourceRow& row : rreq.rows)
    {
        RecordRebroadcast(row);
    }
    Send(std::move(rreq));
    ScheduleRreq(now + m_params.rreqInterval);
}

bool
MulticastAgent::MaybeConsolidate(Rreq& outgoing)
{
    if (m_params.variant == Variant::Odmrp || !std::isfinite(m_nextRreqAt))
    {
        return false;
    }
    const SimTime now = m_services.Now();
    if (m_nextRreqAt - now > m_params.timeInterval)
    {
        return false;
    }
    // Flows starting by the scheduled round ride along as well.
    std::vector<SourceRow> rows = OwnRows(now, m_nextRreqAt);
    if (rows.empty())
    {
        return false;
    }
    m_services.Cancel(m_rreqTimer);
    for (const SourceRow& row : rows)
    {
        RecordRebroadcast(row);
        outgoing.rows.push_back(row);
    }
    ScheduleRreq(now + m_params.rreqInterval);
    return true;
}

void
MulticastAgent::ProcessRreq(const Rreq& rreq)
{
    const SimTime now = m_services.Now();
    if (Proposed())
    {
        auto relay = m_neighbors.find(rreq.relay);
        if (relay != m_neighbors.end())
        {
            std::uint32_t common = 0;
            relay->second.neighborIds.clear();
            for (const NeighborInfo& info : rreq.relayNeighbors)
            {
                relay->second.neighborIds.push_back(info.id);
                auto mine = m_neighbors.find(info.id);
                if (mine != m_neighbors.end() && NeighborLive(mine->second, now))
                {
                    ++common;
                }
            }
            relay->second.neighborIdsKnown = true;
            relay->second.coNeighbor = common;
        }
    }

    std::vector<SourceRow> survivors;
    for (const SourceRow& row : rreq.rows)
    {
        if (row.source == m_self)
        {
            continue;
        }
        const Key key{row.source, row.group};
        auto seen = m_seenRows.find(key);
        if (seen != m_seenRows.end() && seen->second >= row.seq)
        {
            continue;
        }
        m_seenRows[key] = row.seq;

        if (Proposed())
        {
            const double hops = static_cast<double>(row.hopCount) + 1.0;
            if (hops * m_params.perHopDelay > row.maxDelay)
            {
                continue;
            }
            if (!HoldsReservation(key) && !AdmissionCheck(row.bReq).Admitted())
            {
                ++m_services.Ledger().admissionRejects;
                continue;
            }
        }

        RouteEntry* entry = LiveEntry(key);
        if (entry == nullptr || entry->status == RouteStatus::Explored)
        {
            if (entry != nullptr)
            {
                m_routes.erase(key);
            }
            RouteEntry fresh;
            fresh.source = row.source;
            fresh.group = row.group;
            fresh.seq = row.seq;
            fresh.upstream = rreq.relay;
            fresh.status = RouteStatus::Explored;
            fresh.statusSince = now;
            fresh.bReq = row.bReq;
            m_routes[key] = fresh;
        }
        else
        {
            // Already on the mesh: follow the new round without giving up
            // the reservation.
            entry->seq = row.seq;
            entry->upstream = rreq.relay;
        }
        survivors.push_back(row);
    }
    if (survivors.empty())
    {
        return;
    }

    Reply reply;
    for (const SourceRow& row : survivors)
    {
        if (IsMember(row.group))
        {
            reply.entries.push_back(ReplyEntry{row.source, row.group, row.seq, rreq.relay});
        }
    }
    if (!reply.entries.empty())
    {
        reply.origin = m_self;
        reply.fgChain = {m_self};
        Send(std::move(reply));
    }

    Rreq out;
    out.relay = m_self;
    for (SourceRow row : survivors)
    {
        ++row.hopCount;
        RecordRebroadcast(row);
        out.rows.push_back(row);
    }
    if (Proposed())
    {
        out.relayNeighbors = NeighborList();
    }
    MaybeConsolidate(out);
    Send(std::move(out));
}

void
MulticastAgent::ProcessReply(const Reply& reply)
{
    const SimTime now = m_services.Now();
    std::vector<ReplyEntry> upstream;
    std::set<GroupId> groups;
    for (const ReplyEntry& e : reply.entries)
    {
        if (e.nextNode != m_self)
        {
            continue;
        }
        if (e.source == m_self)
        {
            for (SourceState& flow : m_flows)
            {
                if (flow.spec.group != e.group || now >= flow.spec.stop)
                {
                    continue;
                }
                if (Proposed())
                {
                    if (!flow.consuming)
                    {
                        if (!AdmissionCheck(flow.spec.bReq, reply.fgChain).Admitted())
                        {
                            ++m_services.Ledger().admissionRejects;
                            continue;
                        }
                        StartConsuming(flow);
                    }
                    flow.admittedUntil = now + m_params.fgTimeout;
                }
                else
                {
                    StartConsuming(flow);
                }
                flow.everRouted = true;
            }
            continue;
        }

        const Key key{e.source, e.group};
        RouteEntry* entry = LiveEntry(key);
        if (entry == nullptr || entry->seq != e.seq)
        {
            continue;
        }
        if (entry->status == RouteStatus::Explored)
        {
            if (Proposed() && !AdmissionCheck(entry->bReq, reply.fgChain).Admitted())
            {
                ++m_services.Ledger().admissionRejects;
                continue;
            }
            SetStatus(*entry, RouteStatus::Registered);
        }
        else if (entry->status == RouteStatus::Registered)
        {
            entry->statusSince = now;
        }
        m_fgFlags[e.group] = FgFlag{e.group, now + m_params.fgTimeout};
        if (entry->repliedSeq == e.seq)
        {
            continue;
        }
        entry->repliedSeq = e.seq;
        upstream.push_back(ReplyEntry{e.source, e.group, e.seq, entry->upstream});
        groups.insert(e.group);
    }
    if (upstream.empty())
    {
        return;
    }
    for (GroupId group : groups)
    {
        m_recovery.SetChain(group, reply.fgChain);
    }
    Reply out;
    out.entries = std::move(upstream);
    out.origin = reply.origin;
    out.fgChain = reply.fgChain;
    if (std::find(out.fgChain.begin(), out.fgChain.end(), m_self) == out.fgChain.end())
    {
        out.fgChain.push_back(m_self);
    }
    Send(std::move(out));
}

// ---------------------------------------------------------------------------
// Data

bool
MulticastAgent::FlowUsable(std::size_t localFlow) const
{
    const SourceState& flow = m_flows.at(localFlow);
    if (Proposed())
    {
        return flow.consuming && m_services.Now() <= flow.admittedUntil;
    }
    return flow.everRouted;
}

void
MulticastAgent::OnTrafficTick(std::size_t localFlow)
{
    SourceState& flow = m_flows.at(localFlow);
    const SimTime now = m_services.Now();
    if (now >= flow.spec.stop)
    {
        return;
    }
    if (!FlowUsable(localFlow))
    {
        m_services.Ledger().RecordBlocked(flow.spec.id);
        return;
    }
    DataPacket data;
    data.source = m_self;
    data.group = flow.spec.group;
    data.flowSeq = flow.nextFlowSeq++;
    data.payloadBytes = flow.spec.payloadBytes;
    data.sentAt = now;
    m_services.Ledger().RecordSent(flow.spec.id);
    m_forwarded[{m_self, data.group}].Insert(data.flowSeq);
    Send(data);
}

void
MulticastAgent::BroadcastData(const DataPacket& data)
{
    RouteEntry* entry = LiveEntry({data.source, data.group});
    if (entry != nullptr && entry->status != RouteStatus::Explored)
    {
        SetStatus(*entry, RouteStatus::Reserved);
    }
    Send(data);
}

void
MulticastAgent::ProcessData(const DataPacket& data, NodeId transmitter)
{
    if (data.source == m_self)
    {
        return;
    }
    const SimTime now = m_services.Now();
    const Key key{data.source, data.group};
    if (m_recoveryEnabled)
    {
        m_recovery.OnOverheard(data, transmitter);
    }
    if (IsMember(data.group) && m_delivered[key].Insert(data.flowSeq))
    {
        MetricsLedger& ledger = m_services.Ledger();
        if (auto flow = ledger.FlowIndex(data.source, data.group))
        {
            ledger.RecordDelivery(m_self, *flow, now - data.sentAt);
        }
    }

    if (!IsForwarder(data.group) || !HoldsReservation(key))
    {
        return;
    }
    if (!m_forwarded[key].Insert(data.flowSeq))
    {
        return;
    }
    if (m_recoveryEnabled && m_recovery.Recovering(data.group))
    {
        m_recovery.Buffer(data);
        return;
    }
    RecordDataRebroadcast(data);
    BroadcastData(data);
    if (m_recoveryEnabled)
    {
        m_recovery.WatchForwarding(data, transmitter);
    }
}

void
MulticastAgent::RecordRebroadcast(const SourceRow& row)
{
    if (m_auditEnabled && !m_rebroadcastRows.insert({row.source, row.group, row.seq}).second)
    {
        ++m_audit.duplicateRebroadcasts;
    }
}

void
MulticastAgent::RecordDataRebroadcast(const DataPacket& data)
{
    if (m_auditEnabled && !m_rebroadcastData.insert({data.source, data.group, data.flowSeq}).second)
    {
        ++m_audit.duplicateRebroadcasts;
    }
}

// ---------------------------------------------------------------------------
// RecoveryHost

SimTime
MulticastAgent::Now() const
{
    return m_services.Now();
}

void
MulticastAgent::Send(Packet packet)
{
    m_services.Broadcast(m_self, std::move(packet));
}

EventHandle
MulticastAgent::StartTimer(TimerKind kind, std::uint64_t arg, SimTime delay)
{
    return m_services.Schedule(m_services.Now() + delay, TimerExpiry{m_self, kind, arg});
}

bool
MulticastAgent::CancelTimer(EventHandle handle)
{
    return m_services.Cancel(handle);
}

MetricsLedger&
MulticastAgent::Ledger()
{
    return m_services.Ledger();
}

std::vector<Session>
MulticastAgent::SessionsFor(GroupId group) const
{
    std::vector<Session> out;
    const SimTime now = m_services.Now();
    for (const auto& [key, entry] : m_routes)
    {
        if (key.second == group && entry.status != RouteStatus::Explored && EntryLive(entry, now))
        {
            out.push_back(Session{entry.source, entry.bReq});
        }
    }
    return out;
}

void
MulticastAgent::InstallPatch(GroupId group, const std::vector<Session>& sessions, NodeId upstream)
{
    const SimTime now = m_services.Now();
    m_fgFlags[group] = FgFlag{group, now + m_params.fgTimeout};
    for (const Session& session : sessions)
    {
        const Key key{session.source, group};
        RouteEntry* entry = LiveEntry(key);
        if (entry == nullptr)
        {
            RouteEntry fresh;
            fresh.source = session.source;
            fresh.group = group;
            auto seen = m_seenRows.find(key);
            fresh.seq = seen == m_seenRows.end() ? 0 : seen->second;
            fresh.upstream = upstream;
            fresh.status = RouteStatus::Explored;
            fresh.bReq = session.bReq;
            entry = &(m_routes[key] = fresh);
        }
        if (entry->status == RouteStatus::Explored)
        {
            entry->bReq = session.bReq;
            entry->upstream = upstream;
            SetStatus(*entry, RouteStatus::Registered);
        }
    }
}

void
MulticastAgent::Reforward(const DataPacket& data)
{
    BroadcastData(data);
}

} // namespace meshsim
