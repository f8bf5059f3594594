#include "meshsim/recovery.hpp"

#include <algorithm>

namespace meshsim
{

namespace
{

// Timer args pack the group with the recovery instance it belongs to.
std::uint64_t
PackArg(GroupId group, std::uint32_t instance)
{
    return (std::uint64_t{group} << 32) | instance;
}

GroupId
ArgGroup(std::uint64_t arg)
{
    return static_cast<GroupId>(arg >> 32);
}

std::uint32_t
ArgInstance(std::uint64_t arg)
{
    return static_cast<std::uint32_t>(arg & 0xffffffffu);
}

constexpr std::size_t kConfirmedMemory = 64;

bool
SamePacket(const DataPacket& a, const DataPacket& b)
{
    return a.source == b.source && a.group == b.group && a.flowSeq == b.flowSeq;
}

} // namespace

bool
DownstreamChain::Contains(NodeId node) const
{
    return std::find(chain.begin(), chain.end(), node) != chain.end();
}

RecoveryManager::RecoveryManager(NodeId self, RecoveryParams params, RecoveryHost& host)
    : m_self(self),
      m_params(params),
      m_host(host)
{
}

void
RecoveryManager::SetChain(GroupId group, std::vector<NodeId> chain)
{
    m_chains[group] = DownstreamChain{group, std::move(chain)};
}

const DownstreamChain*
RecoveryManager::ChainFor(GroupId group) const
{
    auto it = m_chains.find(group);
    return it == m_chains.end() ? nullptr : &it->second;
}

void
RecoveryManager::WatchForwarding(const DataPacket& data, NodeId receivedFrom)
{
    const DownstreamChain* chain = ChainFor(data.group);
    if (chain == nullptr || !chain->HasDownstreamForwarder())
    {
        return;
    }
    // Already heard from downstream before we forwarded: nothing to wait for.
    if (chain->Contains(receivedFrom))
    {
        return;
    }
    const auto& confirmed = m_confirmed[data.group];
    if (std::find(confirmed.begin(), confirmed.end(), std::pair{data.source, data.flowSeq}) !=
        confirmed.end())
    {
        return;
    }
    GroupWatch& watch = m_watch[data.group];
    watch.pending.push_back(Watched{data, m_host.Now() + m_params.detectTimeout});
    if (!watch.armed)
    {
        ArmWatch(data.group);
    }
}

void
RecoveryManager::ArmWatch(GroupId group)
{
    GroupWatch& watch = m_watch[group];
    if (watch.pending.empty())
    {
        watch.armed = false;
        return;
    }
    watch.armed = true;
    const SimTime delay = std::max(0.0, watch.pending.front().deadline - m_host.Now());
    m_host.StartTimer(TimerKind::RecoveryWatch, PackArg(group, 0), delay);
}

void
RecoveryManager::OnOverheard(const DataPacket& data, NodeId transmitter)
{
    const DownstreamChain* chain = ChainFor(data.group);
    if (chain == nullptr || !chain->Contains(transmitter))
    {
        return;
    }
    auto& confirmed = m_confirmed[data.group];
    confirmed.emplace_back(data.source, data.flowSeq);
    if (confirmed.size() > kConfirmedMemory)
    {
        confirmed.pop_front();
    }
    auto it = m_watch.find(data.group);
    if (it == m_watch.end())
    {
        return;
    }
    auto& pending = it->second.pending;
    pending.erase(std::remove_if(pending.begin(), pending.end(),
                                 [&](const Watched& w) { return SamePacket(w.packet, data); }),
                  pending.end());
}

void
RecoveryManager::OnTimer(TimerKind kind, std::uint64_t arg)
{
    const GroupId group = ArgGroup(arg);
    if (kind == TimerKind::RecoveryWatch)
    {
        GroupWatch& watch = m_watch[group];
        watch.armed = false;
        const SimTime now = m_host.Now();
        if (!watch.pending.empty() && watch.pending.front().deadline <= now)
        {
            Detect(group);
        }
        if (!watch.armed)
        {
            ArmWatch(group);
        }
        return;
    }
    if (kind == TimerKind::RecoveryReply)
    {
        auto it = m_active.find(group);
        if (it == m_active.end() || it->second.instance != ArgInstance(arg))
        {
            return;
        }
        // No answer in time: the held packets are thrown away.
        m_host.Ledger().bufferDrops += it->second.buffer.size();
        ++m_host.Ledger().recoveryFailed;
        m_active.erase(it);
    }
}

void
RecoveryManager::Detect(GroupId group)
{
    GroupWatch& watch = m_watch[group];
    std::deque<Watched> unconfirmed;
    unconfirmed.swap(watch.pending);
    if (Recovering(group))
    {
        return;
    }
    InitiateRecovery(group);
    auto it = m_active.find(group);
    if (it == m_active.end())
    {
        return;
    }
    for (const Watched& w : unconfirmed)
    {
        PushBuffer(it->second, w.packet);
    }
}

void
RecoveryManager::InitiateRecovery(GroupId group)
{
    const DownstreamChain* chain = ChainFor(group);
    if (chain == nullptr || chain->chain.empty() || Recovering(group))
    {
        return;
    }
    RecoveryReq req;
    req.origin = m_self;
    req.group = group;
    req.instance = ++m_nextInstance;
    req.ttlHops = m_params.ttlHops;
    req.candidates = chain->chain;
    req.sessions = m_host.SessionsFor(group);
    m_seenRequests.insert({m_self, group, req.instance});

    ActiveRecovery active;
    active.instance = req.instance;
    active.deadline = m_host.Now() + m_params.replyTimeout;
    active.timer =
        m_host.StartTimer(TimerKind::RecoveryReply, PackArg(group, req.instance), m_params.replyTimeout);
    m_active.emplace(group, std::move(active));
    ++m_host.Ledger().recoveryStarted;
    m_host.Send(std::move(req));
}

void
RecoveryManager::PushBuffer(ActiveRecovery& active, const DataPacket& data)
{
    for (const DataPacket& held : active.buffer)
    {
        if (SamePacket(held, data))
        {
            return;
        }
    }
    if (active.buffer.size() >= m_params.bufferCapacity)
    {
        active.buffer.pop_front();
        ++m_host.Ledger().bufferDrops;
    }
    active.buffer.push_back(data);
}

void
RecoveryManager::Buffer(const DataPacket& data)
{
    auto it = m_active.find(data.group);
    if (it != m_active.end())
    {
        PushBuffer(it->second, data);
    }
}

void
RecoveryManager::ProcessRecoveryReq(const RecoveryReq& req, NodeId transmitter)
{
    if (req.origin == m_self)
    {
        return;
    }
    const RequestKey key{req.origin, req.group, req.instance};
    if (!m_seenRequests.insert(key).second)
    {
        return;
    }
    m_relayed[key] = RelayedRequest{transmitter, req.sessions, false};

    if (std::find(req.candidates.begin(), req.candidates.end(), m_self) != req.candidates.end())
    {
        RecoveryReply reply;
        reply.responder = m_self;
        reply.origin = req.origin;
        reply.group = req.group;
        reply.instance = req.instance;
        reply.pathBack.assign(req.relays.rbegin(), req.relays.rend());
        reply.nextHop = reply.pathBack.empty() ? req.origin : reply.pathBack.front();
        m_host.Send(std::move(reply));
        return;
    }
    if (req.ttlHops > 1)
    {
        RecoveryReq relay = req;
        relay.ttlHops = req.ttlHops - 1;
        relay.relays.push_back(m_self);
        m_host.Send(std::move(relay));
    }
}

void
RecoveryManager::ProcessRecoveryReply(const RecoveryReply& reply, NodeId /*transmitter*/)
{
    if (reply.nextHop != m_self)
    {
        return;
    }
    if (reply.origin == m_self)
    {
        CompleteRecovery(reply);
        return;
    }
    const RequestKey key{reply.origin, reply.group, reply.instance};
    auto it = m_relayed.find(key);
    if (it == m_relayed.end() || it->second.replyForwarded)
    {
        return;
    }
    auto self = std::find(reply.pathBack.begin(), reply.pathBack.end(), m_self);
    if (self == reply.pathBack.end())
    {
        return;
    }
    it->second.replyForwarded = true;
    // The relay bridging the gap becomes a forwarder for the repaired sessions.
    m_host.InstallPatch(reply.group, it->second.sessions, it->second.upstream);

    RecoveryReply next = reply;
    auto after = std::next(self);
    next.nextHop = after == reply.pathBack.end() ? reply.origin : *after;
    m_host.Send(std::move(next));
}

void
RecoveryManager::CompleteRecovery(const RecoveryReply& reply)
{
    auto it = m_active.find(reply.group);
    if (it == m_active.end() || it->second.instance != reply.instance ||
        m_host.Now() > it->second.deadline)
    {
        return;
    }
    m_host.CancelTimer(it->second.timer);
    std::deque<DataPacket> held;
    held.swap(it->second.buffer);
    m_active.erase(it);
    ++m_host.Ledger().recoveryCompleted;

    // The patch relays join the downstream chain so their rebroadcasts confirm
    // our forwards from now on.
    DownstreamChain& chain = m_chains[reply.group];
    chain.group = reply.group;
    for (NodeId relay : reply.pathBack)
    {
        if (!chain.Contains(relay))
        {
            chain.chain.push_back(relay);
        }
    }
    if (!chain.Contains(reply.responder))
    {
        chain.chain.push_back(reply.responder);
    }

    std::stable_sort(held.begin(), held.end(), [](const DataPacket& a, const DataPacket& b) {
        return std::tie(a.source, a.flowSeq) < std::tie(b.source, b.flowSeq);
    });
    for (const DataPacket& data : held)
    {
        m_host.Reforward(data);
        WatchForwarding(data, kNoNode);
    }
}

std::size_t
RecoveryManager::WatchCount(GroupId group) const
{
    auto it = m_watch.find(group);
    return it == m_watch.end() ? 0 : it->second.pending.size();
}

std::size_t
RecoveryManager::BufferedCount(GroupId group) const
{
    auto it = m_active.find(group);
    return it == m_active.end() ? 0 : it->second.buffer.size();
}

} // namespace meshsim
