#include "meshsim/simulation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace meshsim
{

namespace
{

std::string
Fixed(double v, int digits)
{
    if (std::isnan(v))
    {
        return "nan";
    }
    return fmt::format("{:.{}f}", v, digits);
}

/// First k entries of a seeded partial Fisher-Yates shuffle of 0..n-1.
std::vector<NodeId>
DrawDistinct(Rng& rng, std::uint32_t n, std::uint32_t k)
{
    std::vector<NodeId> ids(n);
    std::iota(ids.begin(), ids.end(), NodeId{0});
    k = std::min(k, n);
    for (std::uint32_t i = 0; i < k; ++i)
    {
        const auto j = i + static_cast<std::uint32_t>(rng.Below(n - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(k);
    return ids;
}

ProtocolParams
MakeProtocolParams(const Scenario& s)
{
    ProtocolParams p;
    p.variant = s.variant;
    p.helloInterval = s.helloInterval;
    p.rreqInterval = s.rreqInterval;
    p.timeInterval = s.timeInterval;
    p.tExplored = s.tExplored;
    p.tRegistered = s.tRegistered;
    p.tReserved = s.tReserved;
    p.fgTimeout = s.fgTimeout;
    p.macEfficiency = s.macEfficiency;
    p.capacity = s.capacity;
    const double dataBits = 8.0 * (static_cast<double>(s.payload) + static_cast<double>(s.headerBytes));
    p.perHopDelay = dataBits / s.capacity + 0.001;
    return p;
}

} // namespace

std::string
CsvRow::ToCsv() const
{
    std::string mesh = "na";
    if (meshFormed)
    {
        mesh = *meshFormed ? "true" : "false";
    }
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", seed, VariantName(variant), sources,
                       nodes, ChannelModelName(channelModel), Fixed(pdr, 6), Fixed(avgDelay, 9),
                       Fixed(rreqPerNode, 6), ctrlBits, dataSent, dataDelivered, macDrops, bufferDrops,
                       recoveryEvents, mesh, rejectedAuth);
}

Simulation::Simulation(Scenario scenario)
    : m_scenario(std::move(scenario)),
      m_protocol(MakeProtocolParams(m_scenario)),
      m_rng(m_scenario.seed),
      m_ledger(m_scenario.nodes)
{
    Validate(m_scenario);
    const Scenario& s = m_scenario;
    std::vector<Vec2> initial = InitialPositions();
    if (s.mobility == MobilityKind::Static)
    {
        m_mobility = MobilityModel::Static(std::move(initial));
    }
    else
    {
        m_mobility = MobilityModel::RandomWaypoint(std::move(initial), Area{s.areaWidth, s.areaHeight},
                                                   SpeedInterval{s.minSpeed, s.maxSpeed}, s.pause, m_rng);
    }

    RadioParams radio;
    radio.range = s.range;
    radio.capacity = s.capacity;
    radio.headerBytes = s.headerBytes;
    MacParams mac;
    mac.model = s.channelModel;
    mac.queueCapacity = s.queueCapacity;
    m_medium = std::make_unique<Medium>(radio, mac, m_mobility, m_scheduler, m_rng, m_ledger);

    for (NodeId n = 0; n < s.nodes; ++n)
    {
        m_agents.push_back(std::make_unique<MulticastAgent>(n, m_protocol, s.recovery, *this));
    }
    if (s.security.enabled)
    {
        m_auth = std::make_unique<Authenticator>(s.security.key);
        for (NodeId n = 0; n < s.nodes; ++n)
        {
            m_security.push_back(std::make_unique<SecurityAgent>(n, m_scenario.security, *m_auth, *this));
        }
    }

    ResolveTraffic();
    std::vector<double> helloPhases(s.nodes);
    for (double& phase : helloPhases)
    {
        phase = m_rng.Uniform01() * s.helloInterval;
    }
    ScheduleInitialEvents(helloPhases);
}

Simulation::~Simulation() = default;

std::vector<Vec2>
Simulation::InitialPositions()
{
    const Scenario& s = m_scenario;
    std::vector<Vec2> out(s.nodes);
    switch (s.placement)
    {
    case Placement::Random:
        for (Vec2& p : out)
        {
            p = UniformPoint(m_rng, Area{s.areaWidth, s.areaHeight});
        }
        break;
    case Placement::Line:
        for (NodeId n = 0; n < s.nodes; ++n)
        {
            out[n] = Vec2{n * s.spacing, 0.0};
        }
        break;
    case Placement::Grid: {
        const auto cols = s.gridColumns != 0
                              ? s.gridColumns
                              : static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(s.nodes))));
        for (NodeId n = 0; n < s.nodes; ++n)
        {
            out[n] = Vec2{(n % cols) * s.spacing, (n / cols) * s.spacing};
        }
        break;
    }
    case Placement::Explicit:
        out = s.positions;
        break;
    }
    return out;
}

void
Simulation::ResolveTraffic()
{
    const Scenario& s = m_scenario;
    std::vector<FlowConfig> flows = s.flows;
    if (flows.empty())
    {
        const std::vector<NodeId> sources = DrawDistinct(m_rng, s.nodes, s.sources);
        for (std::size_t i = 0; i < sources.size(); ++i)
        {
            flows.push_back(FlowConfig{.source = sources[i], .group = static_cast<GroupId>(i % s.groups)});
        }
    }
    GroupId groupCount = s.groups;
    for (const FlowConfig& f : flows)
    {
        groupCount = std::max<GroupId>(groupCount, f.group + 1);
    }
    if (!s.members.empty())
    {
        m_members = s.members;
        m_members.resize(std::max<std::size_t>(m_members.size(), groupCount));
    }
    else
    {
        m_members.resize(groupCount);
        for (auto& group : m_members)
        {
            group = DrawDistinct(m_rng, s.nodes, s.receivers);
        }
        // Sources double as receivers of every group.
        for (auto& group : m_members)
        {
            for (const FlowConfig& f : flows)
            {
                group.push_back(f.source);
            }
        }
    }
    for (auto& group : m_members)
    {
        std::sort(group.begin(), group.end());
        group.erase(std::unique(group.begin(), group.end()), group.end());
    }
    for (GroupId g = 0; g < m_members.size(); ++g)
    {
        for (NodeId m : m_members[g])
        {
            m_agents[m]->JoinGroup(g);
        }
    }

    const double stop = s.duration > 2.0 ? s.duration - 1.0 : s.duration;
    for (const FlowConfig& f : flows)
    {
        const double jitter = m_rng.Uniform01() * s.startJitter;
        const double rreqJitter = m_rng.Uniform01() * s.startJitter;
        ResolvedFlow flow;
        flow.spec.source = f.source;
        flow.spec.group = f.group;
        flow.spec.rate = f.rate.value_or(s.rate);
        flow.spec.bReq = f.bReq.value_or(s.bReq != 0 ? s.bReq : s.DefaultBReq(flow.spec.rate));
        flow.spec.maxDelay = f.maxDelay.value_or(s.maxDelay);
        flow.spec.payloadBytes = s.payload;
        flow.spec.start = f.start.value_or(s.trafficStart + jitter);
        flow.spec.stop = std::max(flow.spec.start, stop);
        flow.spec.firstRreq = f.rreqStart.value_or(flow.spec.start + rreqJitter);
        for (NodeId m : m_members[f.group])
        {
            if (m != f.source)
            {
                flow.receivers.push_back(m);
            }
        }
        flow.spec.id = m_ledger.AddFlow(f.source, f.group, static_cast<std::uint32_t>(flow.receivers.size()));
        flow.localIndex = m_agents[f.source]->AddFlow(flow.spec);
        m_flows.push_back(std::move(flow));
    }
}

void
Simulation::ScheduleInitialEvents(const std::vector<double>& helloPhases)
{
    const Scenario& s = m_scenario;
    for (NodeId n = 0; n < s.nodes; ++n)
    {
        m_agents[n]->Start(helloPhases[n]);
    }
    for (std::uint32_t i = 0; i < m_flows.size(); ++i)
    {
        if (m_flows[i].spec.start < m_flows[i].spec.stop)
        {
            m_scheduler.Schedule(m_flows[i].spec.start, TrafficTick{i});
        }
    }
    if (m_mobility.IsMobile())
    {
        for (NodeId n = 0; n < s.nodes; ++n)
        {
            m_scheduler.Schedule(*m_mobility.NextArrival(n), MobilityWaypoint{n});
        }
    }
    for (std::uint32_t i = 0; i < s.linkBreaks.size(); ++i)
    {
        m_scheduler.Schedule(s.linkBreaks[i].at, TimerExpiry{s.linkBreaks[i].a, TimerKind::LinkBreak, i});
    }
    if (s.security.enabled)
    {
        for (std::size_t k = 0; k < s.security.snodes.size(); ++k)
        {
            m_scheduler.Schedule(s.security.start + static_cast<double>(k) * s.security.stagger,
                                 TimerExpiry{s.security.snodes[k], TimerKind::JoinStart, 0});
        }
        for (std::uint32_t i = 0; i < s.security.forged; ++i)
        {
            m_scheduler.Schedule(s.security.start + 0.05 + 0.2 * i,
                                 TimerExpiry{s.security.attacker, TimerKind::ForgedJoin, i});
        }
    }
}

void
Simulation::SetTrace(std::ostream* out)
{
    m_trace = out != nullptr ? std::make_unique<Trace>(*out) : nullptr;
    m_medium->SetTrace(m_trace.get());
}

void
Simulation::EnableAudit()
{
    for (auto& agent : m_agents)
    {
        agent->EnableAudit(true);
    }
}

void
Simulation::Broadcast(NodeId sender, Packet packet)
{
    m_medium->Broadcast(sender, std::move(packet));
}

EventHandle
Simulation::Schedule(SimTime at, EventPayload payload)
{
    return m_scheduler.Schedule(at, std::move(payload));
}

bool
Simulation::Cancel(EventHandle handle)
{
    return m_scheduler.Cancel(handle);
}

void
Simulation::Run()
{
    RunUntil(m_scenario.duration);
}

void
Simulation::RunUntil(SimTime t)
{
    m_scheduler.RunUntil(t, [this](const Event& event) {
        Dispatch(event);
        if (m_observer)
        {
            m_observer(event);
        }
    });
}

void
Simulation::Dispatch(const Event& event)
{
    std::visit(
        [&](const auto& payload) {
            using T = std::decay_t<decltype(payload)>;
            if constexpr (std::is_same_v<T, PacketDelivery>)
            {
                if (m_medium->OnDelivery(payload))
                {
                    m_agents[payload.node]->OnFrame(payload.frame);
                    if (!m_security.empty())
                    {
                        m_security[payload.node]->OnFrame(payload.frame);
                    }
                }
            }
            else if constexpr (std::is_same_v<T, TimerExpiry>)
            {
                switch (payload.timer)
                {
                case TimerKind::MacAttempt:
                case TimerKind::MacTxEnd:
                    m_medium->OnTimer(payload);
                    break;
                case TimerKind::Sweep:
                case TimerKind::RecoveryWatch:
                case TimerKind::RecoveryReply:
                case TimerKind::TriggeredHello:
                    m_agents[payload.node]->OnTimer(payload.timer, payload.arg);
                    break;
                case TimerKind::JoinStart:
                    m_security[payload.node]->Join(1);
                    break;
                case TimerKind::ForgedJoin: {
                    const auto& snodes = m_scenario.security.snodes;
                    const NodeId claimed = snodes.empty() ? payload.node : snodes.front();
                    m_security[payload.node]->InjectForged(claimed,
                                                           kForgedNonceBase + static_cast<std::uint32_t>(payload.arg));
                    break;
                }
                case TimerKind::LinkBreak: {
                    const LinkBreak& lb = m_scenario.linkBreaks.at(payload.arg);
                    m_medium->SetLinkDown(lb.a, lb.b, true);
                    break;
                }
                }
            }
            else if constexpr (std::is_same_v<T, TrafficTick>)
            {
                ResolvedFlow& flow = m_flows[payload.flow];
                m_agents[flow.spec.source]->OnTrafficTick(flow.localIndex);
                ++flow.ticks;
                const SimTime next = flow.spec.start + static_cast<double>(flow.ticks) / flow.spec.rate;
                if (next < flow.spec.stop)
                {
                    m_scheduler.Schedule(next, TrafficTick{payload.flow});
                }
            }
            else if constexpr (std::is_same_v<T, MobilityWaypoint>)
            {
                m_mobility.Advance(payload.node, m_rng);
                m_scheduler.Schedule(*m_mobility.NextArrival(payload.node), MobilityWaypoint{payload.node});
            }
            else if constexpr (std::is_same_v<T, PeriodicEmit>)
            {
                m_agents[payload.node]->OnPeriodic(payload.kind);
            }
        },
        event.payload);
}

std::uint32_t
Simulation::SourceCount() const
{
    std::vector<NodeId> sources;
    for (const ResolvedFlow& f : m_flows)
    {
        sources.push_back(f.spec.source);
    }
    std::sort(sources.begin(), sources.end());
    return static_cast<std::uint32_t>(std::unique(sources.begin(), sources.end()) - sources.begin());
}

std::vector<std::vector<NodeId>>
Simulation::Adjacency() const
{
    std::vector<std::vector<NodeId>> adj(m_scenario.nodes);
    for (NodeId n = 0; n < m_scenario.nodes; ++n)
    {
        adj[n] = m_medium->NeighborsOf(n, Now());
    }
    return adj;
}

std::optional<bool>
Simulation::MeshFormedNow() const
{
    if (m_security.empty())
    {
        return std::nullopt;
    }
    std::vector<std::uint8_t> attrs;
    for (const auto& agent : m_security)
    {
        attrs.push_back(agent->ForwardingAttr());
    }
    return MeshFormed(Adjacency(), m_scenario.security.snodes, attrs, m_scenario.security.joinTtl);
}

CsvRow
Simulation::Row() const
{
    CsvRow row;
    row.seed = m_scenario.seed;
    row.variant = m_scenario.variant;
    row.sources = SourceCount();
    row.nodes = m_scenario.nodes;
    row.channelModel = m_scenario.channelModel;
    row.pdr = Pdr(m_ledger);
    row.avgDelay = AvgDelay(m_ledger);
    row.rreqPerNode = RreqLoad(m_ledger, m_scenario.nodes);
    row.ctrlBits = m_ledger.ControlBits();
    row.dataSent = m_ledger.TotalSent();
    row.dataDelivered = m_ledger.TotalDelivered();
    row.macDrops = m_ledger.macDrops;
    row.bufferDrops = m_ledger.bufferDrops;
    row.recoveryEvents = m_ledger.recoveryStarted;
    row.meshFormed = MeshFormedNow();
    row.rejectedAuth = m_ledger.rejectedAuth;
    return row;
}

CsvRow
RunScenario(const Scenario& scenario, std::ostream* trace)
{
    Simulation sim(scenario);
    sim.SetTrace(trace);
    sim.Run();
    return sim.Row();
}

SweepAxis
ParseSweepAxis(const std::string& text)
{
    if (text == "sources")
    {
        return SweepAxis::Sources;
    }
    if (text == "max_speed")
    {
        return SweepAxis::MaxSpeed;
    }
    if (text == "rate")
    {
        return SweepAxis::Rate;
    }
    throw ScenarioError(fmt::format("unknown sweep axis '{}' (expected sources, max_speed or rate)", text));
}

std::vector<CsvRow>
Sweep(const Scenario& base, SweepAxis axis, const std::vector<double>& values, std::uint32_t seeds, unsigned workers)
{
    constexpr Variant kVariants[] = {Variant::Odmrp, Variant::Cqmp, Variant::Proposed};
    std::vector<Scenario> jobs;
    for (double value : values)
    {
        for (std::uint32_t i = 0; i < seeds; ++i)
        {
            for (Variant variant : kVariants)
            {
                Scenario s = base;
                s.seed = base.seed + i;
                s.variant = variant;
                switch (axis)
                {
                case SweepAxis::Sources:
                    s.flows.clear();
                    s.sources = static_cast<std::uint32_t>(std::llround(value));
                    break;
                case SweepAxis::MaxSpeed:
                    s.maxSpeed = value;
                    s.minSpeed = std::min(s.minSpeed, value);
                    break;
                case SweepAxis::Rate:
                    s.rate = value;
                    break;
                }
                Validate(s);
                jobs.push_back(std::move(s));
            }
        }
    }

    std::vector<CsvRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
        {
            rows[i] = RunScenario(jobs[i]);
        }
    };
    workers = std::max(1u, workers);
    if (workers == 1)
    {
        worker();
        return rows;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
    {
        pool.emplace_back(worker);
    }
    for (std::thread& t : pool)
    {
        t.join();
    }
    return rows;
}

} // namespace meshsim
