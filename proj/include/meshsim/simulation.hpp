#pragma once

#include "meshsim/engine.hpp"
#include "meshsim/medium.hpp"
#include "meshsim/metrics.hpp"
#include "meshsim/mobility.hpp"
#include "meshsim/protocol.hpp"
#include "meshsim/random.hpp"
#include "meshsim/scenario.hpp"
#include "meshsim/security.hpp"
#include "meshsim/trace.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace meshsim
{

/// One flow after the scenario's seeded draws have been resolved.
struct ResolvedFlow
{
    FlowSpec spec;
    std::size_t localIndex{0};
    std::uint32_t ticks{0};
    std::vector<NodeId> receivers;
};

struct CsvRow
{
    std::uint64_t seed{0};
    Variant variant{Variant::Proposed};
    std::uint32_t sources{0};
    std::uint32_t nodes{0};
    ChannelModel channelModel{ChannelModel::Csma};
    double pdr{0.0};
    double avgDelay{0.0};
    double rreqPerNode{0.0};
    std::uint64_t ctrlBits{0};
    std::uint64_t dataSent{0};
    std::uint64_t dataDelivered{0};
    std::uint64_t macDrops{0};
    std::uint64_t bufferDrops{0};
    std::uint64_t recoveryEvents{0};
    std::optional<bool> meshFormed;
    std::uint64_t rejectedAuth{0};

    std::string ToCsv() const;
};

inline constexpr const char* kCsvHeader =
    "seed,variant,sources,nodes,channel_model,pdr,avg_delay_s,rreq_per_node,ctrl_bits,data_sent,"
    "data_delivered,mac_drops,buffer_drops,recovery_events,mesh_formed,rejected_auth";

/**
 * One complete run: owns the scheduler, the random stream, mobility, the
 * medium and one protocol agent per node.
 *
 * Random draws happen in this order: initial placement (x then y per node),
 * first waypoint legs (x, y, speed per node), source selection, group
 * membership, data start and first-RREQ jitter per flow, Hello phase per
 * node; then, during the run, MAC backoffs and new waypoint legs in event
 * order.
 */
class Simulation : public NodeServices
{
  public:
    explicit Simulation(Scenario scenario);
    ~Simulation() override;

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    void SetTrace(std::ostream* out);

    /// Called after every processed event.
    void SetObserver(std::function<void(const Event&)> observer)
    {
        m_observer = std::move(observer);
    }

    void EnableAudit();

    /// Runs until the scenario duration.
    void Run();
    void RunUntil(SimTime t);

    // NodeServices.
    SimTime Now() const override
    {
        return m_scheduler.Now();
    }
    void Broadcast(NodeId sender, Packet packet) override;
    EventHandle Schedule(SimTime at, EventPayload payload) override;
    bool Cancel(EventHandle handle) override;
    MetricsLedger& Ledger() override
    {
        return m_ledger;
    }

    const MetricsLedger& Ledger() const
    {
        return m_ledger;
    }

    const Scenario& Config() const
    {
        return m_scenario;
    }

    const ProtocolParams& Protocol() const
    {
        return m_protocol;
    }

    const MulticastAgent& Agent(NodeId node) const
    {
        return *m_agents.at(node);
    }

    const SecurityAgent* Security(NodeId node) const
    {
        return m_security.empty() ? nullptr : m_security.at(node).get();
    }

    const Medium& Channel() const
    {
        return *m_medium;
    }

    const MobilityModel& Mobility() const
    {
        return m_mobility;
    }

    const std::vector<ResolvedFlow>& Flows() const
    {
        return m_flows;
    }

    const std::vector<std::vector<NodeId>>& Members() const
    {
        return m_members;
    }

    std::uint32_t SourceCount() const;

    /// Connectivity graph at the current time.
    std::vector<std::vector<NodeId>> Adjacency() const;

    /// Security mesh predicate over the current topology; nullopt when the
    /// security procedure is disabled.
    std::optional<bool> MeshFormedNow() const;

    CsvRow Row() const;

  private:
    void Dispatch(const Event& event);
    std::vector<Vec2> InitialPositions();
    void ResolveTraffic();
    void ScheduleInitialEvents(const std::vector<double>& helloPhases);

    Scenario m_scenario;
    ProtocolParams m_protocol;
    Scheduler m_scheduler;
    Rng m_rng;
    MetricsLedger m_ledger;
    MobilityModel m_mobility;
    std::unique_ptr<Medium> m_medium;
    std::unique_ptr<Trace> m_trace;
    std::unique_ptr<Authenticator> m_auth;
    std::vector<std::unique_ptr<MulticastAgent>> m_agents;
    std::vector<std::unique_ptr<SecurityAgent>> m_security;
    std::vector<ResolvedFlow> m_flows;
    std::vector<std::vector<NodeId>> m_members;
    std::function<void(const Event&)> m_observer;
};

/// Runs a scenario to completion and returns its CSV row.
CsvRow RunScenario(const Scenario& scenario, std::ostream* trace = nullptr);

enum class SweepAxis : std::uint8_t
{
    Sources,
    MaxSpeed,
    Rate,
};

SweepAxis ParseSweepAxis(const std::string& text);

/// Every (value, seed, variant) combination; seeds are base.seed + i. Rows are
/// returned ordered by value, then seed, then variant (odmrp, cqmp, proposed),
/// independent of the number of worker threads.
std::vector<CsvRow> Sweep(const Scenario& base,
                          SweepAxis axis,
                          const std::vector<double>& values,
                          std::uint32_t seeds,
                          unsigned workers = 1);

} // namespace meshsim
