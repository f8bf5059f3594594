#pragma once

#include "meshsim/medium.hpp"
#include "meshsim/protocol.hpp"
#include "meshsim/recovery.hpp"
#include "meshsim/security.hpp"
#include "meshsim/types.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshsim
{

enum class Placement : std::uint8_t
{
    Random,
    Line,
    Grid,
    Explicit,
};

enum class MobilityKind : std::uint8_t
{
    RandomWaypoint,
    Static,
};

struct FlowConfig
{
    NodeId source{0};
    GroupId group{0};
    std::optional<double> rate{};
    std::optional<BitRate> bReq{};
    std::optional<double> maxDelay{};
    std::optional<double> start{};
    /// First route request; defaults to start plus jitter.
    std::optional<double> rreqStart{};
};

struct LinkBreak
{
    double at{0.0};
    NodeId a{0};
    NodeId b{0};
};

/// Complete description of one run. Defaults are the evaluation setup: 50
/// nodes in 1000 m x 1000 m, 250 m range, 2 Mbit/s, 300 s, 512-byte payloads,
/// random waypoint at 1-20 m/s with no pause.
struct Scenario
{
    std::uint32_t nodes{50};
    double areaWidth{1000.0};
    double areaHeight{1000.0};
    double range{250.0};
    double capacity{2e6};
    double duration{300.0};
    std::uint32_t payload{512};
    std::uint32_t headerBytes{48};
    double minSpeed{1.0};
    double maxSpeed{20.0};
    double pause{0.0};
    MobilityKind mobility{MobilityKind::RandomWaypoint};
    Placement placement{Placement::Random};
    double spacing{200.0};
    std::uint32_t gridColumns{0};
    std::vector<Vec2> positions;

    std::uint32_t sources{1};
    std::uint32_t receivers{10};
    std::uint32_t groups{1};
    double rate{4.0};
    /// 0 means "rate times data frame bits".
    BitRate bReq{0};
    double maxDelay{kInfinity};
    double trafficStart{0.0};
    double startJitter{0.1};
    std::vector<FlowConfig> flows;
    std::vector<std::vector<NodeId>> members;

    Variant variant{Variant::Proposed};
    ChannelModel channelModel{ChannelModel::Csma};
    std::uint32_t queueCapacity{64};
    std::uint64_t seed{1};

    double helloInterval{3.0};
    double rreqInterval{3.0};
    double timeInterval{1.5};
    double tExplored{3.0};
    double tRegistered{3.0};
    double tReserved{6.0};
    double fgTimeout{9.0};
    double macEfficiency{0.8};

    RecoveryParams recovery;
    SNodeConfig security;
    std::vector<LinkBreak> linkBreaks;

    /// Reservation per flow when none is configured.
    BitRate DefaultBReq(double flowRate) const;
};

class ScenarioError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

Scenario ParseScenario(const std::string& yamlText);
Scenario LoadScenario(const std::string& path);

/// Throws ScenarioError naming the offending key.
void Validate(const Scenario& scenario);

/// Every key with its value, in the same schema ParseScenario reads.
std::string DumpScenario(const Scenario& scenario);

Variant ParseVariant(const std::string& text);
ChannelModel ParseChannelModel(const std::string& text);

/// Five static nodes 200 m apart on a line, ideal channel, node 0 sending
/// to node 4.
Scenario Line5Scenario();

} // namespace meshsim
