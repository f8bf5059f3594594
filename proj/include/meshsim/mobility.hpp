#pragma once

#include "meshsim/random.hpp"
#include "meshsim/types.hpp"

#include <optional>
#include <vector>

namespace meshsim
{

struct Area
{
    double width{1000.0};
    double height{1000.0};
};

struct SpeedInterval
{
    double min{1.0};
    double max{20.0};
};

/// One straight leg of a random-waypoint trajectory.
struct MotionState
{
    Vec2 origin;
    Vec2 waypoint;
    double speed{1.0};
    SimTime departAt{0.0};

    SimTime ArrivalAt() const;
};

struct WaypointDraw
{
    Vec2 waypoint;
    double speed{0.0};
};

/// Draw order: x, y, then speed.
WaypointDraw PickWaypoint(Rng& rng, const Area& area, const SpeedInterval& speeds);

Vec2 UniformPoint(Rng& rng, const Area& area);

/// Linear interpolation along the leg; clamped to origin before departure and
/// to the waypoint after arrival.
Vec2 PositionAt(const MotionState& state, SimTime t);

/// Next leg once `state` has reached its waypoint.
MotionState OnArrival(const MotionState& state,
                      double pause,
                      Rng& rng,
                      const Area& area,
                      const SpeedInterval& speeds);

/**
 * Positions of every node over time. Nodes are either static or follow a
 * random-waypoint trajectory whose legs are advanced by Advance() at arrival.
 */
class MobilityModel
{
  public:
    /// All nodes fixed at the given positions.
    static MobilityModel Static(std::vector<Vec2> positions);

    /// Random waypoint starting from the given positions; the first leg of
    /// each node is drawn immediately (node order) and departs at t=0.
    static MobilityModel RandomWaypoint(std::vector<Vec2> initial,
                                        Area area,
                                        SpeedInterval speeds,
                                        double pause,
                                        Rng& rng);

    std::size_t NodeCount() const
    {
        return m_static.size();
    }

    bool IsMobile() const
    {
        return !m_legs.empty();
    }

    Vec2 PositionOf(NodeId node, SimTime t) const;

    /// Arrival time of the node's current leg, or nullopt for static nodes.
    std::optional<SimTime> NextArrival(NodeId node) const;

    /// Starts the next leg for a node that has arrived at its waypoint.
    void Advance(NodeId node, Rng& rng);

    const MotionState& Leg(NodeId node) const
    {
        return m_legs.at(node);
    }

  private:
    std::vector<Vec2> m_static;
    std::vector<MotionState> m_legs;
    Area m_area;
    SpeedInterval m_speeds;
    double m_pause{0.0};
};

} // namespace meshsim
