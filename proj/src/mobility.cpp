#include "meshsim/mobility.hpp"

#include <algorithm>

namespace meshsim
{

SimTime
MotionState::ArrivalAt() const
{
    const double d = Distance(origin, waypoint);
    if (d == 0.0)
    {
        return departAt;
    }
    return departAt + d / speed;
}

Vec2
UniformPoint(Rng& rng, const Area& area)
{
    const double x = rng.Uniform(0.0, area.width);
    const double y = rng.Uniform(0.0, area.height);
    return {x, y};
}

WaypointDraw
PickWaypoint(Rng& rng, const Area& area, const SpeedInterval& speeds)
{
    WaypointDraw draw;
    draw.waypoint = UniformPoint(rng, area);
    draw.speed = rng.Uniform(speeds.min, speeds.max);
    return draw;
}

Vec2
PositionAt(const MotionState& state, SimTime t)
{
    if (t <= state.departAt)
    {
        return state.origin;
    }
    const double d = Distance(state.origin, state.waypoint);
    const double travelled = state.speed * (t - state.departAt);
    if (d == 0.0 || travelled >= d)
    {
        return state.waypoint;
    }
    const double f = travelled / d;
    return {state.origin.x + (state.waypoint.x - state.origin.x) * f,
            state.origin.y + (state.waypoint.y - state.origin.y) * f};
}

MotionState
OnArrival(const MotionState& state,
          double pause,
          Rng& rng,
          const Area& area,
          const SpeedInterval& speeds)
{
    const WaypointDraw draw = PickWaypoint(rng, area, speeds);
    MotionState next;
    next.origin = state.waypoint;
    next.waypoint = draw.waypoint;
    next.speed = draw.speed;
    next.departAt = state.ArrivalAt() + pause;
    return next;
}

MobilityModel
MobilityModel::Static(std::vector<Vec2> positions)
{
    MobilityModel model;
    model.m_static = std::move(positions);
    return model;
}

MobilityModel
MobilityModel::RandomWaypoint(std::vector<Vec2> initial,
                              Area area,
                              SpeedInterval speeds,
                              double pause,
                              Rng& rng)
{
    MobilityModel model;
    model.m_area = area;
    model.m_speeds = speeds;
    model.m_pause = pause;
    model.m_legs.reserve(initial.size());
    for (const Vec2& start : initial)
    {
        const WaypointDraw draw = PickWaypoint(rng, area, speeds);
        model.m_legs.push_back(MotionState{start, draw.waypoint, draw.speed, 0.0});
    }
    model.m_static = std::move(initial);
    return model;
}

Vec2
MobilityModel::PositionOf(NodeId node, SimTime t) const
{
    if (m_legs.empty())
    {
        return m_static[node];
    }
    return PositionAt(m_legs[node], t);
}

std::optional<SimTime>
MobilityModel::NextArrival(NodeId node) const
{
    if (m_legs.empty())
    {
        return std::nullopt;
    }
    return m_legs[node].ArrivalAt();
}

void
MobilityModel::Advance(NodeId node, Rng& rng)
{
    m_legs[node] = OnArrival(m_legs[node], m_pause, rng, m_area, m_speeds);
}

} // namespace meshsim
