#include "meshsim/mobility.hpp"

#include <doctest.h>

#include <cmath>

using namespace meshsim;

TEST_CASE("waypoints and speeds stay within bounds")
{
    Rng rng(7);
    const Area area{1000.0, 1000.0};
    const SpeedInterval speeds{1.0, 20.0};
    for (int i = 0; i < 1000; ++i)
    {
        const WaypointDraw d = PickWaypoint(rng, area, speeds);
        CHECK(d.waypoint.x >= 0.0);
        CHECK(d.waypoint.x <= 1000.0);
        CHECK(d.waypoint.y >= 0.0);
        CHECK(d.waypoint.y <= 1000.0);
        CHECK(d.speed >= 1.0);
        CHECK(d.speed <= 20.0);
    }
}

TEST_CASE("degenerate speed interval")
{
    Rng rng(3);
    CHECK(PickWaypoint(rng, Area{}, SpeedInterval{5.0, 5.0}).speed == 5.0);
}

TEST_CASE("fixed seed gives the same waypoint sequence")
{
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 50; ++i)
    {
        const WaypointDraw x = PickWaypoint(a, Area{}, SpeedInterval{});
        const WaypointDraw y = PickWaypoint(b, Area{}, SpeedInterval{});
        CHECK(x.waypoint == y.waypoint);
        CHECK(x.speed == y.speed);
    }
}

TEST_CASE("linear motion with arrival clamp")
{
    MotionState leg{{0.0, 0.0}, {100.0, 0.0}, 10.0, 0.0};
    CHECK(leg.ArrivalAt() == doctest::Approx(10.0));
    CHECK(PositionAt(leg, 5.0) == Vec2{50.0, 0.0});
    CHECK(PositionAt(leg, 0.0) == Vec2{0.0, 0.0});
    CHECK(PositionAt(leg, 20.0) == Vec2{100.0, 0.0});
}

TEST_CASE("arrival starts the next leg")
{
    Rng rng(9);
    const MotionState leg{{0.0, 0.0}, {100.0, 0.0}, 10.0, 0.0};

    SUBCASE("no pause")
    {
        const MotionState next = OnArrival(leg, 0.0, rng, Area{}, SpeedInterval{});
        CHECK(next.departAt == doctest::Approx(10.0));
        CHECK(next.origin == leg.waypoint);
    }
    SUBCASE("pause")
    {
        const MotionState next = OnArrival(leg, 5.0, rng, Area{}, SpeedInterval{});
        CHECK(next.departAt == doctest::Approx(15.0));
        CHECK(PositionAt(next, 12.0) == leg.waypoint);
    }
    SUBCASE("chained legs")
    {
        MotionState a = OnArrival(leg, 0.0, rng, Area{}, SpeedInterval{});
        MotionState b = OnArrival(a, 0.0, rng, Area{}, SpeedInterval{});
        CHECK(b.origin == a.waypoint);
        CHECK(b.departAt == doctest::Approx(a.ArrivalAt()));
    }
}

TEST_CASE("random waypoint trajectories stay inside the area and respect speed")
{
    Rng rng(11);
    const Area area{500.0, 300.0};
    std::vector<Vec2> start;
    for (int i = 0; i < 10; ++i)
    {
        start.push_back(UniformPoint(rng, area));
    }
    MobilityModel model = MobilityModel::RandomWaypoint(start, area, SpeedInterval{1.0, 20.0}, 0.0, rng);
    CHECK(model.IsMobile());

    SimTime t = 0.0;
    std::vector<Vec2> last = start;
    while (t < 200.0)
    {
        const SimTime next = t + 0.7;
        for (NodeId n = 0; n < 10; ++n)
        {
            while (*model.NextArrival(n) <= next)
            {
                model.Advance(n, rng);
            }
        }
        for (NodeId n = 0; n < 10; ++n)
        {
            const Vec2 p = model.PositionOf(n, next);
            CHECK(p.x >= 0.0);
            CHECK(p.x <= area.width);
            CHECK(p.y >= 0.0);
            CHECK(p.y <= area.height);
            CHECK(Distance(p, last[n]) <= 20.0 * 0.7 + 1e-9);
            last[n] = p;
        }
        t = next;
    }
}

TEST_CASE("static model")
{
    MobilityModel model = MobilityModel::Static({{1.0, 2.0}, {3.0, 4.0}});
    CHECK_FALSE(model.IsMobile());
    CHECK(model.NodeCount() == 2);
    CHECK(model.PositionOf(1, 123.0) == Vec2{3.0, 4.0});
    CHECK_FALSE(model.NextArrival(0).has_value());
}
