#include "fake_services.hpp"

#include "meshsim/protocol.hpp"

#include <doctest.h>

using namespace meshsim;
using meshsim::testing::FakeServices;

namespace
{

constexpr BitRate kFlow = 128000;

ProtocolParams
Params(Variant v = Variant::Proposed)
{
    ProtocolParams p;
    p.variant = v;
    return p;
}

SourceRow
Row(NodeId source, GroupId group, std::uint32_t seq, BitRate bReq = kFlow, std::uint32_t hops = 0)
{
    SourceRow r;
    r.source = source;
    r.group = group;
    r.seq = seq;
    r.bReq = bReq;
    r.hopCount = hops;
    return r;
}

Rreq
MakeRreq(NodeId relay, std::vector<SourceRow> rows)
{
    Rreq r;
    r.relay = relay;
    r.rows = std::move(rows);
    return r;
}

Reply
MakeReply(NodeId origin, std::vector<ReplyEntry> entries, std::vector<NodeId> chain)
{
    Reply r;
    r.origin = origin;
    r.entries = std::move(entries);
    r.fgChain = std::move(chain);
    return r;
}

DataPacket
Data(NodeId source, GroupId group, std::uint32_t seq, SimTime sentAt = 0.0)
{
    return DataPacket{source, group, seq, 512, sentAt};
}

/// Node 1 becomes a registered forwarder of (0, group 0) for round `seq`,
/// with receiver 2 downstream.
void
Register(MulticastAgent& b, std::uint32_t seq)
{
    b.ProcessRreq(MakeRreq(0, {Row(0, 0, seq)}));
    b.ProcessReply(MakeReply(2, {ReplyEntry{0, 0, seq, 1}}, {2}));
}

struct Fixture
{
    FakeServices net;
    RecoveryParams recovery;
};

} // namespace

TEST_CASE_FIXTURE(Fixture, "available bandwidth")
{
    MulticastAgent a(1, Params(), recovery, net);

    SUBCASE("idle neighborhood")
    {
        CHECK(a.AvailableBandwidth() == 1600000);
    }
    SUBCASE("own reservation")
    {
        Register(a, 1);
        CHECK(a.ConsumedRate() == kFlow);
        CHECK(a.AvailableBandwidth() == 1600000 - kFlow);
    }
    SUBCASE("neighbors consume")
    {
        a.ProcessHello(Hello{4, 0, 500000});
        a.ProcessHello(Hello{5, 0, 300000});
        CHECK(a.AvailableBandwidth() == 800000);
    }
    SUBCASE("oversubscribed clamps at zero")
    {
        a.ProcessHello(Hello{4, 0, 1000000});
        a.ProcessHello(Hello{5, 0, 1000000});
        CHECK(a.AvailableBandwidth() == 0);
    }
}

TEST_CASE_FIXTURE(Fixture, "admission")
{
    MulticastAgent a(1, Params(), recovery, net);

    SUBCASE("admit when every neighbor can carry the flow")
    {
        a.ProcessHello(Hello{4, kFlow, 0});
        a.ProcessHello(Hello{5, 1600000, 0});
        CHECK(a.AdmissionCheck(kFlow).Admitted());
    }
    SUBCASE("reject on own shortage")
    {
        a.ProcessHello(Hello{4, 1600000, 750000});
        a.ProcessHello(Hello{5, 1600000, 750000});
        CHECK(a.AvailableBandwidth() == 100000);
        CHECK(a.AdmissionCheck(kFlow).verdict == AdmissionVerdict::RejectSelf);
    }
    SUBCASE("reject on a neighbor's shortage")
    {
        a.ProcessHello(Hello{4, 1600000, 0});
        a.ProcessHello(Hello{5, 64000, 0});
        const Admission verdict = a.AdmissionCheck(kFlow);
        CHECK(verdict.verdict == AdmissionVerdict::RejectNeighbor);
        CHECK(verdict.failingNeighbor == 5);
    }
    SUBCASE("reservations pending on the same walk count")
    {
        CHECK(a.AdmissionCheck(900000).Admitted());
        const std::vector<NodeId> pending{1};
        CHECK(a.AdmissionCheck(900000, pending).verdict == AdmissionVerdict::RejectSelf);
    }
    SUBCASE("rejected rows are not rebroadcast")
    {
        a.ProcessHello(Hello{5, 64000, 0});
        a.ProcessRreq(MakeRreq(0, {Row(0, 0, 1)}));
        CHECK(net.SentOf<Rreq>(1).empty());
        CHECK_FALSE(a.Route(0, 0).has_value());
        CHECK(net.Ledger().admissionRejects == 1);
    }
}

TEST_CASE_FIXTURE(Fixture, "hello")
{
    MulticastAgent a(1, Params(), recovery, net);
    net.Attach(a);

    SUBCASE("periodic with phase")
    {
        a.Start(0.7);
        net.Advance(7.0);
        const auto hellos = net.SentOf<Hello>(1);
        REQUIRE(hellos.size() == 3);
        CHECK(hellos[0].bAvailable == 1600000);
        CHECK(hellos[0].consumedRate == 0);
    }
    SUBCASE("table entries")
    {
        a.ProcessHello(Hello{4, 1000, 10});
        REQUIRE(a.Neighbors().count(4) == 1);
        a.ProcessHello(Hello{4, 2000, 20});
        CHECK(a.Neighbors().size() == 1);
        CHECK(a.Neighbors().at(4).bAvailable == 2000);
    }
    SUBCASE("growing neighbor consumption is passed on once")
    {
        a.ProcessHello(Hello{4, 1600000, 0});
        CHECK(net.sent.empty());
        a.ProcessHello(Hello{4, 1300000, 300000});
        CHECK(net.sent.empty());
        net.Advance(Params().helloHoldoff);
        REQUIRE(net.SentOf<Hello>(1).size() == 1);
        CHECK(net.SentOf<Hello>(1).back().bAvailable == 1300000);
        a.ProcessHello(Hello{4, 1300000, 300000});
        a.ProcessHello(Hello{4, 1600000, 0});
        net.Advance(1.0);
        CHECK(net.SentOf<Hello>(1).size() == 1);
    }
    SUBCASE("increments within the holdoff share one hello")
    {
        a.ProcessHello(Hello{4, 1300000, 300000});
        a.ProcessHello(Hello{5, 1000000, 300000});
        net.Advance(Params().helloHoldoff);
        REQUIRE(net.SentOf<Hello>(1).size() == 1);
        CHECK(net.SentOf<Hello>(1).back().bAvailable == 1000000);
    }
    SUBCASE("silent neighbors are evicted by the sweep")
    {
        a.ProcessHello(Hello{4, 1000, 10});
        net.Advance(6.0);
        a.SweepTimers();
        CHECK(a.Neighbors().count(4) == 1);
        net.Advance(6.1);
        a.SweepTimers();
        CHECK(a.Neighbors().empty());
    }
    SUBCASE("reservation shows in the next hello")
    {
        Register(a, 1);
        net.Advance(net.Now() + Params().helloHoldoff);
        REQUIRE_FALSE(net.SentOf<Hello>(1).empty());
        CHECK(net.SentOf<Hello>(1).back().consumedRate == kFlow);
    }
    SUBCASE("odmrp ignores hellos")
    {
        MulticastAgent o(2, Params(Variant::Odmrp), recovery, net);
        o.OnFrame(Frame{4, std::make_shared<const Packet>(Hello{4, 0, 0})});
        CHECK(o.Neighbors().empty());
    }
}

TEST_CASE_FIXTURE(Fixture, "co-neighbor count from relayed neighbor lists")
{
    MulticastAgent a(1, Params(), recovery, net);
    a.ProcessHello(Hello{2, 1600000, 0});
    a.ProcessHello(Hello{3, 1600000, 0});
    Rreq r = MakeRreq(2, {Row(0, 0, 1)});
    r.relayNeighbors = {NeighborInfo{1, 0}, NeighborInfo{3, 0}, NeighborInfo{4, 0}};
    a.ProcessRreq(r);
    const NeighborEntry& e = a.Neighbors().at(2);
    CHECK(e.coNeighbor == 1);
    CHECK(e.neighborIdsKnown);
    CHECK(e.neighborIds == std::vector<NodeId>{1, 3, 4});
}

TEST_CASE_FIXTURE(Fixture, "route request origination")
{
    MulticastAgent s(0, Params(), recovery, net);
    net.Attach(s);
    FlowSpec flow;
    flow.source = 0;
    flow.bReq = kFlow;
    flow.stop = 100.0;
    flow.firstRreq = 0.05;
    s.AddFlow(flow);
    s.Start(0.0);
    net.Advance(7.0);

    const auto rreqs = net.SentOf<Rreq>(0);
    REQUIRE(rreqs.size() == 3);
    for (std::size_t i = 0; i < rreqs.size(); ++i)
    {
        REQUIRE(rreqs[i].rows.size() == 1);
        CHECK(rreqs[i].rows[0].seq == i + 1);
        CHECK(rreqs[i].rows[0].bReq == kFlow);
        CHECK(rreqs[i].rows[0].hopCount == 0);
    }
    CHECK(s.NextRreqAt().value() == doctest::Approx(9.05));
}

TEST_CASE_FIXTURE(Fixture, "consolidation")
{
    auto makeSource = [&](Variant v) {
        auto s = std::make_unique<MulticastAgent>(5, Params(v), recovery, net);
        FlowSpec flow;
        flow.source = 5;
        flow.group = 1;
        flow.stop = 100.0;
        s->AddFlow(flow);
        net.Attach(*s);
        s->Start(0.0);
        return s;
    };

    SUBCASE("own round due within the window")
    {
        auto s = makeSource(Variant::Cqmp);
        net.Advance(2.2);
        net.sent.clear();
        s->ProcessRreq(MakeRreq(0, {Row(0, 0, 1)}));
        const auto out = net.SentOf<Rreq>(5);
        REQUIRE(out.size() == 1);
        REQUIRE(out[0].rows.size() == 2);
        CHECK(out[0].rows[0].source == 0);
        CHECK(out[0].rows[0].hopCount == 1);
        CHECK(out[0].rows[1].source == 5);
        CHECK(out[0].rows[1].seq == 2);
        CHECK(s->NextRreqAt().value() == doctest::Approx(5.2));
        net.Advance(3.5);
        CHECK(net.SentOf<Rreq>(5).size() == 1);
    }
    SUBCASE("own round too far away")
    {
        auto s = makeSource(Variant::Proposed);
        net.Advance(1.0);
        net.sent.clear();
        s->ProcessRreq(MakeRreq(0, {Row(0, 0, 1)}));
        const auto out = net.SentOf<Rreq>(5);
        REQUIRE(out.size() == 1);
        CHECK(out[0].rows.size() == 1);
        CHECK(s->NextRreqAt().value() == doctest::Approx(3.0));
    }
    SUBCASE("odmrp never consolidates")
    {
        auto s = makeSource(Variant::Odmrp);
        net.Advance(2.9);
        net.sent.clear();
        s->ProcessRreq(MakeRreq(0, {Row(0, 0, 1)}));
        CHECK(net.SentOf<Rreq>(5).at(0).rows.size() == 1);
    }
}

TEST_CASE_FIXTURE(Fixture, "route request processing")
{
    MulticastAgent a(1, Params(), recovery, net);

    SUBCASE("duplicates are suppressed row by row")
    {
        a.ProcessRreq(MakeRreq(0, {Row(0, 0, 1)}));
        a.ProcessRreq(MakeRreq(2, {Row(0, 0, 1)}));
        CHECK(net.SentOf<Rreq>(1).size() == 1);

        a.ProcessRreq(MakeRreq(2, {Row(0, 0, 1), Row(3, 0, 1)}));
        const auto out = net.SentOf<Rreq>(1);
        REQUIRE(out.size() == 2);
        REQUIRE(out[1].rows.size() == 1);
        CHECK(out[1].rows[0].source == 3);
        CHECK(out[1].relay == 1);
    }
    SUBCASE("explored entry records upstream")
    {
        a.ProcessRreq(MakeRreq(7, {Row(0, 0, 1)}));
        const auto route = a.Route(0, 0);
        REQUIRE(route.has_value());
        CHECK(route->status == RouteStatus::Explored);
        CHECK(route->upstream == 7);
        CHECK(a.ConsumedRate() == 0);
    }
    SUBCASE("delay bound drops the row")
    {
        SourceRow row = Row(0, 0, 1, kFlow, 3);
        row.maxDelay = 0.01;
        a.ProcessRreq(MakeRreq(0, {row}));
        CHECK(net.sent.empty());
    }
    SUBCASE("odmrp carries b_req without admission")
    {
        MulticastAgent o(2, Params(Variant::Odmrp), recovery, net);
        o.ProcessRreq(MakeRreq(0, {Row(0, 0, 1, 10000000)}));
        const auto out = net.SentOf<Rreq>(2);
        REQUIRE(out.size() == 1);
        CHECK(out[0].rows[0].bReq == 10000000);
        CHECK(out[0].relayNeighbors.empty());
    }
}

TEST_CASE_FIXTURE(Fixture, "replies from receivers")
{
    SUBCASE("one matching row of three")
    {
        MulticastAgent r(3, Params(), recovery, net);
        r.JoinGroup(0);
        r.JoinGroup(7);
        r.ProcessRreq(MakeRreq(2, {Row(0, 0, 1), Row(4, 1, 1), Row(5, 2, 1)}));
        const auto replies = net.SentOf<Reply>(3);
        REQUIRE(replies.size() == 1);
        REQUIRE(replies[0].entries.size() == 1);
        CHECK(replies[0].entries[0].source == 0);
        CHECK(replies[0].entries[0].nextNode == 2);
        CHECK(replies[0].fgChain == std::vector<NodeId>{3});
    }
    SUBCASE("a source does not reply to itself")
    {
        MulticastAgent r(0, Params(), recovery, net);
        r.JoinGroup(0);
        r.ProcessRreq(MakeRreq(2, {Row(0, 0, 1)}));
        CHECK(net.sent.empty());
    }
    SUBCASE("two receivers reply independently")
    {
        MulticastAgent r1(3, Params(), recovery, net);
        MulticastAgent r2(4, Params(), recovery, net);
        r1.JoinGroup(0);
        r2.JoinGroup(0);
        r1.ProcessRreq(MakeRreq(2, {Row(0, 0, 1)}));
        r2.ProcessRreq(MakeRreq(2, {Row(0, 0, 1)}));
        CHECK(net.SentOf<Reply>(3).size() == 1);
        CHECK(net.SentOf<Reply>(4).size() == 1);
    }
}

TEST_CASE_FIXTURE(Fixture, "reply processing on a line")
{
    MulticastAgent src(0, Params(), recovery, net);
    MulticastAgent fg(1, Params(), recovery, net);
    FlowSpec flow;
    flow.source = 0;
    flow.bReq = kFlow;
    flow.stop = 100.0;
    src.AddFlow(flow);
    CHECK_FALSE(src.FlowUsable(0));

    Register(fg, 1);
    CHECK(fg.IsForwarder(0));
    CHECK(fg.Route(0, 0)->status == RouteStatus::Registered);
    const auto up = net.SentOf<Reply>(1);
    REQUIRE(up.size() == 1);
    CHECK(up[0].entries[0].nextNode == 0);
    CHECK(up[0].fgChain == std::vector<NodeId>{2, 1});
    REQUIRE(fg.Recovery().ChainFor(0) != nullptr);
    CHECK(fg.Recovery().ChainFor(0)->chain == std::vector<NodeId>{2});

    src.ProcessReply(up[0]);
    CHECK(src.FlowUsable(0));
    CHECK(src.ConsumedRate() == kFlow);

    SUBCASE("one upstream reply per round")
    {
        fg.ProcessReply(MakeReply(3, {ReplyEntry{0, 0, 1, 1}}, {3}));
        CHECK(net.SentOf<Reply>(1).size() == 1);
        CHECK(fg.ConsumedRate() == kFlow);
    }
    SUBCASE("replies for another node are ignored")
    {
        MulticastAgent other(4, Params(), recovery, net);
        other.ProcessRreq(MakeRreq(0, {Row(0, 0, 1)}));
        other.ProcessReply(up[0]);
        CHECK_FALSE(other.IsForwarder(0));
    }
}

TEST_CASE_FIXTURE(Fixture, "late replies are ignored")
{
    MulticastAgent fg(1, Params(), recovery, net);
    net.Advance(1.0);
    fg.ProcessRreq(MakeRreq(0, {Row(0, 0, 1)}));
    net.Advance(4.0 + 1e-6);
    CHECK_FALSE(fg.Route(0, 0).has_value());
    fg.ProcessReply(MakeReply(2, {ReplyEntry{0, 0, 1, 1}}, {2}));
    CHECK_FALSE(fg.IsForwarder(0));
    CHECK(net.SentOf<Reply>(1).empty());
}

TEST_CASE_FIXTURE(Fixture, "data forwarding")
{
    MulticastAgent fg(1, Params(), recovery, net);
    Register(fg, 1);
    net.sent.clear();

    SUBCASE("forwarded once per sequence number")
    {
        fg.ProcessData(Data(0, 0, 0), 0);
        fg.ProcessData(Data(0, 0, 0), 3);
        fg.ProcessData(Data(0, 0, 1), 0);
        CHECK(net.SentOf<DataPacket>(1).size() == 2);
        CHECK(fg.Route(0, 0)->status == RouteStatus::Reserved);
    }
    SUBCASE("expired forwarding flag stops forwarding")
    {
        for (int t = 1; t <= 10; ++t)
        {
            net.Advance(t);
            fg.ProcessData(Data(0, 0, static_cast<std::uint32_t>(t)), 0);
        }
        CHECK(fg.Route(0, 0).has_value());
        CHECK_FALSE(fg.IsForwarder(0));
        CHECK(net.SentOf<DataPacket>(1).size() == 9);
    }
    SUBCASE("idle reservation is evicted and releases bandwidth")
    {
        fg.ProcessData(Data(0, 0, 0), 0);
        CHECK(fg.ConsumedRate() == kFlow);
        net.Advance(6.5);
        fg.SweepTimers();
        CHECK_FALSE(fg.Route(0, 0).has_value());
        CHECK(fg.ConsumedRate() == 0);
        CHECK(fg.RecomputedConsumption() == 0);
        fg.ProcessData(Data(0, 0, 1), 0);
        CHECK(net.SentOf<DataPacket>(1).size() == 1);
    }
    SUBCASE("steady data keeps the reservation alive")
    {
        std::uint32_t seq = 0;
        for (int step = 1; step <= 80; ++step)
        {
            const SimTime now = 0.25 * step;
            net.Advance(now);
            if (step % 12 == 0)
            {
                Register(fg, 1 + step / 12);
            }
            fg.ProcessData(Data(0, 0, seq++), 0);
            fg.SweepTimers();
            REQUIRE(fg.Route(0, 0).has_value());
            CHECK(fg.Route(0, 0)->status == RouteStatus::Reserved);
        }
        CHECK(fg.ConsumedRate() == kFlow);
        CHECK(fg.ConsumedRate() == fg.RecomputedConsumption());
    }
}

TEST_CASE_FIXTURE(Fixture, "receivers record the first arrival only")
{
    MulticastAgent r(2, Params(), recovery, net);
    r.JoinGroup(0);
    const auto flow = net.Ledger().AddFlow(0, 0, 1);
    net.Ledger().RecordSent(flow);
    net.Advance(0.5);
    r.ProcessData(Data(0, 0, 0, 0.1), 1);
    r.ProcessData(Data(0, 0, 0, 0.1), 3);
    CHECK(net.Ledger().TotalDelivered() == 1);
    CHECK(AvgDelay(net.Ledger()) == doctest::Approx(0.4));
    CHECK(net.sent.empty());
}

TEST_CASE_FIXTURE(Fixture, "sweep evicts explored entries")
{
    MulticastAgent a(1, Params(), recovery, net);
    net.Advance(1.0);
    a.ProcessRreq(MakeRreq(0, {Row(0, 0, 1)}));
    net.Advance(3.9);
    a.SweepTimers();
    CHECK(a.Route(0, 0).has_value());
    net.Advance(4.0 + 1e-9);
    a.SweepTimers();
    CHECK_FALSE(a.Route(0, 0).has_value());
}
