#include "meshsim/recovery.hpp"

#include <doctest.h>

#include <vector>

using namespace meshsim;

namespace
{

class FakeHost : public RecoveryHost
{
  public:
    explicit FakeHost(NodeId self, RecoveryParams params = {})
        : manager(self, params, *this),
          m_ledger(16)
    {
    }

    SimTime Now() const override
    {
        return m_scheduler.Now();
    }

    void Send(Packet packet) override
    {
        sent.push_back(std::move(packet));
    }

    EventHandle StartTimer(TimerKind kind, std::uint64_t arg, SimTime delay) override
    {
        return m_scheduler.Schedule(Now() + delay, TimerExpiry{0, kind, arg});
    }

    bool CancelTimer(EventHandle handle) override
    {
        return m_scheduler.Cancel(handle);
    }

    MetricsLedger& Ledger() override
    {
        return m_ledger;
    }

    std::vector<Session> SessionsFor(GroupId) const override
    {
        return {Session{0, 128000}};
    }

    void InstallPatch(GroupId group, const std::vector<Session>& sessions, NodeId upstream) override
    {
        patches.push_back({group, sessions.size(), upstream});
    }

    void Reforward(const DataPacket& data) override
    {
        reforwarded.push_back(data);
    }

    void Advance(SimTime t)
    {
        m_scheduler.RunUntil(t, [this](const Event& e) {
            const auto& timer = std::get<TimerExpiry>(e.payload);
            manager.OnTimer(timer.timer, timer.arg);
        });
    }

    template <class T>
    std::vector<T> SentOf() const
    {
        std::vector<T> out;
        for (const Packet& p : sent)
        {
            if (const auto* x = std::get_if<T>(&p))
            {
                out.push_back(*x);
            }
        }
        return out;
    }

    struct Patch
    {
        GroupId group;
        std::size_t sessions;
        NodeId upstream;
    };

    RecoveryManager manager;
    std::vector<Packet> sent;
    std::vector<Patch> patches;
    std::vector<DataPacket> reforwarded;

  private:
    Scheduler m_scheduler;
    MetricsLedger m_ledger;
};

DataPacket
Data(std::uint32_t seq)
{
    return DataPacket{0, 0, seq, 512, 0.0};
}

} // namespace

TEST_CASE("overhearing the downstream forwarder clears the watch")
{
    FakeHost a(1);
    a.manager.SetChain(0, {4, 3});
    a.manager.WatchForwarding(Data(0), 0);
    CHECK(a.manager.WatchCount(0) == 1);
    a.Advance(0.003);
    a.manager.OnOverheard(Data(0), 3);
    CHECK(a.manager.WatchCount(0) == 0);
    a.Advance(5.0);
    CHECK(a.sent.empty());
}

TEST_CASE("a packet heard from downstream first is not watched")
{
    FakeHost a(1);
    a.manager.SetChain(0, {4, 3});
    a.manager.OnOverheard(Data(0), 3);
    a.manager.WatchForwarding(Data(0), 0);
    CHECK(a.manager.WatchCount(0) == 0);
}

TEST_CASE("last hop before the receiver sets no watch")
{
    FakeHost a(1);
    a.manager.SetChain(0, {4});
    a.manager.WatchForwarding(Data(0), 0);
    CHECK(a.manager.WatchCount(0) == 0);
}

TEST_CASE("break detection after the watch timeout")
{
    FakeHost a(1);
    a.manager.SetChain(0, {4, 3});
    a.manager.WatchForwarding(Data(0), 0);
    a.Advance(0.999);
    CHECK(a.sent.empty());
    a.Advance(1.0);
    const auto reqs = a.SentOf<RecoveryReq>();
    REQUIRE(reqs.size() == 1);
    CHECK(reqs[0].ttlHops == 2);
    CHECK(reqs[0].origin == 1);
    CHECK(reqs[0].candidates == std::vector<NodeId>{4, 3});
    CHECK(reqs[0].sessions.size() == 1);
    CHECK(a.manager.Recovering(0));
    CHECK(a.manager.BufferedCount(0) == 1);
    CHECK(a.Ledger().recoveryStarted == 1);

    SUBCASE("no reply within the deadline drops the buffer")
    {
        a.manager.Buffer(Data(1));
        a.Advance(1.0999);
        CHECK(a.manager.Recovering(0));
        a.Advance(1.1);
        CHECK_FALSE(a.manager.Recovering(0));
        CHECK(a.Ledger().bufferDrops == 2);
        CHECK(a.Ledger().recoveryFailed == 1);
    }
    SUBCASE("reply completes the repair and flushes in order")
    {
        a.manager.Buffer(Data(3));
        a.manager.Buffer(Data(2));
        a.manager.Buffer(Data(3));
        a.Advance(1.01);
        RecoveryReply reply{3, 1, 0, reqs[0].instance, {5}, 1};
        a.manager.ProcessRecoveryReply(reply, 5);
        CHECK_FALSE(a.manager.Recovering(0));
        REQUIRE(a.reforwarded.size() == 3);
        CHECK(a.reforwarded[0].flowSeq == 0);
        CHECK(a.reforwarded[1].flowSeq == 2);
        CHECK(a.reforwarded[2].flowSeq == 3);
        CHECK(a.Ledger().recoveryCompleted == 1);
        CHECK(a.manager.ChainFor(0)->Contains(5));
        CHECK(a.manager.WatchCount(0) == 3);
        for (const DataPacket& d : a.reforwarded)
        {
            a.manager.OnOverheard(d, 5);
        }
        CHECK(a.manager.WatchCount(0) == 0);
        a.Advance(3.0);
        CHECK(a.Ledger().recoveryFailed == 0);
    }
    SUBCASE("a reply after the deadline is ignored")
    {
        a.Advance(1.2);
        a.manager.ProcessRecoveryReply(RecoveryReply{3, 1, 0, reqs[0].instance, {}, 1}, 3);
        CHECK(a.reforwarded.empty());
        CHECK(a.Ledger().recoveryCompleted == 0);
    }
}

TEST_CASE("bounded recovery buffer drops the oldest")
{
    RecoveryParams params;
    params.bufferCapacity = 4;
    FakeHost a(1, params);
    a.manager.SetChain(0, {4, 3});
    a.manager.InitiateRecovery(0);
    for (std::uint32_t i = 0; i < 6; ++i)
    {
        a.manager.Buffer(Data(i));
    }
    CHECK(a.manager.BufferedCount(0) == 4);
    CHECK(a.Ledger().bufferDrops == 2);
    a.manager.ProcessRecoveryReply(RecoveryReply{3, 1, 0, 1, {}, 1}, 3);
    REQUIRE(a.reforwarded.size() == 4);
    CHECK(a.reforwarded.front().flowSeq == 2);
}

TEST_CASE("recovery requests")
{
    RecoveryReq req;
    req.origin = 1;
    req.group = 0;
    req.instance = 1;
    req.ttlHops = 2;
    req.candidates = {4, 3};
    req.sessions = {Session{0, 128000}};

    SUBCASE("a candidate answers toward the origin")
    {
        FakeHost c(3);
        c.manager.ProcessRecoveryReq(req, 1);
        const auto replies = c.SentOf<RecoveryReply>();
        REQUIRE(replies.size() == 1);
        CHECK(replies[0].responder == 3);
        CHECK(replies[0].nextHop == 1);
        CHECK(replies[0].pathBack.empty());
    }
    SUBCASE("a non-candidate relays with one hop less")
    {
        FakeHost c(5);
        c.manager.ProcessRecoveryReq(req, 1);
        const auto relays = c.SentOf<RecoveryReq>();
        REQUIRE(relays.size() == 1);
        CHECK(relays[0].ttlHops == 1);
        CHECK(relays[0].relays == std::vector<NodeId>{5});
    }
    SUBCASE("exhausted ttl without a match is dropped")
    {
        FakeHost c(6);
        RecoveryReq last = req;
        last.ttlHops = 1;
        last.relays = {5};
        c.manager.ProcessRecoveryReq(last, 5);
        CHECK(c.sent.empty());
    }
    SUBCASE("duplicates are processed once")
    {
        FakeHost c(5);
        c.manager.ProcessRecoveryReq(req, 1);
        c.manager.ProcessRecoveryReq(req, 2);
        CHECK(c.sent.size() == 1);
    }
    SUBCASE("a candidate two hops away answers through the relay")
    {
        FakeHost b(3);
        RecoveryReq relayed = req;
        relayed.ttlHops = 1;
        relayed.relays = {5};
        b.manager.ProcessRecoveryReq(relayed, 5);
        const auto replies = b.SentOf<RecoveryReply>();
        REQUIRE(replies.size() == 1);
        CHECK(replies[0].pathBack == std::vector<NodeId>{5});
        CHECK(replies[0].nextHop == 5);

        FakeHost relay(5);
        relay.manager.ProcessRecoveryReq(req, 1);
        relay.manager.ProcessRecoveryReply(replies[0], 3);
        REQUIRE(relay.patches.size() == 1);
        CHECK(relay.patches[0].upstream == 1);
        CHECK(relay.patches[0].sessions == 1);
        const auto forwarded = relay.SentOf<RecoveryReply>();
        REQUIRE(forwarded.size() == 1);
        CHECK(forwarded[0].nextHop == 1);

        relay.manager.ProcessRecoveryReply(replies[0], 3);
        CHECK(relay.SentOf<RecoveryReply>().size() == 1);
    }
}
