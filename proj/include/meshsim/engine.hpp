#pragma once

#include "meshsim/types.hpp"
#include "meshsim/wire.hpp"

#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

namespace meshsim
{

enum class TimerKind : std::uint8_t
{
    MacAttempt,
    MacTxEnd,
    Sweep,
    RecoveryWatch,
    RecoveryReply,
    TriggeredHello,
    JoinStart,
    LinkBreak,
    ForgedJoin,
};

struct PacketDelivery
{
    NodeId node{kNoNode};
    Frame frame;
    std::uint64_t reception{0};
};

struct TimerExpiry
{
    NodeId node{kNoNode};
    TimerKind timer{TimerKind::Sweep};
    std::uint64_t arg{0};
};

struct TrafficTick
{
    std::uint32_t flow{0};
};

struct MobilityWaypoint
{
    NodeId node{kNoNode};
};

enum class EmitKind : std::uint8_t
{
    Hello,
    Rreq,
};

struct PeriodicEmit
{
    NodeId node{kNoNode};
    EmitKind kind{EmitKind::Hello};
};

using EventPayload =
    std::variant<PacketDelivery, TimerExpiry, TrafficTick, MobilityWaypoint, PeriodicEmit>;

struct Event
{
    SimTime fireAt{0.0};
    std::uint64_t seq{0};
    EventPayload payload;
};

class EventHandle
{
  public:
    EventHandle() = default;

    explicit EventHandle(std::uint64_t seq)
        : m_seq(seq)
    {
    }

    bool IsValid() const
    {
        return m_seq != kInvalid;
    }

    std::uint64_t Seq() const
    {
        return m_seq;
    }

  private:
    static constexpr std::uint64_t kInvalid = ~std::uint64_t{0};
    std::uint64_t m_seq{kInvalid};
};

/// Raised when an event is scheduled before the current simulated time.
class SchedulingError : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

/**
 * Deterministic discrete-event scheduler.
 *
 * Events are processed in (fireAt, seq) order where seq is issued at
 * scheduling time, so events sharing a timestamp run first-in first-out.
 */
class Scheduler
{
  public:
    SimTime Now() const
    {
        return m_now;
    }

    EventHandle Schedule(SimTime fireAt, EventPayload payload);

    /// Returns true if the event was still pending and will now never fire.
    bool Cancel(EventHandle handle);

    bool IsPending(EventHandle handle) const;

    std::size_t PendingCount() const
    {
        return m_pending;
    }

    /// Processes every event with fireAt <= tEnd, including events scheduled
    /// by handlers during the run, then advances the clock to tEnd.
    template <class Handler>
    std::size_t RunUntil(SimTime tEnd, Handler&& handler)
    {
        if (tEnd < m_now)
        {
            throw SchedulingError("run_until target precedes current time");
        }
        std::size_t processed = 0;
        while (!m_heap.empty() && m_heap.front().fireAt <= tEnd)
        {
            Event event = PopFront();
            if (m_state[event.seq] != State::Pending)
            {
                continue;
            }
            m_state[event.seq] = State::Fired;
            --m_pending;
            m_now = event.fireAt;
            handler(static_cast<const Event&>(event));
            ++processed;
        }
        m_now = tEnd;
        return processed;
    }

  private:
    enum class State : std::uint8_t
    {
        Pending,
        Fired,
        Cancelled,
    };

    Event PopFront();

    SimTime m_now{0.0};
    std::uint64_t m_nextSeq{0};
    std::size_t m_pending{0};
    std::vector<Event> m_heap;
    std::vector<State> m_state;
};

} // namespace meshsim
