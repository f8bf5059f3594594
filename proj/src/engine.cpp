#include "meshsim/engine.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace meshsim
{

namespace
{

// std::push_heap builds a max-heap; invert so the earliest (time, seq) is on top.
struct Later
{
    bool operator()(const Event& a, const Event& b) const
    {
        if (a.fireAt != b.fireAt)
        {
            return a.fireAt > b.fireAt;
        }
        return a.seq > b.seq;
    }
};

} // namespace

EventHandle
Scheduler::Schedule(SimTime fireAt, EventPayload payload)
{
    if (!std::isfinite(fireAt))
    {
        throw SchedulingError(fmt::format("event time {} is not finite", fireAt));
    }
    if (fireAt < m_now)
    {
        throw SchedulingError(
            fmt::format("event scheduled in the past: at={:.9f} now={:.9f}", fireAt, m_now));
    }
    const std::uint64_t seq = m_nextSeq++;
    m_state.push_back(State::Pending);
    m_heap.push_back(Event{fireAt, seq, std::move(payload)});
    std::push_heap(m_heap.begin(), m_heap.end(), Later{});
    ++m_pending;
    return EventHandle(seq);
}

bool
Scheduler::Cancel(EventHandle handle)
{
    if (!IsPending(handle))
    {
        return false;
    }
    m_state[handle.Seq()] = State::Cancelled;
    --m_pending;
    return true;
}

bool
Scheduler::IsPending(EventHandle handle) const
{
    return handle.IsValid() && handle.Seq() < m_state.size() &&
           m_state[handle.Seq()] == State::Pending;
}

Event
Scheduler::PopFront()
{
    std::pop_heap(m_heap.begin(), m_heap.end(), Later{});
    Event event = std::move(m_heap.back());
    m_heap.pop_back();
    return event;
}

} // namespace meshsim
