#pragma once

#include "meshsim/types.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace meshsim
{

// Field layout used for sizing: ids, rates, times and integer counters are
// 32 bits wide, every list carries a 16-bit length prefix.
inline constexpr std::uint64_t kFieldBits = 32;
inline constexpr std::uint64_t kListPrefixBits = 16;
inline constexpr std::uint64_t kAuthTokenBytes = 16;

/// Periodic one-hop neighborhood announcement. Never relayed.
struct Hello
{
    NodeId origin{kNoNode};
    BitRate bAvailable{0};
    BitRate consumedRate{0};
};

struct SourceRow
{
    NodeId source{kNoNode};
    GroupId group{0};
    std::uint32_t seq{0};
    BitRate bReq{0};
    double maxDelay{kInfinity};
    std::uint32_t hopCount{0};
};

struct NeighborInfo
{
    NodeId id{kNoNode};
    std::uint32_t coNeighbor{0};
};

struct Rreq
{
    std::vector<SourceRow> rows;
    NodeId relay{kNoNode};
    std::vector<NeighborInfo> relayNeighbors;
};

struct ReplyEntry
{
    NodeId source{kNoNode};
    GroupId group{0};
    std::uint32_t seq{0};
    NodeId nextNode{kNoNode};
};

struct Reply
{
    std::vector<ReplyEntry> entries;
    NodeId origin{kNoNode};
    // Receiver first, then every forwarding node the reply crossed.
    std::vector<NodeId> fgChain;
};

struct DataPacket
{
    NodeId source{kNoNode};
    GroupId group{0};
    std::uint32_t flowSeq{0};
    std::uint32_t payloadBytes{512};
    SimTime sentAt{0.0};
};

/// A (source, group) session being carried through a repaired hop.
struct Session
{
    NodeId source{kNoNode};
    BitRate bReq{0};
};

struct RecoveryReq
{
    NodeId origin{kNoNode};
    GroupId group{0};
    std::uint32_t instance{0};
    std::uint32_t ttlHops{2};
    std::vector<NodeId> candidates;
    std::vector<NodeId> relays;
    std::vector<Session> sessions;
};

struct RecoveryReply
{
    NodeId responder{kNoNode};
    NodeId origin{kNoNode};
    GroupId group{0};
    std::uint32_t instance{0};
    // Relays between responder and origin, nearest to the responder first.
    std::vector<NodeId> pathBack;
    NodeId nextHop{kNoNode};
};

using AuthToken = std::array<std::uint8_t, kAuthTokenBytes>;

struct JoinReq
{
    NodeId originSnode{kNoNode};
    std::uint32_t nonce{0};
    std::uint32_t ttl{0};
    AuthToken auth{};
    NodeId reversePathHint{kNoNode};
};

struct JoinReply
{
    NodeId fromSnode{kNoNode};
    NodeId toSnode{kNoNode};
    NodeId via{kNoNode};
    std::uint32_t nonce{0};
};

using Packet =
    std::variant<Hello, Rreq, Reply, DataPacket, RecoveryReq, RecoveryReply, JoinReq, JoinReply>;

enum class PacketKind : std::uint8_t
{
    Hello,
    Rreq,
    Reply,
    Data,
    RecoveryReq,
    RecoveryReply,
    JoinReq,
    JoinReply,
};

inline constexpr std::size_t kPacketKindCount = 8;

PacketKind KindOf(const Packet& packet);
const char* KindName(PacketKind kind);

inline bool IsControl(PacketKind kind)
{
    return kind != PacketKind::Data;
}

/// Size of the packet's own fields (data payload included), in bits.
std::uint64_t SerializedSize(const Packet& packet);

/// Key fields of a packet for the trace, space separated `key=value` pairs.
std::string Describe(const Packet& packet);

/// A packet on the air together with the node that transmitted it.
struct Frame
{
    NodeId transmitter{kNoNode};
    std::shared_ptr<const Packet> packet;
};

} // namespace meshsim
