#include "meshsim/wire.hpp"

#include <fmt/format.h>

#include <cmath>

namespace meshsim
{

double
Distance(const Vec2& a, const Vec2& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

const char*
VariantName(Variant v)
{
    switch (v)
    {
    case Variant::Odmrp:
        return "odmrp";
    case Variant::Cqmp:
        return "cqmp";
    case Variant::Proposed:
        return "proposed";
    }
    return "?";
}

namespace
{

template <class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};

constexpr std::uint64_t
ListBits(std::size_t count, std::uint64_t elementBits)
{
    return kListPrefixBits + count * elementBits;
}

std::string
JoinIds(const std::vector<NodeId>& ids)
{
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i)
    {
        if (i != 0)
        {
            out += ',';
        }
        out += std::to_string(ids[i]);
    }
    return out.empty() ? "-" : out;
}

} // namespace

PacketKind
KindOf(const Packet& packet)
{
    return static_cast<PacketKind>(packet.index());
}

const char*
KindName(PacketKind kind)
{
    switch (kind)
    {
    case PacketKind::Hello:
        return "HELLO";
    case PacketKind::Rreq:
        return "RREQ";
    case PacketKind::Reply:
        return "REPLY";
    case PacketKind::Data:
        return "DATA";
    case PacketKind::RecoveryReq:
        return "RECREQ";
    case PacketKind::RecoveryReply:
        return "RECREP";
    case PacketKind::JoinReq:
        return "JOINREQ";
    case PacketKind::JoinReply:
        return "JOINREP";
    }
    return "?";
}

std::uint64_t
SerializedSize(const Packet& packet)
{
    return std::visit(
        Overloaded{
            [](const Hello&) { return 3 * kFieldBits; },
            [](const Rreq& p) {
                return ListBits(p.rows.size(), 6 * kFieldBits) + kFieldBits +
                       ListBits(p.relayNeighbors.size(), 2 * kFieldBits);
            },
            [](const Reply& p) {
                return ListBits(p.entries.size(), 4 * kFieldBits) + kFieldBits +
                       ListBits(p.fgChain.size(), kFieldBits);
            },
            [](const DataPacket& p) {
                return 4 * kFieldBits + std::uint64_t{p.payloadBytes} * 8;
            },
            [](const RecoveryReq& p) {
                return 4 * kFieldBits + ListBits(p.candidates.size(), kFieldBits) +
                       ListBits(p.relays.size(), kFieldBits) +
                       ListBits(p.sessions.size(), 2 * kFieldBits);
            },
            [](const RecoveryReply& p) {
                return 5 * kFieldBits + ListBits(p.pathBack.size(), kFieldBits);
            },
            [](const JoinReq&) { return 4 * kFieldBits + kAuthTokenBytes * 8; },
            [](const JoinReply&) { return 4 * kFieldBits; },
        },
        packet);
}

std::string
Describe(const Packet& packet)
{
    return std::visit(
        Overloaded{
            [](const Hello& p) {
                return fmt::format("origin={} bav={} cons={}", p.origin, p.bAvailable, p.consumedRate);
            },
            [](const Rreq& p) {
                std::string rows;
                for (const auto& r : p.rows)
                {
                    rows += fmt::format("{}{}:{}:{}:{}", rows.empty() ? "" : ",", r.source, r.group,
                                        r.seq, r.hopCount);
                }
                return fmt::format("relay={} rows={} nbrs={}", p.relay, rows, p.relayNeighbors.size());
            },
            [](const Reply& p) {
                std::string entries;
                for (const auto& e : p.entries)
                {
                    entries += fmt::format("{}{}:{}:{}:{}", entries.empty() ? "" : ",", e.source,
                                           e.group, e.seq, e.nextNode);
                }
                return fmt::format("origin={} entries={} chain={}", p.origin, entries,
                                   JoinIds(p.fgChain));
            },
            [](const DataPacket& p) {
                return fmt::format("src={} grp={} seq={} sent={:.9f}", p.source, p.group, p.flowSeq, p.sentAt);
            },
            [](const RecoveryReq& p) {
                return fmt::format("origin={} grp={} inst={} ttl={} cand={} relays={}", p.origin,
                                   p.group, p.instance, p.ttlHops, JoinIds(p.candidates),
                                   JoinIds(p.relays));
            },
            [](const RecoveryReply& p) {
                return fmt::format("resp={} origin={} grp={} inst={} path={} next={}", p.responder,
                                   p.origin, p.group, p.instance, JoinIds(p.pathBack), p.nextHop);
            },
            [](const JoinReq& p) {
                return fmt::format("origin={} nonce={} ttl={} hint={}", p.originSnode, p.nonce, p.ttl,
                                   p.reversePathHint);
            },
            [](const JoinReply& p) {
                return fmt::format("from={} to={} via={} nonce={}", p.fromSnode, p.toSnode, p.via,
                                   p.nonce);
            },
        },
        packet);
}

} // namespace meshsim
