#include "meshsim/security.hpp"

#include <sodium.h>

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

namespace meshsim
{

Authenticator::Authenticator(std::string_view secret)
{
    if (sodium_init() < 0)
    {
        throw std::runtime_error("libsodium initialisation failed");
    }
    crypto_generichash(m_key.data(), m_key.size(), reinterpret_cast<const unsigned char*>(secret.data()),
                       secret.size(), nullptr, 0);
}

AuthToken
Authenticator::Sign(NodeId origin, std::uint32_t nonce) const
{
    std::array<unsigned char, 8> message{};
    for (int i = 0; i < 4; ++i)
    {
        message[i] = static_cast<unsigned char>(origin >> (8 * i));
        message[4 + i] = static_cast<unsigned char>(nonce >> (8 * i));
    }
    AuthToken token{};
    crypto_generichash(token.data(), token.size(), message.data(), message.size(), m_key.data(),
                       m_key.size());
    return token;
}

bool
Authenticator::Verify(const JoinReq& req) const
{
    const AuthToken expected = Sign(req.originSnode, req.nonce);
    return sodium_memcmp(expected.data(), req.auth.data(), expected.size()) == 0;
}

SecurityAgent::SecurityAgent(NodeId self,
                             const SNodeConfig& config,
                             const Authenticator& auth,
                             NodeServices& services)
    : m_self(self),
      m_config(config),
      m_auth(auth),
      m_services(services),
      m_isSNode(std::find(config.snodes.begin(), config.snodes.end(), self) != config.snodes.end())
{
}

void
SecurityAgent::Join(std::uint32_t nonce)
{
    JoinReq req;
    req.originSnode = m_self;
    req.nonce = nonce;
    req.ttl = m_config.joinTtl;
    req.auth = m_auth.Sign(m_self, nonce);
    req.reversePathHint = m_self;
    m_seenJoins.insert({m_self, nonce});
    m_services.Broadcast(m_self, std::move(req));
}

void
SecurityAgent::InjectForged(NodeId claimedOrigin, std::uint32_t nonce)
{
    JoinReq req;
    req.originSnode = claimedOrigin;
    req.nonce = nonce;
    req.ttl = m_config.joinTtl;
    req.auth = m_auth.Sign(claimedOrigin, nonce);
    req.auth[0] ^= 0x5a;
    req.reversePathHint = m_self;
    m_services.Broadcast(m_self, std::move(req));
}

void
SecurityAgent::OnFrame(const Frame& frame)
{
    if (const auto* req = std::get_if<JoinReq>(frame.packet.get()))
    {
        ProcessJoinReq(*req, frame.transmitter);
    }
    else if (const auto* reply = std::get_if<JoinReply>(frame.packet.get()))
    {
        ProcessJoinReply(*reply);
    }
}

void
SecurityAgent::ProcessJoinReq(const JoinReq& req, NodeId transmitter)
{
    if (!m_auth.Verify(req))
    {
        ++m_services.Ledger().rejectedAuth;
        return;
    }
    if (!m_seenJoins.insert({req.originSnode, req.nonce}).second)
    {
        return;
    }
    if (m_isSNode && req.originSnode != m_self)
    {
        m_services.Broadcast(m_self, JoinReply{m_self, req.originSnode, transmitter, req.nonce});
        return;
    }
    if (req.ttl > 1)
    {
        m_reverseRoutes[req.originSnode] = transmitter;
        JoinReq relay = req;
        relay.ttl = req.ttl - 1;
        relay.reversePathHint = m_self;
        ++m_relayedJoins;
        m_services.Broadcast(m_self, std::move(relay));
    }
}

void
SecurityAgent::ProcessJoinReply(const JoinReply& reply)
{
    if (reply.via != m_self || reply.toSnode == m_self)
    {
        return;
    }
    if (!m_seenReplies.insert({reply.fromSnode, reply.toSnode, reply.nonce}).second)
    {
        return;
    }
    auto route = m_reverseRoutes.find(reply.toSnode);
    if (route == m_reverseRoutes.end())
    {
        return;
    }
    m_forwardingAttr = 1;
    JoinReply next = reply;
    next.via = route->second;
    m_services.Broadcast(m_self, next);
}

bool
MeshFormed(const std::vector<std::vector<NodeId>>& adjacency,
           const std::vector<NodeId>& snodes,
           const std::vector<std::uint8_t>& forwardingAttr,
           std::uint32_t joinTtl)
{
    const std::size_t n = adjacency.size();
    std::vector<bool> isSNode(n, false);
    for (NodeId s : snodes)
    {
        isSNode.at(s) = true;
    }
    constexpr auto kUnreached = std::numeric_limits<std::uint32_t>::max();

    for (NodeId s : snodes)
    {
        std::vector<std::uint32_t> hops(n, kUnreached);
        std::deque<NodeId> queue{s};
        hops[s] = 0;
        while (!queue.empty())
        {
            const NodeId u = queue.front();
            queue.pop_front();
            for (NodeId v : adjacency[u])
            {
                if (hops[v] == kUnreached)
                {
                    hops[v] = hops[u] + 1;
                    queue.push_back(v);
                }
            }
        }

        // Reachability through marked relays; s-nodes may also sit inside a path.
        std::vector<bool> reached(n, false);
        queue = {s};
        reached[s] = true;
        while (!queue.empty())
        {
            const NodeId u = queue.front();
            queue.pop_front();
            if (u != s && !isSNode[u] && forwardingAttr[u] == 0)
            {
                continue;
            }
            for (NodeId v : adjacency[u])
            {
                if (!reached[v])
                {
                    reached[v] = true;
                    queue.push_back(v);
                }
            }
        }

        for (NodeId t : snodes)
        {
            if (t != s && hops[t] <= joinTtl && !reached[t])
            {
                return false;
            }
        }
    }
    return true;
}

} // namespace meshsim
