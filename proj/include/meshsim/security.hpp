#pragma once

#include "meshsim/protocol.hpp"
#include "meshsim/types.hpp"
#include "meshsim/wire.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace meshsim
{

struct SNodeConfig
{
    bool enabled{false};
    std::vector<NodeId> snodes;
    std::uint32_t joinTtl{10};
    std::string key{"meshsim-network-key"};
    /// First join time; later s-nodes follow at `stagger` spacing.
    double start{1.0};
    double stagger{0.5};
    /// Number of JoinReqs with a forged authenticator emitted by `attacker`.
    std::uint32_t forged{0};
    NodeId attacker{0};
};

/// Nonces at or above this value mark forged join requests.
inline constexpr std::uint32_t kForgedNonceBase = 0x80000000u;

/// Keyed-hash authenticator (BLAKE2b via libsodium) over origin and nonce.
class Authenticator
{
  public:
    explicit Authenticator(std::string_view secret);

    AuthToken Sign(NodeId origin, std::uint32_t nonce) const;
    bool Verify(const JoinReq& req) const;

  private:
    std::array<std::uint8_t, 32> m_key{};
};

/**
 * s-node join procedure at one node.
 *
 * An s-node floods an authenticated JoinReq with a hop budget. Other nodes
 * drop requests that fail verification, relay the first copy of each
 * (origin, nonce) while the budget lasts, and remember the previous hop. A
 * reached s-node answers toward the origin; every node the answer passes
 * through sets its forwarding attribute.
 */
class SecurityAgent
{
  public:
    SecurityAgent(NodeId self,
                  const SNodeConfig& config,
                  const Authenticator& auth,
                  NodeServices& services);

    bool IsSNode() const
    {
        return m_isSNode;
    }

    std::uint8_t ForwardingAttr() const
    {
        return m_forwardingAttr;
    }

    /// Floods this s-node's join request.
    void Join(std::uint32_t nonce);

    /// Emits a join request whose authenticator does not verify.
    void InjectForged(NodeId claimedOrigin, std::uint32_t nonce);

    void OnFrame(const Frame& frame);
    void ProcessJoinReq(const JoinReq& req, NodeId transmitter);
    void ProcessJoinReply(const JoinReply& reply);

    std::uint64_t RelayedJoins() const
    {
        return m_relayedJoins;
    }

  private:
    NodeId m_self;
    const SNodeConfig& m_config;
    const Authenticator& m_auth;
    NodeServices& m_services;
    bool m_isSNode{false};
    std::uint8_t m_forwardingAttr{0};
    std::set<std::pair<NodeId, std::uint32_t>> m_seenJoins;
    std::map<NodeId, NodeId> m_reverseRoutes;
    std::set<std::tuple<NodeId, NodeId, std::uint32_t>> m_seenReplies;
    std::uint64_t m_relayedJoins{0};
};

/**
 * True iff every pair of s-nodes within joinTtl hops of each other is joined
 * by a path whose interior nodes all carry the forwarding attribute or are
 * s-nodes themselves.
 */
bool MeshFormed(const std::vector<std::vector<NodeId>>& adjacency,
                const std::vector<NodeId>& snodes,
                const std::vector<std::uint8_t>& forwardingAttr,
                std::uint32_t joinTtl);

} // namespace meshsim
