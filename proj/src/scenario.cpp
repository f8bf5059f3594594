#include "meshsim/scenario.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace meshsim
{

namespace
{

template <class T>
T
As(const YAML::Node& node, const std::string& key)
{
    try
    {
        return node.as<T>();
    }
    catch (const YAML::Exception&)
    {
        throw ScenarioError(fmt::format("invalid value for key '{}'", key));
    }
}

void
RejectUnknown(const YAML::Node& map, const std::set<std::string>& known, const std::string& prefix)
{
    if (!map.IsMap())
    {
        throw ScenarioError(fmt::format("'{}' must be a mapping", prefix.empty() ? "<root>" : prefix));
    }
    for (const auto& kv : map)
    {
        const auto key = kv.first.as<std::string>();
        if (known.count(key) == 0)
        {
            throw ScenarioError(fmt::format("unknown key '{}{}'", prefix.empty() ? "" : prefix + ".", key));
        }
    }
}

std::pair<double, double>
Pair(const YAML::Node& node, const std::string& key)
{
    if (!node.IsSequence() || node.size() != 2)
    {
        throw ScenarioError(fmt::format("key '{}' expects a two-element list", key));
    }
    return {As<double>(node[0], key), As<double>(node[1], key)};
}

template <class T>
void
Read(const YAML::Node& map, const char* name, T& out, const std::string& prefix = "")
{
    if (const YAML::Node node = map[name])
    {
        out = As<T>(node, prefix.empty() ? name : prefix + "." + name);
    }
}

template <class T>
void
ReadOptional(const YAML::Node& map, const char* name, std::optional<T>& out, const std::string& key)
{
    if (const YAML::Node node = map[name])
    {
        out = As<T>(node, key + "." + name);
    }
}

Placement
ParsePlacement(const std::string& text)
{
    if (text == "random")
    {
        return Placement::Random;
    }
    if (text == "line")
    {
        return Placement::Line;
    }
    if (text == "grid")
    {
        return Placement::Grid;
    }
    if (text == "explicit")
    {
        return Placement::Explicit;
    }
    throw ScenarioError(fmt::format("invalid value for key 'placement': {}", text));
}

const char*
PlacementName(Placement p)
{
    switch (p)
    {
    case Placement::Random:
        return "random";
    case Placement::Line:
        return "line";
    case Placement::Grid:
        return "grid";
    case Placement::Explicit:
        return "explicit";
    }
    return "?";
}

std::string
Num(double v)
{
    if (std::isinf(v))
    {
        return v > 0 ? ".inf" : "-.inf";
    }
    return fmt::format("{}", v);
}

void
Require(bool ok, const char* key, const char* what)
{
    if (!ok)
    {
        throw ScenarioError(fmt::format("invalid value for key '{}': {}", key, what));
    }
}

} // namespace

BitRate
Scenario::DefaultBReq(double flowRate) const
{
    const double frameBits = 8.0 * (static_cast<double>(payload) + static_cast<double>(headerBytes));
    return static_cast<BitRate>(std::llround(flowRate * frameBits));
}

Variant
ParseVariant(const std::string& text)
{
    if (text == "odmrp")
    {
        return Variant::Odmrp;
    }
    if (text == "cqmp")
    {
        return Variant::Cqmp;
    }
    if (text == "proposed")
    {
        return Variant::Proposed;
    }
    throw ScenarioError(fmt::format("invalid value for key 'variant': {}", text));
}

ChannelModel
ParseChannelModel(const std::string& text)
{
    if (text == "ideal")
    {
        return ChannelModel::Ideal;
    }
    if (text == "csma")
    {
        return ChannelModel::Csma;
    }
    throw ScenarioError(fmt::format("invalid value for key 'channel_model': {}", text));
}

Scenario
ParseScenario(const std::string& yamlText)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(yamlText);
    }
    catch (const YAML::Exception& e)
    {
        throw ScenarioError(fmt::format("parse error: {}", e.what()));
    }
    Scenario s;
    if (root.IsNull())
    {
        return s;
    }
    RejectUnknown(root,
                  {"nodes",         "area",          "range",         "capacity",     "duration",
                   "payload",       "header_bytes",  "speed",         "pause",        "mobility",
                   "placement",     "spacing",       "grid_columns",  "positions",    "sources",
                   "receivers",     "groups",        "rate",          "b_req",        "max_delay",
                   "traffic_start", "start_jitter",  "flows",         "members",      "variant",
                   "channel_model", "queue_capacity", "seed",         "hello_interval", "rreq_interval",
                   "time_interval", "t_explored",    "t_registered",  "t_reserved",   "fg_timeout",
                   "mac_efficiency", "recovery",     "security",      "link_breaks"},
                  "");

    Read(root, "nodes", s.nodes);
    if (const YAML::Node area = root["area"])
    {
        std::tie(s.areaWidth, s.areaHeight) = Pair(area, "area");
    }
    Read(root, "range", s.range);
    Read(root, "capacity", s.capacity);
    Read(root, "duration", s.duration);
    Read(root, "payload", s.payload);
    Read(root, "header_bytes", s.headerBytes);
    if (const YAML::Node speed = root["speed"])
    {
        std::tie(s.minSpeed, s.maxSpeed) = Pair(speed, "speed");
    }
    Read(root, "pause", s.pause);
    if (const YAML::Node mobility = root["mobility"])
    {
        const auto text = As<std::string>(mobility, "mobility");
        if (text == "random_waypoint")
        {
            s.mobility = MobilityKind::RandomWaypoint;
        }
        else if (text == "static")
        {
            s.mobility = MobilityKind::Static;
        }
        else
        {
            throw ScenarioError(fmt::format("invalid value for key 'mobility': {}", text));
        }
    }
    if (const YAML::Node placement = root["placement"])
    {
        s.placement = ParsePlacement(As<std::string>(placement, "placement"));
    }
    Read(root, "spacing", s.spacing);
    Read(root, "grid_columns", s.gridColumns);
    if (const YAML::Node positions = root["positions"])
    {
        if (!positions.IsSequence())
        {
            throw ScenarioError("key 'positions' expects a list of [x, y] pairs");
        }
        for (const auto& p : positions)
        {
            const auto [x, y] = Pair(p, "positions");
            s.positions.push_back(Vec2{x, y});
        }
        if (!root["placement"])
        {
            s.placement = Placement::Explicit;
        }
    }

    Read(root, "sources", s.sources);
    Read(root, "receivers", s.receivers);
    Read(root, "groups", s.groups);
    Read(root, "rate", s.rate);
    Read(root, "b_req", s.bReq);
    Read(root, "max_delay", s.maxDelay);
    Read(root, "traffic_start", s.trafficStart);
    Read(root, "start_jitter", s.startJitter);
    if (const YAML::Node flows = root["flows"])
    {
        if (!flows.IsSequence())
        {
            throw ScenarioError("key 'flows' expects a list");
        }
        for (const auto& f : flows)
        {
            RejectUnknown(f, {"source", "group", "rate", "b_req", "max_delay", "start", "rreq_start"},
                          "flows");
            FlowConfig flow;
            Read(f, "source", flow.source, "flows");
            Read(f, "group", flow.group, "flows");
            ReadOptional(f, "rate", flow.rate, "flows");
            ReadOptional(f, "b_req", flow.bReq, "flows");
            ReadOptional(f, "max_delay", flow.maxDelay, "flows");
            ReadOptional(f, "start", flow.start, "flows");
            ReadOptional(f, "rreq_start", flow.rreqStart, "flows");
            s.flows.push_back(flow);
        }
    }
    if (const YAML::Node members = root["members"])
    {
        s.members = As<std::vector<std::vector<NodeId>>>(members, "members");
    }

    if (const YAML::Node variant = root["variant"])
    {
        s.variant = ParseVariant(As<std::string>(variant, "variant"));
    }
    if (const YAML::Node channel = root["channel_model"])
    {
        s.channelModel = ParseChannelModel(As<std::string>(channel, "channel_model"));
    }
    Read(root, "queue_capacity", s.queueCapacity);
    Read(root, "seed", s.seed);
    Read(root, "hello_interval", s.helloInterval);
    Read(root, "rreq_interval", s.rreqInterval);
    Read(root, "time_interval", s.timeInterval);
    Read(root, "t_explored", s.tExplored);
    Read(root, "t_registered", s.tRegistered);
    Read(root, "t_reserved", s.tReserved);
    Read(root, "fg_timeout", s.fgTimeout);
    Read(root, "mac_efficiency", s.macEfficiency);

    if (const YAML::Node rec = root["recovery"])
    {
        RejectUnknown(rec, {"enabled", "detect_timeout", "reply_timeout", "ttl_hops", "buffer"}, "recovery");
        Read(rec, "enabled", s.recovery.enabled, "recovery");
        Read(rec, "detect_timeout", s.recovery.detectTimeout, "recovery");
        Read(rec, "reply_timeout", s.recovery.replyTimeout, "recovery");
        Read(rec, "ttl_hops", s.recovery.ttlHops, "recovery");
        Read(rec, "buffer", s.recovery.bufferCapacity, "recovery");
    }
    if (const YAML::Node sec = root["security"])
    {
        RejectUnknown(sec, {"enabled", "snodes", "join_ttl", "key", "start", "stagger", "forged", "attacker"},
                      "security");
        Read(sec, "enabled", s.security.enabled, "security");
        Read(sec, "snodes", s.security.snodes, "security");
        Read(sec, "join_ttl", s.security.joinTtl, "security");
        Read(sec, "key", s.security.key, "security");
        Read(sec, "start", s.security.start, "security");
        Read(sec, "stagger", s.security.stagger, "security");
        Read(sec, "forged", s.security.forged, "security");
        Read(sec, "attacker", s.security.attacker, "security");
    }
    if (const YAML::Node breaks = root["link_breaks"])
    {
        if (!breaks.IsSequence())
        {
            throw ScenarioError("key 'link_breaks' expects a list");
        }
        for (const auto& b : breaks)
        {
            RejectUnknown(b, {"at", "a", "b"}, "link_breaks");
            LinkBreak lb;
            Read(b, "at", lb.at, "link_breaks");
            Read(b, "a", lb.a, "link_breaks");
            Read(b, "b", lb.b, "link_breaks");
            s.linkBreaks.push_back(lb);
        }
    }
    Validate(s);
    return s;
}

Scenario
LoadScenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ScenarioError(fmt::format("cannot open config file '{}'", path));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return ParseScenario(buffer.str());
}

void
Validate(const Scenario& s)
{
    Require(s.nodes >= 1, "nodes", "must be at least 1");
    Require(s.areaWidth > 0 && s.areaHeight > 0, "area", "dimensions must be positive");
    Require(s.range > 0, "range", "must be positive");
    Require(s.capacity > 0, "capacity", "must be positive");
    Require(s.duration > 0 && std::isfinite(s.duration), "duration", "must be positive and finite");
    Require(s.minSpeed > 0 && s.minSpeed <= s.maxSpeed, "speed", "need 0 < min <= max");
    Require(s.pause >= 0, "pause", "must be non-negative");
    Require(s.spacing > 0, "spacing", "must be positive");
    if (s.placement == Placement::Explicit)
    {
        Require(s.positions.size() == s.nodes, "positions", "need one position per node");
    }
    Require(s.sources <= s.nodes, "sources", "exceeds node count");
    Require(s.groups >= 1, "groups", "must be at least 1");
    Require(s.rate > 0, "rate", "must be positive");
    Require(s.bReq >= 0, "b_req", "must be non-negative");
    Require(s.maxDelay > 0, "max_delay", "must be positive");
    Require(s.trafficStart >= 0, "traffic_start", "must be non-negative");
    Require(s.startJitter >= 0, "start_jitter", "must be non-negative");
    for (const FlowConfig& f : s.flows)
    {
        Require(f.source < s.nodes, "flows.source", "not a valid node index");
        Require(!f.rate || *f.rate > 0, "flows.rate", "must be positive");
        Require(!f.bReq || *f.bReq > 0, "flows.b_req", "must be positive");
        Require(!f.start || *f.start >= 0, "flows.start", "must be non-negative");
        Require(!f.rreqStart || *f.rreqStart >= 0, "flows.rreq_start", "must be non-negative");
    }
    for (const auto& group : s.members)
    {
        for (NodeId m : group)
        {
            Require(m < s.nodes, "members", "not a valid node index");
        }
    }
    Require(s.queueCapacity >= 1, "queue_capacity", "must be at least 1");
    Require(s.helloInterval > 0, "hello_interval", "must be positive");
    Require(s.rreqInterval > 0, "rreq_interval", "must be positive");
    Require(s.timeInterval > 0 && s.timeInterval < s.rreqInterval, "time_interval",
            "must be positive and below rreq_interval");
    Require(s.tExplored > 0, "t_explored", "must be positive");
    Require(s.tRegistered > 0, "t_registered", "must be positive");
    Require(s.tReserved > 0, "t_reserved", "must be positive");
    Require(s.fgTimeout > 0, "fg_timeout", "must be positive");
    Require(s.macEfficiency > 0 && s.macEfficiency <= 1, "mac_efficiency", "must be in (0, 1]");
    Require(s.recovery.detectTimeout > 0, "recovery.detect_timeout", "must be positive");
    Require(s.recovery.replyTimeout > 0, "recovery.reply_timeout", "must be positive");
    Require(s.recovery.ttlHops >= 1, "recovery.ttl_hops", "must be at least 1");
    Require(s.recovery.bufferCapacity >= 1, "recovery.buffer", "must be at least 1");
    for (NodeId n : s.security.snodes)
    {
        Require(n < s.nodes, "security.snodes", "not a valid node index");
    }
    Require(s.security.joinTtl >= 1, "security.join_ttl", "must be at least 1");
    Require(s.security.attacker < s.nodes, "security.attacker", "not a valid node index");
    Require(s.security.start >= 0 && s.security.stagger >= 0, "security.start", "must be non-negative");
    for (const LinkBreak& b : s.linkBreaks)
    {
        Require(b.a < s.nodes && b.b < s.nodes && b.a != b.b, "link_breaks", "need two distinct node indices");
        Require(b.at >= 0, "link_breaks.at", "must be non-negative");
    }
}

std::string
DumpScenario(const Scenario& s)
{
    std::string out;
    auto line = [&out](std::string_view key, const std::string& value) {
        out += fmt::format("{}: {}\n", key, value);
    };
    line("nodes", fmt::format("{}", s.nodes));
    line("area", fmt::format("[{}, {}]", Num(s.areaWidth), Num(s.areaHeight)));
    line("range", Num(s.range));
    line("capacity", Num(s.capacity));
    line("duration", Num(s.duration));
    line("payload", fmt::format("{}", s.payload));
    line("header_bytes", fmt::format("{}", s.headerBytes));
    line("speed", fmt::format("[{}, {}]", Num(s.minSpeed), Num(s.maxSpeed)));
    line("pause", Num(s.pause));
    line("mobility", s.mobility == MobilityKind::Static ? "static" : "random_waypoint");
    line("placement", PlacementName(s.placement));
    line("spacing", Num(s.spacing));
    line("grid_columns", fmt::format("{}", s.gridColumns));
    if (!s.positions.empty())
    {
        std::vector<std::string> pts;
        for (const Vec2& p : s.positions)
        {
            pts.push_back(fmt::format("[{}, {}]", Num(p.x), Num(p.y)));
        }
        line("positions", fmt::format("[{}]", fmt::join(pts, ", ")));
    }
    line("sources", fmt::format("{}", s.sources));
    line("receivers", fmt::format("{}", s.receivers));
    line("groups", fmt::format("{}", s.groups));
    line("rate", Num(s.rate));
    line("b_req", fmt::format("{}", s.bReq));
    line("max_delay", Num(s.maxDelay));
    line("traffic_start", Num(s.trafficStart));
    line("start_jitter", Num(s.startJitter));
    if (!s.flows.empty())
    {
        out += "flows:\n";
        for (const FlowConfig& f : s.flows)
        {
            out += fmt::format("  - {{source: {}, group: {}", f.source, f.group);
            if (f.rate)
            {
                out += fmt::format(", rate: {}", Num(*f.rate));
            }
            if (f.bReq)
            {
                out += fmt::format(", b_req: {}", *f.bReq);
            }
            if (f.maxDelay)
            {
                out += fmt::format(", max_delay: {}", Num(*f.maxDelay));
            }
            if (f.start)
            {
                out += fmt::format(", start: {}", Num(*f.start));
            }
            if (f.rreqStart)
            {
                out += fmt::format(", rreq_start: {}", Num(*f.rreqStart));
            }
            out += "}\n";
        }
    }
    if (!s.members.empty())
    {
        std::vector<std::string> groups;
        for (const auto& g : s.members)
        {
            groups.push_back(fmt::format("[{}]", fmt::join(g, ", ")));
        }
        line("members", fmt::format("[{}]", fmt::join(groups, ", ")));
    }
    line("variant", VariantName(s.variant));
    line("channel_model", ChannelModelName(s.channelModel));
    line("queue_capacity", fmt::format("{}", s.queueCapacity));
    line("seed", fmt::format("{}", s.seed));
    line("hello_interval", Num(s.helloInterval));
    line("rreq_interval", Num(s.rreqInterval));
    line("time_interval", Num(s.timeInterval));
    line("t_explored", Num(s.tExplored));
    line("t_registered", Num(s.tRegistered));
    line("t_reserved", Num(s.tReserved));
    line("fg_timeout", Num(s.fgTimeout));
    line("mac_efficiency", Num(s.macEfficiency));
    out += "recovery:\n";
    out += fmt::format("  enabled: {}\n", s.recovery.enabled);
    out += fmt::format("  detect_timeout: {}\n", Num(s.recovery.detectTimeout));
    out += fmt::format("  reply_timeout: {}\n", Num(s.recovery.replyTimeout));
    out += fmt::format("  ttl_hops: {}\n", s.recovery.ttlHops);
    out += fmt::format("  buffer: {}\n", s.recovery.bufferCapacity);
    out += "security:\n";
    out += fmt::format("  enabled: {}\n", s.security.enabled);
    out += fmt::format("  snodes: [{}]\n", fmt::join(s.security.snodes, ", "));
    out += fmt::format("  join_ttl: {}\n", s.security.joinTtl);
    out += fmt::format("  key: \"{}\"\n", s.security.key);
    out += fmt::format("  start: {}\n", Num(s.security.start));
    out += fmt::format("  stagger: {}\n", Num(s.security.stagger));
    out += fmt::format("  forged: {}\n", s.security.forged);
    out += fmt::format("  attacker: {}\n", s.security.attacker);
    if (!s.linkBreaks.empty())
    {
        out += "link_breaks:\n";
        for (const LinkBreak& b : s.linkBreaks)
        {
            out += fmt::format("  - {{at: {}, a: {}, b: {}}}\n", Num(b.at), b.a, b.b);
        }
    }
    return out;
}

Scenario
Line5Scenario()
{
    Scenario s;
    s.nodes = 5;
    s.mobility = MobilityKind::Static;
    s.placement = Placement::Line;
    s.spacing = 200.0;
    s.channelModel = ChannelModel::Ideal;
    s.variant = Variant::Proposed;
    s.duration = 60.0;
    s.flows = {FlowConfig{.source = 0, .group = 0}};
    s.members = {{4}};
    return s;
}

} // namespace meshsim
