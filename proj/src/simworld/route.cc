#include "roadnav/simworld/route.h"

#include <algorithm>
#include <numbers>
#include <random>

#include "roadnav/common/error.h"

namespace roadnav::sim {
namespace {

nav::Turn turn_from_string(const std::string& s) {
  if (s == "left") return nav::Turn::kLeft;
  if (s == "right") return nav::Turn::kRight;
  if (s == "straight") return nav::Turn::kStraight;
  throw InvalidInput("route: unknown turn '" + s + "'");
}

// Edge traversal in a chosen direction.
struct Step {
  int edge;
  bool forward;
};

std::vector<Vec2> oriented(const RoadEdge& e, bool forward) {
  std::vector<Vec2> pts = e.points;
  if (!forward) std::reverse(pts.begin(), pts.end());
  return pts;
}

}  // namespace

DronePose Route::start_pose() const {
  const Vec2 p = path.point_at(start_s);
  const Vec2 t = path.tangent_at(start_s);
  return {p.x, p.y, std::atan2(t.y, t.x), kAltitude};
}

nav::RoutePlan Route::plan() const {
  nav::RoutePlan plan;
  for (std::size_t i = 0; i < junctions.size(); ++i) {
    plan.directives.push_back({static_cast<int>(i) + 1, junctions[i].turn});
  }
  return plan;
}

Json Route::to_json() const {
  Json pts = Json::array();
  for (Vec2 p : path.points()) pts.push_back(Json::array({p.x, p.y}));
  Json js = Json::array();
  for (const RouteJunction& j : junctions) {
    js.push_back(Json{{"node", j.node}, {"s", j.s}, {"turn", std::string(nav::to_string(j.turn))}});
  }
  return Json{{"path", pts}, {"junctions", js}, {"start_s", start_s}, {"goal_s", goal_s}};
}

Route Route::from_json(const Json& j) {
  reject_unknown_keys(j, {"path", "junctions", "start_s", "goal_s"}, "route");
  try {
    Route r;
    std::vector<Vec2> pts;
    for (const Json& p : j.at("path")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    r.path = Polyline(std::move(pts));
    for (const Json& jn : j.at("junctions")) {
      r.junctions.push_back({jn.at("node").get<int>(), jn.at("s").get<double>(),
                             turn_from_string(jn.at("turn").get<std::string>())});
    }
    r.start_s = j.at("start_s").get<double>();
    r.goal_s = j.at("goal_s").get<double>();
    if (!(r.start_s >= 0 && r.goal_s > r.start_s && r.goal_s <= r.path.length())) {
      throw InvalidRoute("route: start/goal outside the path");
    }
    return r;
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("route: ") + e.what());
  }
}

Json RouteParams::to_json() const {
  return Json{{"junctions", junctions},     {"min_length", min_length}, {"start_offset", start_offset},
              {"tail", tail}, {"max_attempts", max_attempts}};
}

RouteParams RouteParams::from_json(const Json& j) {
  reject_unknown_keys(j, {"junctions", "min_length", "start_offset", "tail", "max_attempts"}, "route params");
  RouteParams p;
  p.junctions = j.value("junctions", p.junctions);
  p.min_length = j.value("min_length", p.min_length);
  p.start_offset = j.value("start_offset", p.start_offset);
  p.tail = j.value("tail", p.tail);
  p.max_attempts = j.value("max_attempts", p.max_attempts);
  if (p.junctions < 0 || p.start_offset < 0 || p.tail <= 0 || p.max_attempts < 1) {
    throw InvalidInput("route params: out of range");
  }
  return p;
}

nav::Turn classify_turn(Vec2 incoming, Vec2 outgoing) {
  const double angle = std::atan2(incoming.cross(outgoing), incoming.dot(outgoing));
  if (std::abs(angle) < std::numbers::pi / 4) return nav::Turn::kStraight;
  return angle > 0 ? nav::Turn::kRight : nav::Turn::kLeft;
}

Route plan_route(const RoadMap& map, std::uint64_t seed, const RouteParams& params) {
  const std::vector<RoadEdge> edges = map.edges();
  std::vector<int> dead_ends;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if ((edges[e].from < 0) != (edges[e].to < 0)) dead_ends.push_back(static_cast<int>(e));
    if (edges[e].from < 0 && edges[e].to < 0 && params.junctions == 0) dead_ends.push_back(static_cast<int>(e));
  }
  if (dead_ends.empty()) throw InvalidRoute("route: map has no road end to start from");

  // Outgoing traversals per junction.
  std::vector<std::vector<Step>> out(map.junctions.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].from >= 0) out[edges[e].from].push_back({static_cast<int>(e), true});
    if (edges[e].to >= 0) out[edges[e].to].push_back({static_cast<int>(e), false});
  }

  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    const int first = dead_ends[std::uniform_int_distribution<std::size_t>(0, dead_ends.size() - 1)(rng)];
    std::vector<Step> steps{{first, edges[first].from < 0}};
    std::vector<int> nodes;
    bool ok = true;
    while (true) {
      const Step& last = steps.back();
      const int node = last.forward ? edges[last.edge].to : edges[last.edge].from;
      if (static_cast<int>(nodes.size()) == params.junctions) break;
      if (node < 0) {
        ok = false;
        break;
      }
      nodes.push_back(node);
      std::vector<Step> options;
      for (const Step& s : out[node]) {
        if (s.edge == last.edge) continue;
        const int far = s.forward ? edges[s.edge].to : edges[s.edge].from;
        if (far >= 0 && std::find(nodes.begin(), nodes.end(), far) != nodes.end()) continue;
        if (far < 0 && static_cast<int>(nodes.size()) < params.junctions) continue;
        options.push_back(s);
      }
      if (options.empty()) {
        ok = false;
        break;
      }
      steps.push_back(options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)]);
    }
    if (!ok) continue;

    std::vector<Vec2> pts;
    std::vector<std::size_t> node_vertex;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const std::vector<Vec2> seg = oriented(edges[steps[k].edge], steps[k].forward);
      if (k > 0) node_vertex.push_back(pts.size() - 1);
      pts.insert(pts.end(), seg.begin() + (k == 0 ? 0 : 1), seg.end());
    }
    Route r;
    r.path = Polyline(pts);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double s = r.path.arc_at(node_vertex[k]);
      const Vec2 at = r.path.point_at(s);
      const Vec2 in = at - r.path.point_at(s - 10.0);
      const Vec2 outd = r.path.point_at(s + 10.0) - at;
      r.junctions.push_back({nodes[k], s, classify_turn(in, outd)});
    }
    const double exit_start = nodes.empty() ? 0.0 : r.junctions.back().s;
    const double exit_len = r.path.length() - exit_start;
    r.start_s = params.start_offset;
    r.goal_s = exit_start + std::min(params.tail, exit_len - params.start_offset);
    if (!(r.goal_s > r.start_s) || r.length() < params.min_length) continue;
    if (!nodes.empty() && r.junctions.front().s <= r.start_s) continue;
    return r;
  }
  throw InvalidRoute("route: no walk satisfies the requested junction count and length");
}

}  // namespace roadnav::sim
