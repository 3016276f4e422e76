#include "roadnav/simworld/road_map.h"

#include <limits>
#include <random>

#include "roadnav/common/error.h"

namespace roadnav::sim {

void MapParams::validate() const {
  if (rows < 0 || cols < 0) throw InvalidInput("map: negative road count");
  if (rows + cols == 0) throw InvalidInput("map: need at least one road");
  if (!(spacing > 0) || node_jitter < 0 || bend < 0 || road_half_width <= 0 || end_margin < 0) {
    throw InvalidInput("map: bad geometry parameters");
  }
  if (t_junction_prob < 0 || t_junction_prob > 1) throw InvalidInput("map: t_junction_prob out of [0, 1]");
  const int across = std::max(rows, cols);
  const double span = (across > 0 ? across - 1 : 0) * spacing + 2 * node_jitter;
  if (!(extent > 2 * end_margin + span + 4 * road_half_width)) {
    throw InvalidInput("map: degenerate extent for the requested grid");
  }
}

Json MapParams::to_json() const {
  return Json{{"extent", extent},           {"rows", rows},
              {"cols", cols},               {"spacing", spacing},
              {"node_jitter", node_jitter}, {"bend", bend},
              {"t_junction_prob", t_junction_prob},
              {"road_half_width", road_half_width},
              {"end_margin", end_margin}};
}

MapParams MapParams::from_json(const Json& j) {
  reject_unknown_keys(j, {"extent", "rows", "cols", "spacing", "node_jitter", "bend",
                          "t_junction_prob", "road_half_width", "end_margin"},
                      "map");
  MapParams p;
  p.extent = j.value("extent", p.extent);
  p.rows = j.value("rows", p.rows);
  p.cols = j.value("cols", p.cols);
  p.spacing = j.value("spacing", p.spacing);
  p.node_jitter = j.value("node_jitter", p.node_jitter);
  p.bend = j.value("bend", p.bend);
  p.t_junction_prob = j.value("t_junction_prob", p.t_junction_prob);
  p.road_half_width = j.value("road_half_width", p.road_half_width);
  p.end_margin = j.value("end_margin", p.end_margin);
  p.validate();
  return p;
}

double RoadEdge::length() const {
  double s = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) s += (points[i] - points[i - 1]).norm();
  return s;
}

double RoadMap::distance_to_road(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Polyline& seg : segments) {
    const auto& pts = seg.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      best = std::min(best, point_segment_distance(p, pts[i], pts[i + 1]));
    }
  }
  return best;
}

double RoadMap::nearest_junction_distance(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Junction& j : junctions) best = std::min(best, (p - j.position).norm());
  return best;
}

std::vector<RoadEdge> RoadMap::edges() const {
  std::vector<RoadEdge> out;
  for (std::size_t r = 0; r < segments.size(); ++r) {
    const auto& pts = segments[r].points();
    RoadEdge cur;
    cur.road = static_cast<int>(r);
    for (std::size_t v = 0; v < pts.size(); ++v) {
      int node = -1;
      for (std::size_t k = 0; k < junctions.size(); ++k) {
        if (junctions[k].position == pts[v]) node = static_cast<int>(k);
      }
      cur.points.push_back(pts[v]);
      if (v == 0) {
        cur.from = node;
        continue;
      }
      if (node >= 0 || v + 1 == pts.size()) {
        cur.to = node;
        out.push_back(cur);
        cur = RoadEdge{};
        cur.road = static_cast<int>(r);
        cur.from = node;
        cur.points.push_back(pts[v]);
      }
    }
  }
  return out;
}

namespace {

Json vec_json(Vec2 v) { return Json::array({v.x, v.y}); }
Vec2 vec_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

Json RoadMap::to_json() const {
  Json segs = Json::array();
  for (const Polyline& s : segments) {
    Json pts = Json::array();
    for (Vec2 p : s.points()) pts.push_back(vec_json(p));
    segs.push_back(pts);
  }
  Json juncs = Json::array();
  for (const Junction& j : junctions) juncs.push_back(Json{{"position", vec_json(j.position)}, {"arms", j.arms}});
  return Json{{"seed", seed},
              {"texture_seed", texture_seed},
              {"extent", extent},
              {"road_half_width", road_half_width},
              {"params", params.to_json()},
              {"segments", segs},
              {"junctions", juncs}};
}

RoadMap RoadMap::from_json(const Json& j) {
  reject_unknown_keys(j, {"seed", "texture_seed", "extent", "road_half_width", "params", "segments",
                          "junctions"},
                      "road map");
  RoadMap m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.texture_seed = j.at("texture_seed").get<std::uint64_t>();
    m.extent = j.at("extent").get<double>();
    m.road_half_width = j.at("road_half_width").get<double>();
    m.params = MapParams::from_json(j.at("params"));
    for (const Json& s : j.at("segments")) {
      std::vector<Vec2> pts;
      for (const Json& p : s) pts.push_back(vec_from(p));
      m.segments.emplace_back(std::move(pts));
    }
    for (const Json& jn : j.at("junctions")) {
      m.junctions.push_back({vec_from(jn.at("position")), jn.at("arms").get<int>()});
    }
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("road map: ") + e.what());
  }
  return m;
}

RoadMap generate_map(std::uint64_t seed, const MapParams& params) {
  params.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  RoadMap m;
  m.seed = seed;
  m.texture_seed = rng();
  m.extent = params.extent;
  m.road_half_width = params.road_half_width;
  m.params = params;

  const double mid = 0.5 * params.extent;
  const double lo = params.end_margin;
  const double hi = params.extent - params.end_margin;
  auto grid = [&](int n, int i) { return mid + (i - 0.5 * (n - 1)) * params.spacing; };

  // Junction positions, row-major.
  std::vector<Vec2> nodes(static_cast<std::size_t>(params.rows) * params.cols);
  for (int i = 0; i < params.rows; ++i) {
    for (int k = 0; k < params.cols; ++k) {
      nodes[i * params.cols + k] = {grid(params.cols, k) + params.node_jitter * unit(rng),
                                    grid(params.rows, i) + params.node_jitter * unit(rng)};
    }
  }

  // Inserts a laterally displaced vertex between consecutive stops.
  auto bend_polyline = [&](const std::vector<Vec2>& stops) {
    std::vector<Vec2> pts{stops.front()};
    for (std::size_t s = 1; s < stops.size(); ++s) {
      const Vec2 a = stops[s - 1], b = stops[s];
      const Vec2 d = b - a;
      const double len = d.norm();
      const Vec2 normal{-d.y / len, d.x / len};
      pts.push_back(a + d * 0.5 + normal * (params.bend * unit(rng)));
      pts.push_back(b);
    }
    return pts;
  };

  std::vector<int> arms(nodes.size(), 0);
  for (int i = 0; i < params.rows; ++i) {
    std::vector<Vec2> stops{{lo, grid(params.rows, i)}};
    for (int k = 0; k < params.cols; ++k) {
      stops.push_back(nodes[i * params.cols + k]);
      arms[i * params.cols + k] += 2;
    }
    stops.push_back({hi, grid(params.rows, i)});
    m.segments.emplace_back(bend_polyline(stops));
  }
  for (int k = 0; k < params.cols; ++k) {
    bool t_top = params.rows > 0 && coin(rng) < params.t_junction_prob;
    bool t_bottom = params.rows > 0 && coin(rng) < params.t_junction_prob;
    if (params.rows == 1 && t_top && t_bottom) t_bottom = false;
    std::vector<Vec2> stops;
    if (!t_top) stops.push_back({grid(params.cols, k), lo});
    for (int i = 0; i < params.rows; ++i) {
      const bool end_here = (i == 0 && t_top) || (i == params.rows - 1 && t_bottom);
      stops.push_back(nodes[i * params.cols + k]);
      arms[i * params.cols + k] += end_here ? 1 : 2;
    }
    if (!t_bottom) stops.push_back({grid(params.cols, k), hi});
    m.segments.emplace_back(bend_polyline(stops));
  }
  for (std::size_t n = 0; n < nodes.size(); ++n) m.junctions.push_back({nodes[n], arms[n]});
  return m;
}

}  // namespace roadnav::sim
