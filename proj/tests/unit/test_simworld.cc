#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.h"
#include "oracles.h"
#include "roadnav/common/error.h"
#include "roadnav/nn/network.h"
#include "roadnav/simworld/episode.h"
#include "roadnav/simworld/oracle.h"
#include "roadnav/simworld/render.h"
#include "roadnav/simworld/road_map.h"
#include "roadnav/simworld/rollout.h"
#include "roadnav/simworld/route.h"

using namespace roadnav;
using namespace roadnav::sim;

namespace {

MapParams straight_params() {
  MapParams p;
  p.rows = 1;
  p.cols = 0;
  p.node_jitter = 0.0;
  p.bend = 0.0;
  return p;
}

MapParams grid_params() {
  MapParams p;
  p.rows = 3;
  p.cols = 3;
  p.spacing = 60.0;
  return p;
}

// y of the single horizontal road of a straight map.
double road_y(const RoadMap& m) { return m.segments.at(0).points().front().y; }

bool same_map(const RoadMap& a, const RoadMap& b) { return a.to_json() == b.to_json(); }

}  // namespace

TEST_CASE("generate_map is deterministic in the seed") {
  CHECK(same_map(generate_map(1, grid_params()), generate_map(1, grid_params())));
  CHECK_FALSE(same_map(generate_map(1, grid_params()), generate_map(2, grid_params())));
  const RoadMap m = generate_map(1, grid_params());
  CHECK(same_map(RoadMap::from_json(m.to_json()), m));
}

TEST_CASE("generate_map junction counts") {
  const RoadMap straight = generate_map(3, straight_params());
  CHECK(straight.segments.size() == 1);
  CHECK(straight.junctions.empty());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RoadMap m = generate_map(seed, grid_params());
    CHECK(m.junctions.size() >= 3);
    for (const Junction& j : m.junctions) {
      CHECK(j.arms >= 3);
      // A junction lies on at least two centerlines.
      int touching = 0;
      for (const Polyline& s : m.segments) touching += s.project(j.position).distance < 1e-9;
      CHECK(touching >= 2);
    }
    for (const Polyline& s : m.segments) {
      for (const Vec2& p : s.points()) CHECK(m.in_world(p));
    }
  }
}

TEST_CASE("generate_map rejects degenerate extents") {
  MapParams p = grid_params();
  p.extent = 50.0;
  CHECK_THROWS_AS(generate_map(1, p), InvalidInput);
  p = grid_params();
  p.rows = 0;
  p.cols = 0;
  CHECK_THROWS_AS(generate_map(1, p), InvalidInput);
}

TEST_CASE("render_view of a road along the heading is a centered vertical band") {
  const RoadMap m = generate_map(3, straight_params());
  CameraModel cam;
  cam.noise_sigma = 0.0;
  const DronePose pose{200.0, road_y(m), 0.0};
  const tomo::Image img = render_view(m, pose, cam);
  REQUIRE(img.width == 100);
  REQUIRE(img.height == 100);
  // Analytic corridor: 2 * 3 m at 8/100 m per pixel.
  const double expected = 2.0 * m.road_half_width * cam.resolution / cam.footprint;
  for (int r = 0; r < img.height; r += 11) {
    int dark = 0;
    double first = -1, last = -1;
    for (int c = 0; c < img.width; ++c) {
      if (img.at(r, c) < 0.5) {
        ++dark;
        if (first < 0) first = c;
        last = c;
      }
    }
    CHECK(std::abs(dark - expected) <= 1.0);
    CHECK(std::abs(0.5 * (first + last) - 0.5 * (img.width - 1)) <= 1.0);
  }
}

TEST_CASE("render_view far from roads is background within the noise bound") {
  const RoadMap m = generate_map(3, straight_params());
  CameraModel cam;
  cam.noise_sigma = 0.05;
  const DronePose pose{200.0, road_y(m) > 200 ? 40.0 : 360.0, 0.7};
  const tomo::Image img = render_view(m, pose, cam);
  const double lo = *std::min_element(img.data.begin(), img.data.end());
  CHECK(lo >= kBackgroundIntensity - 3.0 * cam.noise_sigma - 1e-12);
  CHECK(lo > 0.5);
}

TEST_CASE("render_view is deterministic and rejects poses outside the world") {
  const RoadMap m = generate_map(5, grid_params());
  CameraModel cam;
  cam.shadow_mode = ShadowMode::kSoft;
  const DronePose pose{150.0, 120.0, 0.3};
  CHECK(render_view(m, pose, cam).data == render_view(m, pose, cam).data);
  CHECK_THROWS_AS(render_view(m, DronePose{-1.0, 10.0, 0.0}, cam), OutOfWorld);
  CameraModel tiny;
  tiny.resolution = 8;
  CHECK_THROWS_AS(tiny.validate(), InvalidInput);
}

TEST_CASE("oracle_policy examples") {
  const RoadMap m = generate_map(3, straight_params());
  const Route route = plan_route(m, 1, RouteParams{0, 100.0, 5.0, 105.0, 2000});
  OracleState st;
  const DronePose on = route.start_pose();
  CHECK(oracle_policy(m, on, route, st) == nn::ActionVector{1, 0, 0, 0, 0});

  const Vec2 t = route.path.tangent_at(route.start_s + 10.0);
  const Vec2 p = route.path.point_at(route.start_s + 10.0) + right_vector(std::atan2(t.y, t.x)) * (2.0 * m.road_half_width);
  OracleState st2;
  st2.s = route.start_s + 10.0;
  const nn::ActionVector off = oracle_policy(m, DronePose{p.x, p.y, std::atan2(t.y, t.x)}, route, st2);
  CHECK(off[nn::kHalt] == 1.0);
  CHECK(off[nn::kForward] == 0.0);
}

TEST_CASE("oracle junction flag at the inclusive radius") {
  MapParams p = grid_params();
  p.node_jitter = 0.0;
  p.bend = 0.0;
  const RoadMap m = generate_map(2, p);
  const Route route = plan_route(m, 4, RouteParams{2, 0.0, 5.0, 20.0, 2000});
  const RouteJunction& j = route.junctions.at(0);
  // Back off along the incoming tangent until the node is exactly r_j away.
  const Vec2 node = m.junctions[j.node].position;
  const Vec2 t = route.path.tangent_at(j.s - 6.0);
  const double psi = std::atan2(t.y, t.x);
  DronePose pose{node.x - 4.0 * std::cos(psi), node.y - 4.0 * std::sin(psi), psi};
  OracleState st;
  st.s = j.s - 4.0;
  const nn::ActionVector av = oracle_policy(m, pose, route, st);
  CHECK(av[nn::kForward] == 1.0);
  CHECK(av[nn::kJunction] == (m.nearest_junction_distance(pose.position()) <= 4.0 ? 1.0 : 0.0));
  CHECK(std::abs(m.nearest_junction_distance(pose.position()) - 4.0) < 1e-9);
  pose.x = node.x - 5.0 * std::cos(psi);
  pose.y = node.y - 5.0 * std::sin(psi);
  OracleState st3;
  st3.s = j.s - 5.0;
  CHECK(oracle_policy(m, pose, route, st3)[nn::kJunction] == 0.0);
}

TEST_CASE("step_dynamics examples") {
  const DronePose p{10.0, 20.0, 0.0};
  CHECK(step_dynamics(p, {0.0, 0.0, true}) == p);
  const DronePose q = step_dynamics(p, {2.0, 0.0, false}, 1.0 / 30.0);
  CHECK(q.x - 10.0 == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
  CHECK(q.y == 20.0);
  DronePose r = p;
  for (int i = 0; i < 30; ++i) r = step_dynamics(r, {0.0, std::numbers::pi, false});
  CHECK(std::abs(r.heading - std::numbers::pi) < 1e-9);
  CHECK(r.altitude == kAltitude);
  // Speed above the cap is clamped.
  const DronePose fast = step_dynamics(p, {9.0, 0.0, false}, 1.0);
  CHECK(fast.x == doctest::Approx(16.0));
}

TEST_CASE("step_dynamics displacement bound on random commands") {
  roadnav::testing::Rng rng(9);
  DronePose p{100.0, 100.0, 0.0};
  for (int i = 0; i < 5000; ++i) {
    const nav::VelocityCommand cmd{rng.uniform(0.0, 6.0), rng.uniform(-1.57, 1.57), rng.coin(0.1)};
    const DronePose q = step_dynamics(p, cmd);
    REQUIRE(std::hypot(q.x - p.x, q.y - p.y) <= 6.0 * kFrameDt + 1e-12);
    REQUIRE(q.altitude == kAltitude);
    p = q;
  }
}

TEST_CASE("demonstrations on a straight road are all Forward") {
  const RoadMap m = generate_map(3, straight_params());
  const Route route = plan_route(m, 1, RouteParams{0, 100.0, 5.0, 105.0, 2000});
  DemoConfig cfg;
  const EpisodeLog log = collect_demonstrations(m, route, 1000, 1, cfg);
  REQUIRE(log.records.size() > 100);
  for (const EpisodeRecord& r : log.records) {
    CHECK(r.target == nn::ActionVector{1, 0, 0, 0, 0});
  }
  CHECK_NOTHROW(log.validate());
}

TEST_CASE("demonstrations through two junctions form two plateaus and are deterministic") {
  const RoadMap m = generate_map(11, grid_params());
  const Route route = plan_route(m, 2, RouteParams{2, 0.0, 5.0, 20.0, 2000});
  DemoConfig cfg;
  const EpisodeLog a = collect_demonstrations(m, route, 3000, 7, cfg);
  const EpisodeLog b = collect_demonstrations(m, route, 3000, 7, cfg);
  CHECK(a == b);
  std::vector<bool> flags;
  for (const EpisodeRecord& r : a.records) flags.push_back(r.target[nn::kJunction] == 1.0);
  CHECK(roadnav::testing::count_plateaus(flags) == 2);
}

TEST_CASE("demonstration invariants over generated maps") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const RoadMap m = generate_map(seed, grid_params());
    const Route route = plan_route(m, seed + 100, RouteParams{3, 0.0, 5.0, 20.0, 2000});
    DemoConfig cfg;
    cfg.heading_noise = 0.015;
    EpisodeLog log;
    REQUIRE_NOTHROW(log = collect_demonstrations(m, route, 6000, seed, cfg));
    CHECK_NOTHROW(log.validate());
    for (std::size_t i = 0; i < log.records.size(); ++i) {
      const EpisodeRecord& r = log.records[i];
      // Label consistency, recomputed from the logged pose.
      const bool near = m.nearest_junction_distance(r.pose.position()) <= cfg.oracle.junction_radius;
      REQUIRE(r.target[nn::kJunction] == (near ? 1.0 : 0.0));
      REQUIRE(m.on_road(r.pose.position()));
      if (i > 0 && log.records[i - 1].frame_id + 1 == r.frame_id) {
        const DronePose& p = log.records[i - 1].pose;
        REQUIRE(std::hypot(r.pose.x - p.x, r.pose.y - p.y) <= 6.0 * kFrameDt + 1e-12);
      }
    }
  }
}

TEST_CASE("episode validation rejects timestamp regressions") {
  EpisodeLog log;
  log.records.resize(2);
  log.records[0].timestamp = 1.0;
  log.records[1].timestamp = 1.0;
  log.records[1].frame_id = 1;
  CHECK_THROWS(log.validate());
}

TEST_CASE("oracle closure in rollout") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const RoadMap m = generate_map(seed + 40, grid_params());
    const Route route = plan_route(m, seed, RouteParams{3, 0.0, 5.0, 20.0, 2000});
    RolloutConfig cfg;
    const RolloutResult res = rollout(m, route, oracle_as_policy(m, route), cfg);
    CHECK(res.report.completion);
    CHECK(res.report.off_road_frames == 0);
    CHECK(res.report.termination == "goal");
    CHECK(res.report.junctions_registered == res.report.junctions_ground_truth);
    CHECK(res.trace.size() == res.poses.size());
  }
}

TEST_CASE("untrained network rollout is well formed") {
  const RoadMap m = generate_map(8, grid_params());
  const Route route = plan_route(m, 3, RouteParams{3, 0.0, 5.0, 20.0, 2000});
  const nn::Network net = nn::build_network(nn::tiny_preset(), 99);
  tomo::TomoConfig tc;
  tc.output_size = net.spec().input_size;
  RolloutConfig cfg;
  cfg.max_frames = 600;
  const RolloutResult res = rollout(m, route, model_policy(net, tc), cfg);
  CHECK_FALSE(res.report.completion);
  const std::string t = res.report.termination;
  CHECK((t == "goal" || t == "max_frames" || t == "lost" || t == "out_of_world"));
  CHECK(res.report.frames > 0);
  CHECK(res.report.frames <= cfg.max_frames);
  CHECK(res.report.distance >= 0.0);
  CHECK(res.mean_latency_ms > 0.0);
  const Json j = res.report.to_json();
  for (const char* key : {"termination", "frames", "distance_m", "off_road_frames", "junctions_registered",
                          "junctions_ground_truth", "turns_expected", "turns_executed", "completion"}) {
    CHECK(j.contains(key));
  }
}
