#include "roadnav/common/error.h"
#include "roadnav/navigation/navigation.h"

namespace roadnav::nav {

std::string_view to_string(Turn t) {
  switch (t) {
    case Turn::kLeft:
      return "left";
    case Turn::kRight:
      return "right";
    case Turn::kStraight:
      return "straight";
  }
  return "unknown";
}

namespace {

Turn turn_from_string(const std::string& s) {
  if (s == "left") return Turn::kLeft;
  if (s == "right") return Turn::kRight;
  if (s == "straight") return Turn::kStraight;
  throw InvalidRoute("route: unknown turn '" + s + "'");
}

}  // namespace

void RoutePlan::validate() const {
  int prev = 0;
  for (const Directive& d : directives) {
    if (d.junction < 1) throw InvalidRoute("route: junction index must be >= 1");
    if (d.junction <= prev) throw InvalidRoute("route: junction indices must strictly increase");
    prev = d.junction;
  }
  if (terminal_junction < 0) throw InvalidRoute("route: negative terminal junction");
  if (terminal_junction > 0 && terminal_junction <= prev) {
    throw InvalidRoute("route: terminal junction must come after every directive");
  }
}

Json RoutePlan::to_json() const {
  Json arr = Json::array();
  for (const Directive& d : directives) {
    arr.push_back(Json{{"junction", d.junction}, {"turn", to_string(d.turn)}});
  }
  Json j{{"directives", arr}, {"terminal", "halt"}};
  if (terminal_junction > 0) j["terminal_junction"] = terminal_junction;
  return j;
}

RoutePlan RoutePlan::from_json(const Json& j) {
  if (!j.is_object()) throw InvalidRoute("route: expected an object");
  try {
    reject_unknown_keys(j, {"directives", "terminal", "terminal_junction"}, "route");
  } catch (const InvalidInput& e) {
    throw InvalidRoute(e.what());
  }
  RoutePlan r;
  if (j.contains("terminal") && j["terminal"] != "halt") {
    throw InvalidRoute("route: the only terminal action is \"halt\"");
  }
  try {
    for (const Json& d : j.value("directives", Json::array())) {
      r.directives.push_back({d.at("junction").get<int>(), turn_from_string(d.at("turn").get<std::string>())});
    }
    r.terminal_junction = j.value("terminal_junction", 0);
  } catch (const Json::exception& e) {
    throw InvalidRoute(std::string("route: ") + e.what());
  }
  r.validate();
  return r;
}

}  // namespace roadnav::nav
