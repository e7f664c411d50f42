#include "terrain/terrain.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "common/rng.hpp"

namespace ql::terrain {

namespace {

struct Interval {
  double lo, hi;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

}  // namespace

Profile generate(uint64_t seed, const Params& params) {
  Rng rng(seed);
  Profile profile;
  profile.seed = seed;
  profile.total_length = params.length;

  // obstacle stations are evenly spaced over the span after the run-up
  const double span = params.length - params.spawn_flat;
  const double spacing = span / (params.obstacle_count + 1);
  for (int i = 0; i < params.obstacle_count; ++i) {
    const double center = params.spawn_flat + (i + 1) * spacing;
    Obstacle ob;
    ob.kind = rng.uniform_int(2) == 0 ? ObstacleKind::gap : ObstacleKind::stump;
    if (ob.kind == ObstacleKind::gap) {
      ob.width = rng.uniform(params.gap_width_min, params.gap_width_max);
    } else {
      ob.width = rng.uniform(params.stump_width_min, params.stump_width_max);
      ob.height = rng.uniform(params.stump_height_min, params.stump_height_max);
    }
    ob.x_start = center - ob.width / 2.0;
    profile.obstacles.push_back(ob);
  }

  // regions where the ground stays level: spawn run-up and stump footprints
  std::vector<Interval> locked = {{0.0, params.spawn_flat}};
  std::vector<Interval> gaps;
  for (const Obstacle& ob : profile.obstacles) {
    if (ob.kind == ObstacleKind::stump) {
      locked.push_back({ob.x_start - 1.0, ob.x_start + ob.width + 1.0});
    } else {
      gaps.push_back({ob.x_start, ob.x_start + ob.width});
    }
  }

  const bool rough = params.mode == Params::Mode::rough;
  double x = 0.0, y = params.base_height;
  profile.polyline.push_back({x, y});
  size_t next_gap = 0;
  while (x < params.length - 1e-9) {
    if (next_gap < gaps.size() && std::abs(x - gaps[next_gap].lo) < 1e-9) {
      const Interval g = gaps[next_gap++];
      profile.polyline.push_back({g.lo, y - params.gap_depth});
      profile.polyline.push_back({g.hi, y - params.gap_depth});
      profile.polyline.push_back({g.hi, y});
      x = g.hi;
      continue;
    }
    double step = rough ? params.rough_segment : params.length;
    double nx = std::min(x + step, params.length);
    if (next_gap < gaps.size()) nx = std::min(nx, gaps[next_gap].lo);
    const bool lock = std::any_of(locked.begin(), locked.end(),
                                  [&](const Interval& iv) { return iv.contains(x) || iv.contains(nx); });
    if (rough) {
      const double dy = rng.uniform(-params.rough_step, params.rough_step);
      if (!lock) {
        y = std::clamp(y + dy, params.base_height - params.rough_max_deviation,
                       params.base_height + params.rough_max_deviation);
      }
    }
    profile.polyline.push_back({nx, y});
    x = nx;
  }
  return profile;
}

std::optional<double> height_at(const Profile& profile, double x) {
  if (x < 0.0 || x > profile.total_length) {
    throw std::out_of_range("height_at: x outside terrain");
  }
  for (const Obstacle& ob : profile.obstacles) {
    if (ob.kind == ObstacleKind::gap && x > ob.x_start && x < ob.x_start + ob.width) {
      return std::nullopt;
    }
  }
  for (size_t i = 0; i + 1 < profile.polyline.size(); ++i) {
    const Vec2& a = profile.polyline[i];
    const Vec2& b = profile.polyline[i + 1];
    if (b.x() <= a.x()) continue;  // vertical gap edge
    if (x >= a.x() && x <= b.x()) {
      const double t = (x - a.x()) / (b.x() - a.x());
      return a.y() + t * (b.y() - a.y());
    }
  }
  // exactly on a vertical edge: report the upper ground level
  for (const Vec2& v : profile.polyline) {
    if (std::abs(v.x() - x) < 1e-12) return v.y();
  }
  throw std::out_of_range("height_at: no covering segment");
}

std::vector<phys::Segment> to_segments(const Profile& profile, double friction,
                                       double extra_run_out) {
  std::vector<phys::Segment> segs;
  for (size_t i = 0; i + 1 < profile.polyline.size(); ++i) {
    const Vec2& a = profile.polyline[i];
    const Vec2& b = profile.polyline[i + 1];
    if ((b - a).norm() < 1e-12) continue;
    segs.push_back({a, b, friction});
  }
  if (extra_run_out > 0.0 && !profile.polyline.empty()) {
    const Vec2& last = profile.polyline.back();
    segs.push_back({last, Vec2(last.x() + extra_run_out, last.y()), friction});
  }
  for (const Obstacle& ob : profile.obstacles) {
    if (ob.kind != ObstacleKind::stump) continue;
    const double g = height_at(profile, ob.x_start).value_or(0.0);
    const double x0 = ob.x_start, x1 = ob.x_start + ob.width, top = g + ob.height;
    segs.push_back({{x0, g}, {x0, top}, friction});
    segs.push_back({{x0, top}, {x1, top}, friction});
    segs.push_back({{x1, top}, {x1, g}, friction});
  }
  return segs;
}

void add_to_world(const Profile& profile, phys::World& world, double friction,
                  double extra_run_out) {
  for (const phys::Segment& s : to_segments(profile, friction, extra_run_out)) {
    world.add_segment(s);
  }
}

std::string serialize(const Profile& profile) {
  std::ostringstream os;
  char buf[128];
  os << "# quadloco terrain v1\n";
  os << "seed " << profile.seed << "\n";
  std::snprintf(buf, sizeof(buf), "length %.17g\n", profile.total_length);
  os << buf;
  for (const Vec2& v : profile.polyline) {
    std::snprintf(buf, sizeof(buf), "vertex %.17g %.17g\n", v.x(), v.y());
    os << buf;
  }
  for (const Obstacle& ob : profile.obstacles) {
    if (ob.kind == ObstacleKind::gap) {
      std::snprintf(buf, sizeof(buf), "obstacle gap %.17g %.17g\n", ob.x_start, ob.width);
    } else {
      std::snprintf(buf, sizeof(buf), "obstacle stump %.17g %.17g %.17g\n", ob.x_start, ob.width,
                    ob.height);
    }
    os << buf;
  }
  return os.str();
}

Profile parse(const std::string& text) {
  Profile profile;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "seed") {
      ls >> profile.seed;
    } else if (key == "length") {
      ls >> profile.total_length;
    } else if (key == "vertex") {
      double x, y;
      ls >> x >> y;
      profile.polyline.push_back({x, y});
    } else if (key == "obstacle") {
      std::string kind;
      Obstacle ob;
      ls >> kind >> ob.x_start >> ob.width;
      if (kind == "gap") {
        ob.kind = ObstacleKind::gap;
      } else if (kind == "stump") {
        ob.kind = ObstacleKind::stump;
        ls >> ob.height;
      } else {
        throw std::runtime_error("terrain parse: unknown obstacle kind '" + kind + "'");
      }
      profile.obstacles.push_back(ob);
    } else {
      throw std::runtime_error("terrain parse: unknown key '" + key + "'");
    }
    if (ls.fail()) throw std::runtime_error("terrain parse: malformed line '" + line + "'");
  }
  if (profile.polyline.size() < 2) throw std::runtime_error("terrain parse: missing vertices");
  return profile;
}

}  // namespace ql::terrain
