#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "physics/world.hpp"

namespace ql::terrain {

using phys::Vec2;

enum class ObstacleKind { gap, stump };

struct Obstacle {
  ObstacleKind kind;
  double x_start = 0.0;
  double width = 0.0;
  double height = 0.0;  // stumps only
};

struct Profile {
  std::vector<Vec2> polyline;
  std::vector<Obstacle> obstacles;
  double total_length = 0.0;
  uint64_t seed = 0;
};

struct Params {
  enum class Mode { flat, rough };
  Mode mode = Mode::rough;
  double length = 93.0;
  int obstacle_count = 5;
  double base_height = 5.0;
  double spawn_flat = 15.0;  // obstacle-free run-up after spawn
  double gap_width_min = 2.0, gap_width_max = 6.0;
  double gap_depth = 4.0;
  double stump_width_min = 1.0, stump_width_max = 3.0;
  double stump_height_min = 1.0, stump_height_max = 3.0;
  double rough_segment = 1.2;       // polyline segment length in rough mode
  double rough_step = 0.5;          // per-segment height step amplitude
  double rough_max_deviation = 2.0; // cumulative clamp around base height
};

// Pure function of (seed, params).
Profile generate(uint64_t seed, const Params& params);

// Piecewise-linear ground height; nullopt inside a gap. Throws
// std::out_of_range outside [0, total_length].
std::optional<double> height_at(const Profile& profile, double x);

// Registers the profile as static collision segments (ground polyline with
// gap walls/floors, plus three segments per stump). extra_run_out extends the
// last ground level past total_length so the robot can cross the finish line.
void add_to_world(const Profile& profile, phys::World& world, double friction = 2.5,
                  double extra_run_out = 20.0);

// Collision segments only (for raycasts against a profile without a world).
std::vector<phys::Segment> to_segments(const Profile& profile, double friction = 2.5,
                                       double extra_run_out = 20.0);

std::string serialize(const Profile& profile);
Profile parse(const std::string& text);  // throws std::runtime_error on malformed input

}  // namespace ql::terrain
