#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "platoon/adhoc.hpp"
#include "platoon/instance.hpp"
#include "platoon/metrics.hpp"
#include "platoon/plan.hpp"

namespace platoon {

// Rationals serialize losslessly: whole numbers as JSON integers, everything
// else as the exact string Rational::str() emits ("5.7", "3/7"). Loading
// also accepts JSON floats via their shortest decimal form.
nlohmann::json rational_json(const Rational& r);
Rational rational_from_json(const nlohmann::json& j);

nlohmann::json network_json(const RoadNetwork& net);
RoadNetwork network_from_json(const nlohmann::json& j);

nlohmann::json instance_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);

nlohmann::json plan_json(const Plan& plan);
Plan plan_from_json(const nlohmann::json& j);

nlohmann::json metrics_json(const MetricsReport& rep);

// Two-column text: share then multiplier per line, # comments allowed.
CapacityFactorTable load_factor_table(std::istream& in);

// Sampled vehicle trajectories for an external viewer.
struct TimelineSample {
  int vehicle_id = -1;
  int edge_index = -1;
  Rational progress;       // position along the edge in [0, 1]
  int platoon_group = -1;  // index into plan.platoons, -1 when alone

  friend bool operator==(const TimelineSample&, const TimelineSample&) = default;
};
struct TimelineFrame {
  Rational time_min;
  std::vector<TimelineSample> vehicles;

  friend bool operator==(const TimelineFrame&, const TimelineFrame&) = default;
};
struct AnimationTimeline {
  Rational interval_min;
  std::vector<TimelineFrame> frames;

  friend bool operator==(const AnimationTimeline&, const AnimationTimeline&) = default;
};

// Samples every vehicle from first departure to final arrival at the fixed
// interval (plus the exact endpoint). Rejects plans whose entry times break
// route continuity or whose platoon groups contradict the member routes.
AnimationTimeline make_timeline(const RoadNetwork& net, const Plan& plan,
                                const Rational& interval_min);
nlohmann::json timeline_json(const AnimationTimeline& timeline);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);
void save_text_file(const std::string& path, const std::string& text);

}  // namespace platoon
