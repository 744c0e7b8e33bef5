#pragma once

#include <iosfwd>
#include <vector>

#include "platoon/instance.hpp"
#include "platoon/plan.hpp"

namespace platoon {

// Case-study economics. Distances convert to miles through an explicit
// factor so the unit never drifts silently; the default inverts 1.609344.
struct EconomicParams {
  Rational eta = Rational(1, 10);
  Rational fuel_consumption_gal_mi = Rational(1, 25);
  Rational fuel_cost_usd_gal = Rational(3);
  Rational value_of_time_usd_h = Rational(30);
  Rational miles_per_km = Rational(15625, 25146);
};

struct VehicleMetrics {
  int vehicle_id = -1;
  Rational platoon_vmt;   // miles ridden in any platoon group, leader included
  Rational follower_vmt;  // miles ridden behind another platoon member
  Rational total_vmt;
  Rational vmt_ratio;     // platoon_vmt / total_vmt
  Rational wait_min;
  Rational savings_usd;   // follower fuel money minus the value of time waited

  friend bool operator==(const VehicleMetrics&, const VehicleMetrics&) = default;
};

struct DistributionSummary {
  Rational min, q1, median, q3, max, mean;

  friend bool operator==(const DistributionSummary&, const DistributionSummary&) = default;
};

struct MetricsReport {
  std::vector<VehicleMetrics> vehicles;
  Rational aggregate_vmt_ratio;  // total platoon miles over total miles
  Rational mean_vmt_ratio;       // unweighted mean of the per-vehicle ratios
  Rational mean_wait_min;
  Rational total_savings_usd;
  DistributionSummary wait_min;
  DistributionSummary savings_usd;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport compute_metrics(const Instance& inst, const Plan& plan,
                              const EconomicParams& econ = {});

// Aggregate platoon-VMT share of a nonempty plan.
Rational vmt_ratio(const Instance& inst, const Plan& plan);

// Total dollar savings across vehicles.
Rational savings(const Instance& inst, const Plan& plan, const EconomicParams& econ = {});

// Collective fuel burn: the coordination objective with waiting priced at zero.
Rational fuel_use(const Instance& inst, const Plan& plan);

// Five-number summary plus mean of the per-vehicle waits.
DistributionSummary wait_stats(const Plan& plan);

// Exact quantile of sorted values by linear interpolation, q in [0, 1].
Rational quantile(const std::vector<Rational>& sorted_values, const Rational& q);

// One row per vehicle plus an aggregate row; exact values.
void write_metrics_csv(std::ostream& out, const MetricsReport& report);

}  // namespace platoon
