#include "platoon/metrics.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "platoon/network.hpp"

namespace platoon {

namespace {

void validate_econ(const EconomicParams& e) {
  if (e.eta < Rational(0) || e.eta >= Rational(1)) throw ValidationError("eta outside [0, 1)");
  if (e.fuel_consumption_gal_mi < Rational(0) || e.fuel_cost_usd_gal < Rational(0) ||
      e.value_of_time_usd_h < Rational(0) || e.miles_per_km <= Rational(0)) {
    throw ValidationError("economic parameters must be nonnegative");
  }
}

DistributionSummary summarize(std::vector<Rational> values) {
  std::sort(values.begin(), values.end());
  DistributionSummary s;
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile(values, Rational(1, 4));
  s.median = quantile(values, Rational(1, 2));
  s.q3 = quantile(values, Rational(3, 4));
  Rational sum;
  for (const Rational& v : values) sum += v;
  s.mean = sum / Rational(static_cast<std::int64_t>(values.size()));
  return s;
}

}  // namespace

Rational quantile(const std::vector<Rational>& sorted, const Rational& q) {
  if (sorted.empty()) throw ValidationError("quantile of no values");
  if (q < Rational(0) || q > Rational(1)) throw ValidationError("quantile level outside [0, 1]");
  const Rational h = Rational(static_cast<std::int64_t>(sorted.size()) - 1) * q;
  const std::int64_t lo = h.num() / h.den();  // h >= 0, so this is the floor
  const Rational frac = h - Rational(lo);
  if (frac == Rational(0)) return sorted[lo];
  return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac;
}

MetricsReport compute_metrics(const Instance& inst, const Plan& plan,
                              const EconomicParams& econ) {
  validate_econ(econ);
  if (plan.vehicles.empty()) throw ValidationError("metrics of an empty plan");
  const RoadNetwork& net = inst.net();

  // platoon groups keyed by the slot they occupy
  std::map<std::pair<int, Rational>, const PlatoonGroup*> slots;
  for (const PlatoonGroup& g : plan.platoons) {
    if (g.vehicle_ids.size() >= 2) slots[{g.edge_index, g.entry_time}] = &g;
  }

  MetricsReport rep;
  Rational platoon_total, vmt_total, ratio_sum, wait_sum;
  for (const VehiclePlan& vp : plan.vehicles) {
    VehicleMetrics row;
    row.vehicle_id = vp.vehicle_id;
    row.wait_min = vp.delay;
    for (std::size_t k = 0; k < vp.route_edges.size(); ++k) {
      const int e = vp.route_edges[k];
      const Rational miles = net.edge(e).length_km() * econ.miles_per_km;
      row.total_vmt += miles;
      auto it = slots.find({e, vp.entry_times.at(k)});
      if (it == slots.end()) continue;
      const auto& ids = it->second->vehicle_ids;
      if (!std::binary_search(ids.begin(), ids.end(), vp.vehicle_id)) continue;
      row.platoon_vmt += miles;
      if (ids.front() != vp.vehicle_id) row.follower_vmt += miles;
    }
    if (row.total_vmt == Rational(0)) throw ValidationError("vehicle drives zero miles");
    row.vmt_ratio = row.platoon_vmt / row.total_vmt;
    row.savings_usd = row.follower_vmt * econ.eta * econ.fuel_consumption_gal_mi *
                          econ.fuel_cost_usd_gal -
                      row.wait_min / Rational(60) * econ.value_of_time_usd_h;
    platoon_total += row.platoon_vmt;
    vmt_total += row.total_vmt;
    ratio_sum += row.vmt_ratio;
    wait_sum += row.wait_min;
    rep.total_savings_usd += row.savings_usd;
    rep.vehicles.push_back(std::move(row));
  }
  const Rational n(static_cast<std::int64_t>(rep.vehicles.size()));
  rep.aggregate_vmt_ratio = platoon_total / vmt_total;
  rep.mean_vmt_ratio = ratio_sum / n;
  rep.mean_wait_min = wait_sum / n;

  std::vector<Rational> waits, dollars;
  for (const VehicleMetrics& row : rep.vehicles) {
    waits.push_back(row.wait_min);
    dollars.push_back(row.savings_usd);
  }
  rep.wait_min = summarize(std::move(waits));
  rep.savings_usd = summarize(std::move(dollars));
  return rep;
}

Rational vmt_ratio(const Instance& inst, const Plan& plan) {
  return compute_metrics(inst, plan).aggregate_vmt_ratio;
}

Rational savings(const Instance& inst, const Plan& plan, const EconomicParams& econ) {
  return compute_metrics(inst, plan, econ).total_savings_usd;
}

Rational fuel_use(const Instance& inst, const Plan& plan) {
  if (plan.vehicles.empty()) return Rational(0);
  Instance unpriced = inst;
  unpriced.wait_cost_rate = Rational(0);
  for (Vehicle& v : unpriced.vehicles) v.wait_cost.reset();
  return compute_plan_objective(unpriced, plan.vehicles);
}

DistributionSummary wait_stats(const Plan& plan) {
  if (plan.vehicles.empty()) throw ValidationError("wait statistics of an empty plan");
  std::vector<Rational> waits;
  for (const VehiclePlan& vp : plan.vehicles) waits.push_back(vp.delay);
  return summarize(std::move(waits));
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
  out << "vehicle,platoon_vmt,follower_vmt,total_vmt,vmt_ratio,wait_min,savings_usd\n";
  for (const VehicleMetrics& r : report.vehicles) {
    out << r.vehicle_id << ',' << r.platoon_vmt.str() << ',' << r.follower_vmt.str() << ','
        << r.total_vmt.str() << ',' << r.vmt_ratio.str() << ',' << r.wait_min.str() << ','
        << r.savings_usd.str() << '\n';
  }
  out << "aggregate,,,," << report.aggregate_vmt_ratio.str() << ','
      << report.mean_wait_min.str() << ',' << report.total_savings_usd.str() << '\n';
}

}  // namespace platoon
