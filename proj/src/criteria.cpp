#include "hmai/criteria.hpp"

#include <cmath>
#include <string>

#include "hmai/common.hpp"

namespace hmai {

void RssParams::validate() const {
  if (!(a_max_accel > 0.0) || !(a_min_brake_correct > 0.0) ||
      !(a_min_brake > 0.0)) {
    throw ConfigError("rss accelerations must be positive");
  }
  if (!(v1 >= 0.0) || !std::isfinite(v1) || !std::isfinite(v2)) {
    throw ConfigError("rss velocities must be finite and v1 >= 0");
  }
}

double rss_min_distance(double rho, const RssParams& p) {
  if (!(rho >= 0.0)) throw DomainError("response time rho must be >= 0");
  const double v2 = std::fabs(p.v2);
  const double v1_rho = p.v1 + rho * p.a_max_accel;
  const double v2_rho = v2 + rho * p.a_max_accel;
  return (p.v1 + v1_rho) / 2.0 * rho +
         v1_rho * v1_rho / (2.0 * p.a_min_brake_correct) +
         (v2 + v2_rho) / 2.0 * rho + v2_rho * v2_rho / (2.0 * p.a_min_brake);
}

double safety_time(double d_min, const RssParams& p) {
  const double floor = rss_min_distance(0.0, p);
  if (!(d_min > floor)) {
    throw DomainError("camera range insufficient at this velocity: range " +
                      std::to_string(d_min) + " m <= floor " +
                      std::to_string(floor) + " m");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (rss_min_distance(hi, p) < d_min) {
    lo = hi;
    hi *= 2.0;
  }
  // d(rho) is strictly increasing, so the root stays bracketed.
  while (hi - lo > 1e-11) {
    const double mid = 0.5 * (lo + hi);
    if (rss_min_distance(mid, p) < d_min) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double matching_score_det(double response, double st) {
  if (response > st) return -1.0;
  return response / st;
}

double matching_score_tra(double response, double st) {
  return response > st ? -1.0 : 1.0;
}

void NormalizationScales::validate() const {
  if (!(energy_ref > 0.0) || !(time_ref > 0.0)) {
    throw DomainError("normalization scales must be positive");
  }
}

double gvalue(const PlatformSummary& s, const NormalizationScales& norm) {
  norm.validate();
  return (-s.energy / norm.energy_ref - s.time / norm.time_ref + s.r_balance) /
         3.0;
}

double reward(const PlatformSummary& before, const PlatformSummary& after,
              const NormalizationScales& norm) {
  return gvalue(after, norm) - gvalue(before, norm) + (after.ms - before.ms);
}

HwInfo update_hw_info(const HwInfo& info, double e_j, double t_j, double ms_j,
                      double r_j, RBalanceMode mode) {
  HwInfo out = info;
  out.energy += e_j;
  out.time += t_j;
  out.ms += ms_j;
  out.num_executed += 1;
  const auto num = static_cast<double>(out.num_executed);
  if (mode == RBalanceMode::Recursive) {
    out.r_balance = (r_j + info.r_balance) / num;
  } else {
    out.r_balance = info.r_balance + (r_j - info.r_balance) / num;
  }
  return out;
}

}  // namespace hmai
