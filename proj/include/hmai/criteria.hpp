#pragma once

#include <cstdint>

namespace hmai {

/// Parameters of the opposite-direction minimal safe distance model.
/// Velocities in m/s, accelerations in m/s^2 (all magnitudes).
struct RssParams {
  double v1 = 0.0;  // ego
  double v2 = 0.0;  // oncoming
  double a_max_accel = 8.382;
  double a_min_brake_correct = 6.2;
  double a_min_brake = 6.2;

  void validate() const;
};

/// Minimal safe distance between two vehicles approaching each other when
/// the ego vehicle needs `rho` seconds to respond.
double rss_min_distance(double rho, const RssParams& p);

/// Inverse of rss_min_distance in rho: the response time whose minimal safe
/// distance equals `d_min`. Bisection to 1e-9 s. Throws DomainError when
/// d_min does not exceed the rho = 0 floor.
double safety_time(double d_min, const RssParams& p);

/// Detection score: response/st inside the deadline, -1 outside.
double matching_score_det(double response, double st);

/// Tracking score: +1 inside the deadline, -1 outside.
double matching_score_tra(double response, double st);

/// Platform-level aggregate of HW-Info.
struct PlatformSummary {
  double energy = 0.0;     // sum of E_i
  double time = 0.0;       // max of T_i
  double r_balance = 0.0;  // mean of R_Balance_i
  double ms = 0.0;         // sum of MS_i

  bool operator==(const PlatformSummary&) const = default;
};

struct NormalizationScales {
  double energy_ref = 1.0;
  double time_ref = 1.0;

  void validate() const;
};

double gvalue(const PlatformSummary& s, const NormalizationScales& norm);

/// Telescoping per-task reward: change in Gvalue plus change in MS.
double reward(const PlatformSummary& before, const PlatformSummary& after,
              const NormalizationScales& norm);

enum class RBalanceMode { Recursive, ArithmeticMean };

/// Per-accelerator HW-Info tuple plus its task counter.
struct HwInfo {
  double energy = 0.0;
  double time = 0.0;
  double r_balance = 0.0;
  double ms = 0.0;
  std::int64_t num_executed = 0;

  bool operator==(const HwInfo&) const = default;
};

/// Folds one completed task (e_j, t_j, ms_j, r_j) into an accelerator's
/// HW-Info. In Recursive mode R_Balance_i <- (r_j + R_Balance_i) / num,
/// in ArithmeticMean mode it is the running mean of all r_j.
HwInfo update_hw_info(const HwInfo& info, double e_j, double t_j, double ms_j,
                      double r_j, RBalanceMode mode);

}  // namespace hmai
