#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hmai {

// Errors are split by cause so the CLI can map them onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

enum class Area { UB, UHW, HW };
enum class Scenario { GoStraight, Turn, Reverse };
enum class CameraKind { FC, FLSC, RLSC, FRSC, RRSC, RC };
enum class Facing { Forward, Side, Rear };
enum class TaskKind { DET, TRA };
enum class Model { YOLO, SSD, GOTURN };

inline constexpr std::array kAreas{Area::UB, Area::UHW, Area::HW};
inline constexpr std::array kScenarios{Scenario::GoStraight, Scenario::Turn,
                                       Scenario::Reverse};
inline constexpr std::array kCameraKinds{CameraKind::FC,   CameraKind::FLSC,
                                         CameraKind::RLSC, CameraKind::FRSC,
                                         CameraKind::RRSC, CameraKind::RC};
inline constexpr std::array kModels{Model::YOLO, Model::SSD, Model::GOTURN};

inline constexpr std::size_t kNumModels = kModels.size();

constexpr std::size_t index_of(Model m) { return static_cast<std::size_t>(m); }
constexpr std::size_t index_of(Area a) { return static_cast<std::size_t>(a); }
constexpr std::size_t index_of(Scenario s) {
  return static_cast<std::size_t>(s);
}
constexpr std::size_t index_of(CameraKind c) {
  return static_cast<std::size_t>(c);
}

std::string_view to_string(Area a);
std::string_view to_string(Scenario s);
std::string_view to_string(CameraKind c);
std::string_view to_string(Facing f);
std::string_view to_string(TaskKind k);
std::string_view to_string(Model m);

// Parsers accept the canonical spelling case-insensitively and throw
// ConfigError otherwise.
Area parse_area(std::string_view s);
Scenario parse_scenario(std::string_view s);
CameraKind parse_camera_kind(std::string_view s);
TaskKind parse_task_kind(std::string_view s);
Model parse_model(std::string_view s);

Facing facing_of(CameraKind c);

// Per-model workload from the CNN feature table: giga-MACs and layer count.
double model_amount_gmac(Model m);
int model_layer_num(Model m);

inline constexpr double kmh_to_ms(double kmh) { return kmh / 3.6; }

// All randomness flows through explicitly seeded engines.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline constexpr std::string_view kToolVersion = "0.3.0";

}  // namespace hmai
