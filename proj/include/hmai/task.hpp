#pragma once

#include <cstdint>
#include <optional>

#include "hmai/common.hpp"

namespace hmai {

/// One perception task produced by a camera frame.
struct TaskRecord {
  std::int64_t id = 0;
  int camera_id = 0;
  CameraKind group = CameraKind::FC;
  double capture_time = 0.0;  // seconds
  TaskKind task_kind = TaskKind::DET;
  Model model = Model::YOLO;
  double amount = 0.0;  // giga-MACs
  int layer_num = 0;
  double safety_time = 0.0;  // seconds
  std::optional<std::int64_t> depends_on;

  bool operator==(const TaskRecord&) const = default;
};

/// Builds a task with the model's amount and layer count filled in.
TaskRecord make_task(std::int64_t id, int camera_id, CameraKind group,
                     double capture_time, TaskKind kind, Model model,
                     double safety_time,
                     std::optional<std::int64_t> depends_on = std::nullopt);

}  // namespace hmai
