#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmai/envgen.hpp"
#include "hmai/platform.hpp"
#include "hmai/sched.hpp"
#include "hmai/sim.hpp"

namespace hmai {

/// How HW-Info time enters the state vector.
enum class TimeReference {
  Absolute,  // T_i / time_scale
  Elapsed,   // (T_i - now) / time_scale
};

std::string_view to_string(TimeReference r);
TimeReference parse_time_reference(std::string_view s);

/// Fixed per-field reference constants; stored with the weights so that
/// inference sees the same scaling as training.
struct StateNormalization {
  double amount_scale = 26.0;      // GMAC
  double layer_scale = 101.0;
  double safety_time_scale = 2.0;  // s
  double energy_scale = 10.0;      // J
  double time_scale = 10.0;        // s
  double ms_scale = 1000.0;
  TimeReference time_reference = TimeReference::Absolute;

  bool operator==(const StateNormalization&) const = default;
};

/// Task-Info (amount, layer_num, safety_time) followed by HW-Info
/// (E_i, T_i, R_Balance_i, MS_i) for every accelerator: 3 + 4N entries.
std::vector<double> encode_state(const TaskRecord& task,
                                 const Platform& platform, double now,
                                 const StateNormalization& norm);
void encode_state(const TaskRecord& task, const Platform& platform,
                  double now, const StateNormalization& norm,
                  std::span<double> out);

inline std::size_t state_size(std::size_t num_accelerators) {
  return 3 + 4 * num_accelerators;
}

/// Fully connected network: rectifier on hidden layers, identity output.
class QNetwork {
 public:
  QNetwork() = default;
  explicit QNetwork(std::vector<std::size_t> layer_sizes);

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  static QNetwork initialized(std::vector<std::size_t> layer_sizes, Rng& rng);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return weights_.size(); }

  Eigen::MatrixXd& weight(std::size_t l) { return weights_[l]; }
  const Eigen::MatrixXd& weight(std::size_t l) const { return weights_[l]; }
  Eigen::VectorXd& bias(std::size_t l) { return biases_[l]; }
  const Eigen::VectorXd& bias(std::size_t l) const { return biases_[l]; }

  Eigen::VectorXd forward(std::span<const double> input) const;
  /// Column-per-sample batch forward.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);

  bool operator==(const QNetwork& o) const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<Eigen::MatrixXd> weights_;  // out x in
  std::vector<Eigen::VectorXd> biases_;
};

/// Greedy with probability 1 - epsilon (ties to the lowest index),
/// uniform otherwise.
std::size_t select_action(std::span<const double> q, double epsilon, Rng& rng);
std::size_t argmax(std::span<const double> q);

struct Transition {
  std::vector<double> state;
  std::size_t action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

/// Bounded FIFO replay memory; the oldest record is evicted first.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return buffer_[i]; }

  /// Uniform sample with replacement.
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> buffer_;
};

enum class LossMode {
  StandardSa,       // Q(s, a) of the action taken
  CurrentStateMax,  // max over Q(s, .)
};

std::string_view to_string(LossMode m);
LossMode parse_loss_mode(std::string_view s);

struct AgentConfig {
  double gamma = 0.9;
  double learning_rate = 0.01;
  std::size_t memory_size = 10000;
  std::size_t batch_size = 32;
  std::size_t target_sync_interval = 300;
  std::size_t train_interval = 1;  // environment steps per SGD step
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_fraction = 0.2;  // share of training spent annealing
  LossMode loss_mode = LossMode::StandardSa;
  std::vector<std::size_t> hidden{256, 64};
  std::uint64_t seed = 7;
  StateNormalization normalization;

  void validate() const;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean squared TD error over the batch and its gradient w.r.t. `eval`.
double td_loss(const QNetwork& eval, const QNetwork& target,
               std::span<const Transition* const> batch, double gamma,
               LossMode mode, Gradients* grad = nullptr);

class DqnAgent {
 public:
  DqnAgent(std::size_t state_dim, std::size_t num_actions, AgentConfig cfg);

  const AgentConfig& config() const { return cfg_; }
  const QNetwork& eval_net() const { return eval_; }
  const QNetwork& target_net() const { return target_; }
  QNetwork& eval_net() { return eval_; }
  ReplayMemory& memory() { return memory_; }
  Rng& rng() { return rng_; }

  std::size_t act(std::span<const double> state, double epsilon);
  void remember(Transition t) { memory_.push(std::move(t)); }

  /// One SGD step on a uniform batch; nullopt while memory holds no more
  /// than batch_size records.
  std::optional<double> train_step();
  /// One SGD step on the given batch.
  double train_on_batch(std::span<const Transition* const> batch);

  void sync_target();
  std::size_t learn_steps() const { return learn_steps_; }
  std::size_t sync_count() const { return sync_count_; }

 private:
  AgentConfig cfg_;
  Rng rng_;
  QNetwork eval_;
  QNetwork target_;
  ReplayMemory memory_;
  std::size_t learn_steps_ = 0;
  std::size_t sync_count_ = 0;
};

/// One training episode: a queue and the platform it runs on.
struct TrainingEpisode {
  std::vector<TaskRecord> queue;
  PlatformConfig platform;
  double sched_overhead = 0.0;
};

using EpisodeFactory = std::function<TrainingEpisode(std::size_t episode)>;

struct LossRow {
  std::size_t episode = 0;
  std::size_t iteration = 0;
  double loss = 0.0;
};

struct TrainResult {
  QNetwork weights;
  std::vector<LossRow> loss_trace;
  std::vector<double> episode_reward;
  std::size_t sync_count = 0;
};

struct TrainOptions {
  RBalanceMode rbalance_mode = RBalanceMode::Recursive;
  std::function<void(std::size_t episode, double reward, double mean_loss)>
      on_episode;
};

TrainResult train_agent(const EpisodeFactory& env, const AgentConfig& cfg,
                        std::size_t episodes, const TrainOptions& opts = {});

/// Weights file contents.
struct AgentWeights {
  QNetwork net;
  Area area = Area::UB;
  StateNormalization normalization;
  AgentConfig config;
};

void save_weights(const AgentWeights& w, const std::string& path);
/// Throws IoError on malformed files and DomainError when the output size
/// differs from `expected_actions`.
AgentWeights load_weights(const std::string& path,
                          std::optional<std::size_t> expected_actions = {});

/// Frozen agent used as a scheduling policy.
class FlexAiScheduler : public SchedulerPolicy {
 public:
  FlexAiScheduler(QNetwork net, StateNormalization norm);
  std::string name() const override { return "flexai"; }
  std::size_t decide(const TaskRecord& t, const PlatformView& v) override;

 private:
  QNetwork net_;
  StateNormalization norm_;
  std::vector<double> state_;
};

}  // namespace hmai
