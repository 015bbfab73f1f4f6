#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "scdrl/ref_network.hpp"
#include "scdrl/util.hpp"

namespace scdrl {

// ---- Environment contract ----

struct StepResult {
    double reward = 0.0;
    bool done = false;
    double dt = 1.0;             // time advanced by this decision epoch
    double energy_or_cost = 0.0; // undiscounted physical cost of the epoch
    int violations = 0;
};

// Event-driven decision process: at each epoch the environment exposes an
// enumerable action set and per-action features for the Q network.
class Environment {
  public:
    virtual ~Environment() = default;
    virtual void reset(std::uint64_t seed) = 0;
    virtual int action_count() const = 0;
    virtual bool action_valid(int action) const {
        return action >= 0 && action < action_count();
    }
    virtual int feature_width() const = 0;
    virtual std::vector<double> features(int action) const = 0;
    virtual bool done() const = 0;
    virtual double time() const { return 0.0; }
    virtual StepResult step(int action) = 0;
};

// ---- Core DRL pieces ----

struct Experience {
    std::vector<double> features;  // (s_k, a_k) encoding
    int action = 0;
    double reward = 0.0;
    // One feature vector per feasible action in s_{k+1}; empty when terminal.
    std::vector<std::vector<double>> next_features;
    double t = 0.0;
    double t_next = 0.0;
    // Tabular variant.
    int state = -1;
    int next_state = -1;
};

class ReplayMemory {
  public:
    explicit ReplayMemory(std::size_t capacity);

    void push(Experience e);
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Experience& at(std::size_t i) const { return entries_[i]; }
    const Experience& sample(Rng& rng) const;

  private:
    std::size_t capacity_;
    std::deque<Experience> entries_;
};

struct Discounting {
    enum class Mode { Discrete, Continuous };
    Mode mode = Mode::Discrete;
    double gamma = 0.9;  // [0, 1)
    double beta = 0.01;  // > 0

    void validate() const;
    // Per-transition discount: gamma, or e^{-beta dt} in continuous time.
    double factor(double dt) const;

    static Discounting discrete(double gamma);
    static Discounting continuous(double beta);
};

// Squashed target of the clipped Bellman update: max(r/rho + gamma_eff * q',
// -1); unclipped variant returns the raw r + gamma_eff * q'.
double bellman_target(double r, double next_max_q, double gamma_eff,
                      double rho, bool clip);

// Epsilon-greedy over an enumerated action-value row; argmax ties break to
// the lowest action id.
int select_action(std::span<const double> q_values, double epsilon, Rng& rng);
int argmax_action(std::span<const double> q_values);

// ---- Tabular estimators (correctness oracle path) ----

class TabularQ {
  public:
    TabularQ(int n_states, int n_actions);

    double& at(int s, int a);
    double at(int s, int a) const;
    double max_over_actions(int s) const;
    int greedy(int s) const;
    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }

  private:
    int n_states_;
    int n_actions_;
    std::vector<double> q_;
};

// One Q-learning backup on `q` with the bootstrap taken from `qhat`.
void q_update(TabularQ& q, const TabularQ& qhat, int s, int a, double r,
              int s_next, bool terminal, const Discounting& disc, double dt,
              double alpha);

// Duplicate-estimator wrapper; roles alternate every update.
struct DoubleQ {
    TabularQ q1;
    TabularQ q2;
    bool update_q1_next = true;

    DoubleQ(int n_states, int n_actions) : q1(n_states, n_actions), q2(n_states, n_actions) {}

    void update(int s, int a, double r, int s_next, bool terminal,
                const Discounting& disc, double dt, double alpha);
    // Mean of both estimates, the value used for acting.
    double value(int s, int a) const { return 0.5 * (q1.at(s, a) + q2.at(s, a)); }
    int greedy(int s) const;
};

// ---- Network agent ----

struct AgentConfig {
    Discounting disc;
    double rho = 10.0;       // reward scale of the squashed target
    bool clip_targets = true;
    double eps_start = 1.0;
    double eps_min = 0.05;
    int anneal_episodes = 100;  // linear schedule horizon
    std::size_t memory_capacity = 10000;
    int batch_size = 32;
    double learning_rate = 0.05;
    double weight_clip = 0.25;  // keeps weights SC-exportable, see TrainConfig
    int refresh_batches = 8;    // minibatches per end-of-sequence refresh
    int offline_epochs = 20;    // SGD passes over the offline rollout set
    bool double_q = true;
    std::uint64_t seed = 1;
};

struct EpisodeMetrics {
    int episode = 0;
    int steps = 0;
    double return_sum = 0.0;      // undiscounted reward sum
    double energy_or_cost = 0.0;
    int violations = 0;
    double epsilon = 0.0;
    double mean_abs_dq = 0.0;

    static const char* csv_header();
    std::string csv_row() const;
};

// Algorithm skeleton: offline construction from simulated traces, then
// online epsilon-greedy episodes with replay and end-of-sequence network
// refresh. Two networks alternate update/bootstrap roles.
class DrlAgent {
  public:
    DrlAgent(NetworkSpec spec, AgentConfig cfg);

    double epsilon(int episode) const;
    // Q value of one (s, a) feature row, from the acting network.
    double q_value(std::span<const double> features) const;
    // Epsilon-greedy choice among the environment's currently valid actions.
    int select(const Environment& env, double eps, Rng& rng) const;

    // Offline phase: rollout episodes under annealed epsilon, Monte-Carlo
    // return-to-go Q estimates, supervised fit of the network.
    void offline_construct(Environment& env, int episodes);

    // One online execution sequence: act, store, refresh at sequence end.
    EpisodeMetrics online_episode(Environment& env, int episode,
                                  bool learn = true);

    ReplayMemory& memory() { return memory_; }
    const RefNetwork& network() const { return net_a_; }
    RefNetwork& network() { return net_a_; }
    const AgentConfig& config() const { return cfg_; }

  private:
    void refresh(Rng& rng, double& abs_dq_sum, int& dq_count);
    double next_max(const Experience& e, const RefNetwork& net) const;

    AgentConfig cfg_;
    RefNetwork net_a_;
    RefNetwork net_b_;
    bool update_a_next_ = true;
    ReplayMemory memory_;
    Rng rng_;
};

}  // namespace scdrl
