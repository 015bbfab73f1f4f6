#include "scdrl/drl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace scdrl {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw std::invalid_argument("replay capacity must be positive");
    }
}

void ReplayMemory::push(Experience e) {
    if (!std::isfinite(e.reward)) {
        throw std::invalid_argument("non-finite reward");
    }
    if (e.t_next < e.t) {
        throw std::invalid_argument("experience timestamps out of order");
    }
    if (entries_.size() == capacity_) {
        entries_.pop_front();
    }
    entries_.push_back(std::move(e));
}

const Experience& ReplayMemory::sample(Rng& rng) const {
    if (entries_.empty()) {
        throw std::logic_error("sampling from empty replay memory");
    }
    std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
    return entries_[pick(rng)];
}

void Discounting::validate() const {
    if (mode == Mode::Discrete) {
        if (gamma < 0.0 || gamma >= 1.0) {
            throw std::invalid_argument("gamma must lie in [0, 1)");
        }
    } else if (beta <= 0.0) {
        throw std::invalid_argument("beta must be positive");
    }
}

double Discounting::factor(double dt) const {
    if (mode == Mode::Discrete) {
        return gamma;
    }
    if (dt < 0.0) {
        throw std::invalid_argument("negative time step");
    }
    return std::exp(-beta * dt);
}

Discounting Discounting::discrete(double gamma) {
    Discounting d;
    d.mode = Mode::Discrete;
    d.gamma = gamma;
    d.validate();
    return d;
}

Discounting Discounting::continuous(double beta) {
    Discounting d;
    d.mode = Mode::Continuous;
    d.beta = beta;
    d.validate();
    return d;
}

double bellman_target(double r, double next_max_q, double gamma_eff,
                      double rho, bool clip) {
    if (rho <= 0.0) {
        throw std::invalid_argument("rho must be positive");
    }
    if (!clip) {
        return r + gamma_eff * next_max_q;
    }
    return std::max(r / rho + gamma_eff * next_max_q, -1.0);
}

int argmax_action(std::span<const double> q_values) {
    if (q_values.empty()) {
        throw std::invalid_argument("empty action set");
    }
    int best = 0;
    for (int i = 1; i < static_cast<int>(q_values.size()); ++i) {
        if (q_values[i] > q_values[best]) {
            best = i;
        }
    }
    return best;
}

int select_action(std::span<const double> q_values, double epsilon, Rng& rng) {
    if (q_values.empty()) {
        throw std::invalid_argument("empty action set");
    }
    if (epsilon < 0.0 || epsilon > 1.0) {
        throw std::invalid_argument("epsilon must lie in [0, 1]");
    }
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::uniform_int_distribution<int> pick(
            0, static_cast<int>(q_values.size()) - 1);
        return pick(rng);
    }
    return argmax_action(q_values);
}

TabularQ::TabularQ(int n_states, int n_actions)
    : n_states_(n_states), n_actions_(n_actions),
      q_(static_cast<std::size_t>(n_states) * n_actions, 0.0) {
    if (n_states < 1 || n_actions < 1) {
        throw std::invalid_argument("tabular Q needs states and actions");
    }
}

double& TabularQ::at(int s, int a) {
    return q_[static_cast<std::size_t>(s) * n_actions_ + a];
}

double TabularQ::at(int s, int a) const {
    return q_[static_cast<std::size_t>(s) * n_actions_ + a];
}

double TabularQ::max_over_actions(int s) const {
    double m = at(s, 0);
    for (int a = 1; a < n_actions_; ++a) {
        m = std::max(m, at(s, a));
    }
    return m;
}

int TabularQ::greedy(int s) const {
    int best = 0;
    for (int a = 1; a < n_actions_; ++a) {
        if (at(s, a) > at(s, best)) {
            best = a;
        }
    }
    return best;
}

void q_update(TabularQ& q, const TabularQ& qhat, int s, int a, double r,
              int s_next, bool terminal, const Discounting& disc, double dt,
              double alpha) {
    if (alpha <= 0.0 || alpha > 1.0) {
        throw std::invalid_argument("alpha must lie in (0, 1]");
    }
    double bootstrap = terminal ? 0.0 : qhat.max_over_actions(s_next);
    double target = r + disc.factor(dt) * bootstrap;
    if (!std::isfinite(target)) {
        throw std::runtime_error("non-finite Q update target");
    }
    q.at(s, a) += alpha * (target - q.at(s, a));
}

void DoubleQ::update(int s, int a, double r, int s_next, bool terminal,
                     const Discounting& disc, double dt, double alpha) {
    if (update_q1_next) {
        q_update(q1, q2, s, a, r, s_next, terminal, disc, dt, alpha);
    } else {
        q_update(q2, q1, s, a, r, s_next, terminal, disc, dt, alpha);
    }
    update_q1_next = !update_q1_next;
}

int DoubleQ::greedy(int s) const {
    int best = 0;
    for (int a = 1; a < q1.n_actions(); ++a) {
        if (value(s, a) > value(s, best)) {
            best = a;
        }
    }
    return best;
}

const char* EpisodeMetrics::csv_header() {
    return "episode,steps,return,energy_or_cost,violations,epsilon,"
           "mean_abs_dq";
}

std::string EpisodeMetrics::csv_row() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%d,%.6g,%.6g,%d,%.4g,%.6g", episode,
                  steps, return_sum, energy_or_cost, violations, epsilon,
                  mean_abs_dq);
    return buf;
}

DrlAgent::DrlAgent(NetworkSpec spec, AgentConfig cfg)
    : cfg_(cfg),
      net_a_(spec, SeedSplitter(cfg.seed).derive(1)),
      net_b_(spec, SeedSplitter(cfg.seed).derive(2)),
      memory_(cfg.memory_capacity), rng_(SeedSplitter(cfg.seed).derive(3)) {
    cfg_.disc.validate();
    if (cfg_.rho <= 0.0) {
        throw std::invalid_argument("rho must be positive");
    }
    if (cfg_.eps_min < 0.0 || cfg_.eps_start > 1.0 ||
        cfg_.eps_min > cfg_.eps_start) {
        throw std::invalid_argument("bad epsilon schedule");
    }
}

double DrlAgent::epsilon(int episode) const {
    if (cfg_.anneal_episodes <= 1) {
        return cfg_.eps_min;
    }
    double frac = std::min(1.0, static_cast<double>(episode) /
                                    (cfg_.anneal_episodes - 1));
    return cfg_.eps_start + frac * (cfg_.eps_min - cfg_.eps_start);
}

double DrlAgent::q_value(std::span<const double> features) const {
    return net_a_.forward(features);
}

int DrlAgent::select(const Environment& env, double eps, Rng& rng) const {
    int n = env.action_count();
    if (n < 1) {
        throw std::runtime_error("environment exposes no actions");
    }
    std::vector<double> q(n, -1e30);
    for (int a = 0; a < n; ++a) {
        if (env.action_valid(a)) {
            q[a] = q_value(env.features(a));
        }
    }
    // Epsilon exploration must also respect validity.
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < eps) {
        std::vector<int> valid;
        for (int a = 0; a < n; ++a) {
            if (env.action_valid(a)) {
                valid.push_back(a);
            }
        }
        if (valid.empty()) {
            throw std::runtime_error("no valid action");
        }
        std::uniform_int_distribution<int> pick(
            0, static_cast<int>(valid.size()) - 1);
        return valid[pick(rng)];
    }
    return argmax_action(q);
}

double DrlAgent::next_max(const Experience& e, const RefNetwork& net) const {
    if (e.next_features.empty()) {
        return 0.0;
    }
    double m = -1e30;
    for (const auto& f : e.next_features) {
        m = std::max(m, net.forward(f));
    }
    return m;
}

void DrlAgent::refresh(Rng& rng, double& abs_dq_sum, int& dq_count) {
    if (memory_.size() == 0) {
        return;
    }
    for (int b = 0; b < cfg_.refresh_batches; ++b) {
        RefNetwork& updated = (!cfg_.double_q || update_a_next_) ? net_a_ : net_b_;
        const RefNetwork& frozen =
            !cfg_.double_q ? net_a_ : (update_a_next_ ? net_b_ : net_a_);
        std::vector<std::vector<double>> feats;
        std::vector<double> targets;
        for (int i = 0; i < cfg_.batch_size; ++i) {
            const Experience& e = memory_.sample(rng);
            double gamma_eff = cfg_.disc.factor(e.t_next - e.t);
            double target = bellman_target(e.reward, next_max(e, frozen),
                                           gamma_eff, cfg_.rho,
                                           cfg_.clip_targets);
            if (std::fabs(target) > 10.0) {
                throw std::runtime_error(
                    "Q divergence: |target| = " + std::to_string(target));
            }
            abs_dq_sum += std::fabs(target - updated.forward(e.features));
            ++dq_count;
            feats.push_back(e.features);
            targets.push_back(target);
        }
        TrainConfig tc;
        tc.learning_rate = cfg_.learning_rate;
        tc.batch_size = cfg_.batch_size;
        tc.weight_clip = cfg_.weight_clip;
        updated.train_minibatch(feats, targets, tc);
        update_a_next_ = !update_a_next_;
    }
}

void DrlAgent::offline_construct(Environment& env, int episodes) {
    if (episodes < 1) {
        throw std::invalid_argument("episodes must be >= 1");
    }
    TrainConfig tc;
    tc.learning_rate = cfg_.learning_rate;
    tc.batch_size = cfg_.batch_size;
    tc.weight_clip = cfg_.weight_clip;
    std::vector<std::vector<double>> feats;
    std::vector<double> targets;
    for (int ep = 0; ep < episodes; ++ep) {
        // Arbitrary but gradually refined policy: anneal epsilon from 1.
        double eps = 1.0 + (static_cast<double>(ep) /
                            std::max(1, episodes - 1)) *
                               (cfg_.eps_min - 1.0);
        env.reset(SeedSplitter(cfg_.seed).child(4).derive(ep));
        struct Visit {
            std::vector<double> features;
            double reward;
            double dt;
        };
        std::vector<Visit> trajectory;
        while (!env.done()) {
            int a = select(env, eps, rng_);
            Experience e;
            e.features = env.features(a);
            e.action = a;
            e.t = env.time();
            StepResult sr = env.step(a);
            e.reward = sr.reward;
            e.t_next = env.time();
            if (!sr.done && !env.done()) {
                for (int na = 0; na < env.action_count(); ++na) {
                    if (env.action_valid(na)) {
                        e.next_features.push_back(env.features(na));
                    }
                }
            }
            trajectory.push_back({e.features, sr.reward, e.t_next - e.t});
            memory_.push(std::move(e));
        }
        // Monte-Carlo return-to-go as the pre-network Q estimate.
        double g = 0.0;
        for (auto it = trajectory.rbegin(); it != trajectory.rend(); ++it) {
            g = it->reward + cfg_.disc.factor(it->dt) * g;
            double target = cfg_.clip_targets
                                ? std::max(g / cfg_.rho, -1.0)
                                : g;
            feats.push_back(it->features);
            targets.push_back(target);
        }
        if (feats.empty()) {
            continue;
        }
        // Refit over everything collected so far; the next rollout's greedy
        // component then reflects a trained estimate.
        int passes = std::max(1, cfg_.offline_epochs / episodes);
        std::vector<std::size_t> order(feats.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::vector<std::vector<double>> bf(cfg_.batch_size);
        std::vector<double> bt(cfg_.batch_size);
        for (int e = 0; e < passes; ++e) {
            std::shuffle(order.begin(), order.end(), rng_);
            for (std::size_t b = 0;
                 b + static_cast<std::size_t>(cfg_.batch_size) <=
                 order.size();
                 b += cfg_.batch_size) {
                for (int i = 0; i < cfg_.batch_size; ++i) {
                    bf[i] = feats[order[b + i]];
                    bt[i] = targets[order[b + i]];
                }
                net_a_.train_minibatch(bf, bt, tc);
                net_b_.train_minibatch(bf, bt, tc);
            }
        }
    }
}

EpisodeMetrics DrlAgent::online_episode(Environment& env, int episode,
                                        bool learn) {
    EpisodeMetrics m;
    m.episode = episode;
    m.epsilon = learn ? epsilon(episode) : 0.0;
    env.reset(SeedSplitter(cfg_.seed).child(5).derive(episode));
    double abs_dq = 0.0;
    int dq_count = 0;
    while (!env.done()) {
        int a = select(env, m.epsilon, rng_);
        Experience e;
        e.features = env.features(a);
        e.action = a;
        e.t = env.time();
        StepResult sr = env.step(a);
        e.reward = sr.reward;
        e.t_next = env.time();
        if (!sr.done && !env.done()) {
            for (int na = 0; na < env.action_count(); ++na) {
                if (env.action_valid(na)) {
                    e.next_features.push_back(env.features(na));
                }
            }
        }
        m.steps += 1;
        m.return_sum += sr.reward;
        m.energy_or_cost += sr.energy_or_cost;
        m.violations += sr.violations;
        if (learn) {
            memory_.push(std::move(e));
        }
    }
    if (learn) {
        refresh(rng_, abs_dq, dq_count);
    }
    m.mean_abs_dq = dq_count > 0 ? abs_dq / dq_count : 0.0;
    return m;
}

}  // namespace scdrl
