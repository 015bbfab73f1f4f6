#include "scdrl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace scdrl {

double server_power(double u, double p_idle, double p_peak) {
    if (u < 0.0 || u > 1.0) {
        throw std::out_of_range("utilization must lie in [0, 1]");
    }
    return p_idle + (p_peak - p_idle) * (2.0 * u - std::pow(u, 1.4));
}

double grid_power(double p_load, double p_pv) {
    if (p_load < 0.0 || p_pv < 0.0) {
        throw std::invalid_argument("negative power input");
    }
    return std::max(0.0, p_load - p_pv);
}

// ---- Traces ----

std::vector<Job> gen_job_trace(int count, double rate_per_s,
                               std::uint64_t seed) {
    if (count < 1 || rate_per_s <= 0.0) {
        throw std::invalid_argument("job trace needs count >= 1 and rate > 0");
    }
    Rng rng(seed);
    std::exponential_distribution<double> gap(rate_per_s);
    std::normal_distribution<double> log_dur(5.3, 0.8);
    std::uniform_real_distribution<double> cpu(0.10, 0.45);
    std::uniform_real_distribution<double> mem(0.05, 0.40);
    std::vector<Job> jobs;
    double t = 0.0;
    for (int i = 0; i < count; ++i) {
        t += gap(rng);
        Job j;
        j.arrival_s = t;
        j.duration_s = std::clamp(std::exp(log_dur(rng)), 30.0, 3600.0);
        j.cpu = cpu(rng);
        j.mem = mem(rng);
        jobs.push_back(j);
    }
    return jobs;
}

std::vector<GridTask> gen_task_set(int count, std::uint64_t seed) {
    if (count < 1) {
        throw std::invalid_argument("task set needs count >= 1");
    }
    Rng rng(seed);
    std::uniform_int_distribution<int> start(7, 20);
    std::uniform_int_distribution<int> dur(1, 4);
    std::uniform_int_distribution<int> slack(0, 3);
    std::uniform_real_distribution<double> kw(0.4, 2.2);
    std::uniform_real_distribution<double> inconv(0.02, 0.08);
    std::vector<GridTask> tasks;
    for (int i = 0; i < count; ++i) {
        GridTask t;
        t.id = i;
        t.dur = dur(rng);
        t.win_start = start(rng);
        t.win_end = std::min(GridConfig::kSlotsPerDay - 1,
                             t.win_start + t.dur - 1 + slack(rng));
        t.kw = kw(rng);
        t.inconv = inconv(rng);
        tasks.push_back(t);
    }
    return tasks;
}

std::vector<WeatherSlot> gen_weather(int slots, int slots_per_day,
                                     std::uint64_t seed) {
    if (slots < 1 || slots_per_day < 1) {
        throw std::invalid_argument("weather needs positive slot counts");
    }
    Rng rng(seed);
    std::normal_distribution<double> amb_noise(0.0, 0.4);
    std::normal_distribution<double> solar_noise(0.0, 25.0);
    std::vector<WeatherSlot> out;
    for (int s = 0; s < slots; ++s) {
        double hour = 24.0 * (s % slots_per_day) / slots_per_day;
        WeatherSlot w;
        w.slot = s;
        w.amb_c = 28.0 + 5.0 * std::sin(2.0 * M_PI * (hour - 9.0) / 24.0) +
                  amb_noise(rng);
        double sun = (hour >= 6.0 && hour <= 18.0)
                         ? std::sin(M_PI * (hour - 6.0) / 12.0)
                         : 0.0;
        w.solar_wm2 =
            sun > 0.0 ? std::max(0.0, 900.0 * sun + solar_noise(rng)) : 0.0;
        w.pv_kw = 3.0 * w.solar_wm2 / 900.0;
        if (hour < 7.0 || hour >= 22.0) {
            w.tou_price = 0.10;
        } else if (hour < 17.0) {
            w.tou_price = 0.18;
        } else {
            w.tou_price = 0.40;
        }
        out.push_back(w);
    }
    return out;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::string& header) {
    std::ifstream f(path);
    if (!f) {
        throw std::runtime_error("cannot open CSV: " + path);
    }
    std::string line;
    if (!std::getline(f, line) || line != header) {
        throw std::runtime_error("bad CSV header in " + path);
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

void write_job_csv(const std::string& path, const std::vector<Job>& jobs) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("cannot write CSV: " + path);
    }
    f << "arrival_s,duration_s,cpu,mem\n";
    char buf[128];
    for (const auto& j : jobs) {
        std::snprintf(buf, sizeof(buf), "%.3f,%.3f,%.4f,%.4f\n", j.arrival_s,
                      j.duration_s, j.cpu, j.mem);
        f << buf;
    }
}

std::vector<Job> read_job_csv(const std::string& path) {
    std::vector<Job> jobs;
    for (const auto& r : read_csv(path, "arrival_s,duration_s,cpu,mem")) {
        if (r.size() != 4) {
            throw std::runtime_error("bad job row in " + path);
        }
        jobs.push_back({std::stod(r[0]), std::stod(r[1]), std::stod(r[2]),
                        std::stod(r[3])});
    }
    return jobs;
}

void write_task_csv(const std::string& path,
                    const std::vector<GridTask>& tasks) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("cannot write CSV: " + path);
    }
    f << "task_id,win_start,win_end,dur,kw,inconv\n";
    char buf[128];
    for (const auto& t : tasks) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%.4f,%.4f\n", t.id,
                      t.win_start, t.win_end, t.dur, t.kw, t.inconv);
        f << buf;
    }
}

std::vector<GridTask> read_task_csv(const std::string& path) {
    std::vector<GridTask> tasks;
    for (const auto& r :
         read_csv(path, "task_id,win_start,win_end,dur,kw,inconv")) {
        if (r.size() != 6) {
            throw std::runtime_error("bad task row in " + path);
        }
        tasks.push_back({std::stoi(r[0]), std::stoi(r[1]), std::stoi(r[2]),
                         std::stoi(r[3]), std::stod(r[4]), std::stod(r[5])});
    }
    return tasks;
}

void write_weather_csv(const std::string& path,
                       const std::vector<WeatherSlot>& slots) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("cannot write CSV: " + path);
    }
    f << "slot,tou_price,pv_kw,amb_c,solar_wm2\n";
    char buf[128];
    for (const auto& w : slots) {
        std::snprintf(buf, sizeof(buf), "%d,%.4f,%.4f,%.3f,%.2f\n", w.slot,
                      w.tou_price, w.pv_kw, w.amb_c, w.solar_wm2);
        f << buf;
    }
}

std::vector<WeatherSlot> read_weather_csv(const std::string& path) {
    std::vector<WeatherSlot> slots;
    for (const auto& r :
         read_csv(path, "slot,tou_price,pv_kw,amb_c,solar_wm2")) {
        if (r.size() != 5) {
            throw std::runtime_error("bad weather row in " + path);
        }
        WeatherSlot w;
        w.slot = std::stoi(r[0]);
        w.tou_price = std::stod(r[1]);
        w.pv_kw = std::stod(r[2]);
        w.amb_c = std::stod(r[3]);
        w.solar_wm2 = std::stod(r[4]);
        slots.push_back(w);
    }
    return slots;
}

// ---- Cloud ----

RefNetwork pretrain_group_encoder(int group_width, int encoder_width,
                                  std::uint64_t seed) {
    if (encoder_width >= group_width) {
        throw std::invalid_argument(
            "encoder must reduce the group state width");
    }
    NetworkSpec ae;
    ae.widths = {group_width, encoder_width, group_width};
    ae.output_activation = Activation::Linear;
    RefNetwork net(ae, seed);
    Rng rng(SeedSplitter(seed).derive(7));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TrainConfig tc;
    tc.learning_rate = 0.05;
    for (int step = 0; step < 3000; ++step) {
        WeightSet grad = WeightSet::zeros(ae);
        for (int i = 0; i < 16; ++i) {
            std::vector<double> x(group_width);
            for (auto& v : x) {
                v = u(rng);
            }
            auto out = net.forward_vec(x);
            std::vector<double> delta(group_width);
            for (int k = 0; k < group_width; ++k) {
                delta[k] = out[k] - x[k];
            }
            net.backward_delta(x, delta, grad);
        }
        net.apply_gradient(grad, tc.learning_rate, 1.0 / 16);
    }
    // Deploy the encoder half.
    NetworkSpec enc;
    enc.widths = {group_width, encoder_width};
    WeightSet w;
    w.layers.push_back(net.weights().layers[0]);
    return RefNetwork(enc, w);
}

int cloud_round_robin_action(int step_index, int n_servers) {
    return step_index % n_servers;
}

CloudEnv::CloudEnv(CloudConfig cfg)
    : cfg_(std::move(cfg)),
      encoder_(pretrain_group_encoder(3 * cfg_.group_size,
                                      cfg_.encoder_width, 91)) {
    if (cfg_.n_servers < 1 || cfg_.group_size < 1 ||
        cfg_.n_servers % cfg_.group_size != 0) {
        throw std::invalid_argument(
            "server count must be a positive multiple of group size");
    }
    if (cfg_.jobs.empty()) {
        throw std::invalid_argument("cloud trace is empty");
    }
    for (std::size_t i = 1; i < cfg_.jobs.size(); ++i) {
        if (cfg_.jobs[i].arrival_s < cfg_.jobs[i - 1].arrival_s) {
            throw std::invalid_argument("job trace not sorted by arrival");
        }
    }
    reset(0);
}

void CloudEnv::reset(std::uint64_t) {
    servers_.assign(cfg_.n_servers, Server{});
    next_job_ = 0;
    now_s_ = 0.0;
    total_energy_wh_ = 0.0;
    total_wait_s_ = 0.0;
    completed_ = 0;
    advance(cfg_.jobs.front().arrival_s);
}

int CloudEnv::group_count() const { return cfg_.n_servers / cfg_.group_size; }

double CloudEnv::utilization(const Server& s) const {
    double used = 0.0;
    for (const auto& r : s.running) {
        used += cfg_.jobs[r.job].cpu;
    }
    return std::clamp(used / cfg_.cpu_capacity, 0.0, 1.0);
}

void CloudEnv::start_ready_jobs(Server& s, double now) {
    if (s.mode != Mode::Active) {
        return;
    }
    while (!s.queue.empty()) {
        const Job& j = cfg_.jobs[s.queue.front()];
        double cpu_used = 0.0, mem_used = 0.0;
        for (const auto& r : s.running) {
            cpu_used += cfg_.jobs[r.job].cpu;
            mem_used += cfg_.jobs[r.job].mem;
        }
        if (cpu_used + j.cpu > cfg_.cpu_capacity + 1e-9 ||
            mem_used + j.mem > cfg_.mem_capacity + 1e-9) {
            break;  // FCFS head blocks
        }
        s.running.push_back({s.queue.front(), now + j.duration_s});
        s.queue.erase(s.queue.begin());
    }
}

double CloudEnv::next_internal_event(double horizon) const {
    double t = horizon;
    for (const auto& s : servers_) {
        for (const auto& r : s.running) {
            t = std::min(t, r.end_s);
        }
        if (s.mode == Mode::ToSleep || s.mode == Mode::ToActive) {
            t = std::min(t, s.transition_done_s);
        }
        if (s.mode == Mode::Active && s.running.empty() && s.queue.empty()) {
            t = std::min(t, s.idle_since_s + cfg_.idle_sleep_s);
        }
    }
    return t;
}

void CloudEnv::advance(double to_s) {
    while (now_s_ < to_s - 1e-9) {
        double t = std::min(to_s, next_internal_event(to_s));
        t = std::max(t, now_s_);
        double dt = t - now_s_;
        if (dt > 0.0) {
            for (const auto& s : servers_) {
                double p = 0.0;
                if (s.mode == Mode::Active) {
                    p = server_power(utilization(s));
                } else if (s.mode != Mode::Sleep) {
                    p = server_power(0.0);
                }
                total_energy_wh_ += p * dt / 3600.0;
                total_wait_s_ += static_cast<double>(s.queue.size()) * dt;
            }
            now_s_ = t;
        }
        // Fire due events.
        for (auto& s : servers_) {
            for (std::size_t i = 0; i < s.running.size();) {
                if (s.running[i].end_s <= now_s_ + 1e-9) {
                    s.running.erase(s.running.begin() + i);
                    ++completed_;
                } else {
                    ++i;
                }
            }
            if ((s.mode == Mode::ToSleep || s.mode == Mode::ToActive) &&
                s.transition_done_s <= now_s_ + 1e-9) {
                if (s.mode == Mode::ToSleep) {
                    s.mode = Mode::Sleep;
                    if (!s.queue.empty()) {
                        s.mode = Mode::ToActive;
                        s.transition_done_s = now_s_ + cfg_.t_on_s;
                    }
                } else {
                    s.mode = Mode::Active;
                    s.idle_since_s = now_s_;
                }
            }
            start_ready_jobs(s, now_s_);
            if (s.mode == Mode::Active && s.running.empty() &&
                s.queue.empty()) {
                if (s.idle_since_s + cfg_.idle_sleep_s <= now_s_ + 1e-9) {
                    s.mode = Mode::ToSleep;
                    s.transition_done_s = now_s_ + cfg_.t_off_s;
                }
            } else if (s.mode == Mode::Active) {
                s.idle_since_s = now_s_;
            }
        }
        if (dt <= 0.0) {
            break;
        }
    }
}

bool CloudEnv::done() const {
    if (next_job_ < cfg_.jobs.size()) {
        return false;
    }
    for (const auto& s : servers_) {
        if (!s.queue.empty() || !s.running.empty()) {
            return false;
        }
    }
    return true;
}

int CloudEnv::feature_width() const { return 2 * cfg_.encoder_width + 6; }

std::vector<double> CloudEnv::group_state(int group) const {
    std::vector<double> out;
    for (int i = 0; i < cfg_.group_size; ++i) {
        const Server& s = servers_[group * cfg_.group_size + i];
        double mode = 0.0;
        switch (s.mode) {
            case Mode::Active: mode = 1.0; break;
            case Mode::ToActive: mode = 2.0 / 3.0; break;
            case Mode::ToSleep: mode = 1.0 / 3.0; break;
            case Mode::Sleep: mode = 0.0; break;
        }
        out.push_back(mode);
        out.push_back(utilization(s));
        out.push_back(std::min(
            1.0, (s.queue.size() + s.running.size()) / 4.0));
    }
    return out;
}

std::vector<double> CloudEnv::features(int action) const {
    if (!action_valid(action)) {
        throw std::out_of_range("invalid server id");
    }
    if (next_job_ >= cfg_.jobs.size()) {
        throw std::logic_error("no pending job");
    }
    int target_group = action / cfg_.group_size;
    auto enc_target = encoder_.forward_vec(group_state(target_group));
    std::vector<double> pooled(cfg_.encoder_width, 0.0);
    int others = 0;
    for (int g = 0; g < group_count(); ++g) {
        if (g == target_group) {
            continue;
        }
        auto e = encoder_.forward_vec(group_state(g));
        for (int k = 0; k < cfg_.encoder_width; ++k) {
            pooled[k] += e[k];
        }
        ++others;
    }
    if (others > 0) {
        for (auto& v : pooled) {
            v /= others;
        }
    }
    const Job& j = cfg_.jobs[next_job_];
    const Server& s = servers_[action];
    std::vector<double> f;
    f.insert(f.end(), enc_target.begin(), enc_target.end());
    f.insert(f.end(), pooled.begin(), pooled.end());
    f.push_back(j.cpu);
    f.push_back(j.mem);
    f.push_back(std::min(1.0, j.duration_s / 3600.0));
    f.push_back(static_cast<double>(action % cfg_.group_size) /
                cfg_.group_size);
    f.push_back(utilization(s));
    f.push_back(s.mode == Mode::Active ? 1.0 : 0.0);
    return f;
}

StepResult CloudEnv::step(int action) {
    if (!action_valid(action)) {
        throw std::out_of_range("invalid server id");
    }
    if (next_job_ >= cfg_.jobs.size()) {
        throw std::logic_error("no pending job");
    }
    double e0 = total_energy_wh_;
    double w0 = total_wait_s_;
    Server& s = servers_[action];
    s.queue.push_back(static_cast<int>(next_job_));
    if (s.mode == Mode::Sleep) {
        s.mode = Mode::ToActive;
        s.transition_done_s = now_s_ + cfg_.t_on_s;
    } else {
        start_ready_jobs(s, now_s_);
    }
    ++next_job_;
    double t0 = now_s_;
    if (next_job_ < cfg_.jobs.size()) {
        advance(cfg_.jobs[next_job_].arrival_s);
    } else {
        // Drain: run until every queued and running job finishes.
        while (!done()) {
            double t = next_internal_event(
                std::numeric_limits<double>::infinity());
            if (!std::isfinite(t)) {
                throw std::logic_error("cloud drain stalled");
            }
            advance(t + 1e-6);
        }
    }
    StepResult r;
    r.dt = now_s_ - t0;
    double d_energy = total_energy_wh_ - e0;
    double d_wait_h = (total_wait_s_ - w0) / 3600.0;
    r.energy_or_cost = d_energy;
    r.reward = -(cfg_.w_power * d_energy + cfg_.w_latency * d_wait_h);
    r.done = done();
    return r;
}

// ---- Grid ----

double grid_slot_cost(double tou_price, double kappa, double p_grid_kw) {
    if (tou_price < 0.0 || kappa < 0.0 || p_grid_kw < 0.0) {
        throw std::invalid_argument("negative cost input");
    }
    return tou_price * p_grid_kw + kappa * p_grid_kw * p_grid_kw;
}

GridEnv::GridEnv(GridConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.tasks.empty()) {
        throw std::invalid_argument("grid task set is empty");
    }
    if (static_cast<int>(cfg_.weather.size()) != GridConfig::kSlotsPerDay) {
        throw std::invalid_argument("grid weather must cover 24 slots");
    }
    double total_kw_slots = 0.0;
    for (const auto& t : cfg_.tasks) {
        if (t.dur < 1 || t.dur > GridConfig::kSlotsPerDay) {
            throw std::invalid_argument("task duration out of range");
        }
        total_kw_slots += t.kw * t.dur;
    }
    // Load feature scale: twice the mean fully-committed load, so the
    // feature stays informative however many tasks are in the set.
    load_norm_ = std::max(
        1.0, 2.0 * (cfg_.base_load_kw +
                    total_kw_slots / GridConfig::kSlotsPerDay));
    reset(0);
}

void GridEnv::reset(std::uint64_t) {
    load_kw_.assign(GridConfig::kSlotsPerDay, cfg_.base_load_kw);
    starts_.clear();
    task_idx_ = 0;
    total_cost_ = day_cost(load_kw_);
}

const GridTask& GridEnv::current() const {
    if (task_idx_ >= cfg_.tasks.size()) {
        throw std::logic_error("no pending task");
    }
    return cfg_.tasks[task_idx_];
}

bool GridEnv::action_valid(int action) const {
    if (action < 0 || action >= GridConfig::kSlotsPerDay) {
        return false;
    }
    return action + current().dur <= GridConfig::kSlotsPerDay;
}

bool GridEnv::done() const { return task_idx_ >= cfg_.tasks.size(); }

double GridEnv::day_cost(const std::vector<double>& load) const {
    double c = 0.0;
    for (int t = 0; t < GridConfig::kSlotsPerDay; ++t) {
        c += grid_slot_cost(cfg_.weather[t].tou_price, cfg_.kappa,
                            grid_power(load[t], cfg_.weather[t].pv_kw));
    }
    return c;
}

std::vector<double> GridEnv::features(int action) const {
    if (!action_valid(action)) {
        throw std::out_of_range("infeasible start slot");
    }
    const GridTask& t = current();
    double tou_mean = 0.0, pv_mean = 0.0, load_mean = 0.0;
    for (int s = action; s < action + t.dur; ++s) {
        tou_mean += cfg_.weather[s].tou_price;
        pv_mean += cfg_.weather[s].pv_kw;
        load_mean += load_kw_[s];
    }
    tou_mean /= t.dur;
    pv_mean /= t.dur;
    load_mean /= t.dur;
    int displaced = 0;
    for (int s = action; s < action + t.dur; ++s) {
        if (s < t.win_start || s > t.win_end) {
            ++displaced;
        }
    }
    return {static_cast<double>(action) / (GridConfig::kSlotsPerDay - 1),
            static_cast<double>(t.dur) / GridConfig::kSlotsPerDay,
            static_cast<double>(displaced) / GridConfig::kSlotsPerDay,
            t.inconv / 0.1,
            t.kw / 3.0,
            tou_mean / 0.5,
            pv_mean / 3.0,
            std::min(1.0, load_mean / load_norm_),
            static_cast<double>(task_idx_) / cfg_.tasks.size(),
            1.0};
}

StepResult GridEnv::step(int action) {
    if (!action_valid(action)) {
        throw std::out_of_range("infeasible start slot");
    }
    const GridTask& t = current();
    double before = day_cost(load_kw_);
    for (int s = action; s < action + t.dur; ++s) {
        load_kw_[s] += t.kw;
    }
    double marginal = day_cost(load_kw_) - before;
    int displaced = 0;
    for (int s = action; s < action + t.dur; ++s) {
        if (s < t.win_start || s > t.win_end) {
            ++displaced;
        }
    }
    double penalty = t.inconv * displaced;
    starts_.push_back(action);
    ++task_idx_;
    total_cost_ += marginal + penalty;
    StepResult r;
    r.reward = -(marginal + penalty);
    r.energy_or_cost = marginal + penalty;
    r.done = done();
    r.dt = 1.0;
    return r;
}

int grid_greedy_action(const GridTask& task) {
    return std::min(task.win_start, GridConfig::kSlotsPerDay - task.dur);
}

// ---- HVAC ----

HvacEnv::HvacEnv(HvacConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.zones < 1) {
        throw std::invalid_argument("need at least one zone");
    }
    if (cfg_.flow_levels.size() < 2) {
        throw std::invalid_argument("need at least two flow levels");
    }
    for (std::size_t i = 1; i < cfg_.flow_levels.size(); ++i) {
        if (cfg_.flow_levels[i] <= cfg_.flow_levels[i - 1]) {
            throw std::invalid_argument("flow levels must increase");
        }
    }
    if (cfg_.t_under_c >= cfg_.t_over_c) {
        throw std::invalid_argument("comfort band is empty");
    }
    if (static_cast<int>(cfg_.weather.size()) < cfg_.steps) {
        throw std::invalid_argument("weather trace shorter than horizon");
    }
    reset(0);
}

void HvacEnv::reset(std::uint64_t) {
    temp_c_.assign(cfg_.zones, cfg_.t_init_c);
    step_ = 0;
    total_cost_ = 0.0;
    violation_steps_ = 0;
}

int HvacEnv::action_count() const {
    int n = 1;
    for (int z = 0; z < cfg_.zones; ++z) {
        n *= static_cast<int>(cfg_.flow_levels.size());
    }
    return n;
}

std::vector<int> HvacEnv::decode_action(int action) const {
    if (action < 0 || action >= action_count()) {
        throw std::out_of_range("invalid flow level action");
    }
    int m = static_cast<int>(cfg_.flow_levels.size());
    std::vector<int> levels(cfg_.zones);
    for (int z = 0; z < cfg_.zones; ++z) {
        levels[z] = action % m;
        action /= m;
    }
    return levels;
}

bool HvacEnv::done() const { return step_ >= cfg_.steps; }

int HvacEnv::feature_width() const {
    return 3 * cfg_.zones + 5 + cfg_.forecast_steps;
}

double HvacEnv::zone_next_temp(int z, double flow,
                               const WeatherSlot& w) const {
    double watts = (w.amb_c - temp_c_[z]) / cfg_.r_amb +
                   cfg_.solar_gain * w.solar_wm2 +
                   cfg_.flow_gain * flow * (cfg_.t_supply_c - temp_c_[z]);
    if (cfg_.zones > 1) {
        int left = (z + cfg_.zones - 1) % cfg_.zones;
        int right = (z + 1) % cfg_.zones;
        watts += (temp_c_[left] - temp_c_[z]) / cfg_.r_zone +
                 (temp_c_[right] - temp_c_[z]) / cfg_.r_zone;
    }
    return temp_c_[z] + cfg_.dt_s / cfg_.capacitance * watts;
}

std::vector<double> HvacEnv::features(int action) const {
    auto levels = decode_action(action);
    const WeatherSlot& w = cfg_.weather[std::min(
        step_, static_cast<int>(cfg_.weather.size()) - 1)];
    double mid = 0.5 * (cfg_.t_under_c + cfg_.t_over_c);
    std::vector<double> f;
    for (int z = 0; z < cfg_.zones; ++z) {
        double flow = cfg_.flow_levels[levels[z]];
        f.push_back((temp_c_[z] - mid) / 3.0);
        f.push_back(flow);
        // One-step model rollout of this action, the load-bearing
        // action-conditional feature.
        f.push_back((zone_next_temp(z, flow, w) - mid) / 3.0);
    }
    double day = 86400.0;
    double tod = std::fmod(step_ * cfg_.dt_s, day) / day;
    f.push_back(w.amb_c / 40.0);
    f.push_back(w.solar_wm2 / 1000.0);
    f.push_back(w.tou_price / 0.5);
    f.push_back(std::sin(2.0 * M_PI * tod));
    f.push_back(std::cos(2.0 * M_PI * tod));
    for (int h = 1; h <= cfg_.forecast_steps; ++h) {
        int idx = std::min(step_ + h,
                           static_cast<int>(cfg_.weather.size()) - 1);
        f.push_back(cfg_.weather[idx].amb_c / 40.0);
    }
    return f;
}

StepResult HvacEnv::step(int action) {
    if (done()) {
        throw std::logic_error("episode finished");
    }
    auto levels = decode_action(action);
    const WeatherSlot& w = cfg_.weather[step_];
    // RC update, then evaluate comfort at the new temperatures.
    std::vector<double> next(cfg_.zones);
    double total_flow = 0.0;
    for (int z = 0; z < cfg_.zones; ++z) {
        double f = cfg_.flow_levels[levels[z]];
        total_flow += f;
        next[z] = zone_next_temp(z, f, w);
    }
    temp_c_ = next;
    double violation_deg = 0.0;
    int violated = 0;
    for (int z = 0; z < cfg_.zones; ++z) {
        double over = std::max(0.0, temp_c_[z] - cfg_.t_over_c);
        double under = std::max(0.0, cfg_.t_under_c - temp_c_[z]);
        violation_deg += over + under;
        if (over > 0.0 || under > 0.0) {
            ++violated;
        }
    }
    double dt_h = cfg_.dt_s / 3600.0;
    double kw = cfg_.fan_kw * total_flow * total_flow * total_flow +
                cfg_.cool_kw_per_flow * total_flow;
    double cost = w.tou_price * kw * dt_h;
    ++step_;
    violation_steps_ += violated;
    total_cost_ += cost;
    StepResult r;
    r.reward = -cfg_.lambda * violation_deg - cost;
    r.energy_or_cost = cost;
    r.violations = violated;
    r.done = done();
    r.dt = cfg_.dt_s;
    return r;
}

int HvacHysteresis::action(const HvacEnv& env) {
    int m = static_cast<int>(cfg_.flow_levels.size());
    if (static_cast<int>(last_.size()) != cfg_.zones) {
        last_.assign(cfg_.zones, 0);
    }
    const auto& temps = env.temps();
    int action = 0;
    int mult = 1;
    for (int z = 0; z < cfg_.zones; ++z) {
        if (temps[z] > cfg_.t_over_c) {
            last_[z] = m - 1;
        } else if (temps[z] < cfg_.t_under_c) {
            last_[z] = 0;
        }
        action += last_[z] * mult;
        mult *= m;
    }
    return action;
}

}  // namespace scdrl
