#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scdrl/drl.hpp"
#include "scdrl/ref_network.hpp"

namespace scdrl {

// ---- Shared power models ----

// Server power draw as a function of CPU utilization:
// P(0) + (P(100) - P(0)) * (2u - u^1.4).
double server_power(double u, double p_idle = 87.0, double p_peak = 145.0);

// Grid draw after local PV generation: max(0, load - pv).
double grid_power(double p_load, double p_pv);

// ---- Traces ----

struct Job {
    double arrival_s = 0.0;
    double duration_s = 0.0;
    double cpu = 0.0;  // fraction of one server's CPU capacity
    double mem = 0.0;
};

struct GridTask {
    int id = 0;
    int win_start = 0;  // desired window, inclusive slots
    int win_end = 0;
    int dur = 1;        // occupied slots, non-interruptible
    double kw = 0.0;
    double inconv = 0.0;  // $ per slot of displacement
};

struct WeatherSlot {
    int slot = 0;
    double tou_price = 0.0;  // $/kWh
    double pv_kw = 0.0;
    double amb_c = 0.0;
    double solar_wm2 = 0.0;
};

std::vector<Job> gen_job_trace(int count, double rate_per_s,
                               std::uint64_t seed);
std::vector<GridTask> gen_task_set(int count, std::uint64_t seed);
// slots_per_day sets the diurnal period; slots may span several days.
std::vector<WeatherSlot> gen_weather(int slots, int slots_per_day,
                                     std::uint64_t seed);

void write_job_csv(const std::string& path, const std::vector<Job>& jobs);
std::vector<Job> read_job_csv(const std::string& path);
void write_task_csv(const std::string& path,
                    const std::vector<GridTask>& tasks);
std::vector<GridTask> read_task_csv(const std::string& path);
void write_weather_csv(const std::string& path,
                       const std::vector<WeatherSlot>& slots);
std::vector<WeatherSlot> read_weather_csv(const std::string& path);

// ---- Cloud resource allocation ----

struct CloudConfig {
    int n_servers = 6;
    int group_size = 3;
    int encoder_width = 4;
    double cpu_capacity = 1.0;
    double mem_capacity = 1.0;
    double t_on_s = 30.0;
    double t_off_s = 30.0;
    double idle_sleep_s = 90.0;  // auto-sleep after this much idle time
    double w_power = 1.0;        // reward weight on Wh in the epoch
    double w_latency = 1.0;      // reward weight on job-hours of waiting
    std::vector<Job> jobs;
};

class CloudEnv : public Environment {
  public:
    explicit CloudEnv(CloudConfig cfg);

    void reset(std::uint64_t seed) override;
    int action_count() const override { return cfg_.n_servers; }
    int feature_width() const override;
    std::vector<double> features(int action) const override;
    bool done() const override;
    double time() const override { return now_s_; }
    StepResult step(int action) override;

    double total_energy_wh() const { return total_energy_wh_; }
    double total_wait_s() const { return total_wait_s_; }
    int completed_jobs() const { return completed_; }
    const CloudConfig& config() const { return cfg_; }

    // Raw per-group state block fed to the shared encoder.
    std::vector<double> group_state(int group) const;
    int group_count() const;

  private:
    enum class Mode { Active, ToSleep, Sleep, ToActive };
    struct Running {
        int job = 0;
        double end_s = 0.0;
    };
    struct Server {
        Mode mode = Mode::Active;
        double transition_done_s = 0.0;
        double idle_since_s = 0.0;
        std::vector<int> queue;  // FCFS indices into cfg_.jobs
        std::vector<Running> running;
    };

    double utilization(const Server& s) const;
    void start_ready_jobs(Server& s, double now);
    double next_internal_event(double horizon) const;
    void advance(double to_s);

    CloudConfig cfg_;
    std::vector<Server> servers_;
    std::size_t next_job_ = 0;
    double now_s_ = 0.0;
    double total_energy_wh_ = 0.0;
    double total_wait_s_ = 0.0;
    int completed_ = 0;
    RefNetwork encoder_;
};

// Shared-weight group encoder pre-trained as an autoencoder on sampled
// group states; the first layer is the deployed representation.
RefNetwork pretrain_group_encoder(int group_width, int encoder_width,
                                  std::uint64_t seed);

// Round-robin-over-servers baseline policy.
int cloud_round_robin_action(int step_index, int n_servers);

// ---- Residential smart-grid task scheduling ----

struct GridConfig {
    std::vector<GridTask> tasks;        // scheduled in this order
    std::vector<WeatherSlot> weather;   // exactly kSlotsPerDay entries
    double kappa = 0.02;                // $/kWh per kW consumption component
    double base_load_kw = 0.4;
    static constexpr int kSlotsPerDay = 24;
};

// C(t, P) = TOU(t) * P + kappa * P^2, per one-hour slot.
double grid_slot_cost(double tou_price, double kappa, double p_grid_kw);

class GridEnv : public Environment {
  public:
    explicit GridEnv(GridConfig cfg);

    void reset(std::uint64_t seed) override;
    int action_count() const override { return GridConfig::kSlotsPerDay; }
    bool action_valid(int action) const override;
    int feature_width() const override { return 10; }
    std::vector<double> features(int action) const override;
    bool done() const override;
    double time() const override { return static_cast<double>(task_idx_); }
    StepResult step(int action) override;

    double total_cost() const { return total_cost_; }
    const std::vector<int>& starts() const { return starts_; }
    const GridTask& current_task() const { return current(); }

  private:
    const GridTask& current() const;
    double day_cost(const std::vector<double>& load) const;

    GridConfig cfg_;
    double load_norm_ = 12.0;      // feature scale, set from the task set
    std::vector<double> load_kw_;  // committed load per slot
    std::vector<int> starts_;
    std::size_t task_idx_ = 0;
    double total_cost_ = 0.0;
};

// Earliest feasible start: desired window start, pulled in so the task still
// fits in the day.
int grid_greedy_action(const GridTask& task);

// ---- HVAC control ----

struct HvacConfig {
    int zones = 1;
    double dt_s = 900.0;
    int steps = 960;  // 10 days at 15 min
    std::vector<double> flow_levels = {0.0, 0.25, 0.5, 0.75, 1.0};
    double t_under_c = 22.0;
    double t_over_c = 25.0;
    double t_supply_c = 14.0;
    double t_init_c = 23.5;
    double lambda = 1.0;        // violation weight, per degree
    double capacitance = 1.8e6; // J/K per zone
    double r_amb = 0.004;       // K/W to ambient
    double r_zone = 0.008;      // K/W between adjacent zones
    double solar_gain = 1.2;    // W per W/m^2
    double flow_gain = 900.0;   // W/K at unit flow
    double fan_kw = 0.9;         // kW at unit total flow (cubic)
    double cool_kw_per_flow = 0.5;  // chiller electricity per unit flow
    int forecast_steps = 4;
    std::vector<WeatherSlot> weather;  // one entry per step
};

class HvacEnv : public Environment {
  public:
    explicit HvacEnv(HvacConfig cfg);

    void reset(std::uint64_t seed) override;
    int action_count() const override;  // flow levels ^ zones
    int feature_width() const override;
    std::vector<double> features(int action) const override;
    bool done() const override;
    double time() const override { return step_ * cfg_.dt_s; }
    StepResult step(int action) override;

    double total_cost() const { return total_cost_; }
    int violation_steps() const { return violation_steps_; }
    int steps_taken() const { return step_; }
    const HvacConfig& config() const { return cfg_; }
    const std::vector<double>& temps() const { return temp_c_; }

    std::vector<int> decode_action(int action) const;

  private:
    double zone_next_temp(int z, double flow, const WeatherSlot& w) const;

    HvacConfig cfg_;
    std::vector<double> temp_c_;
    int step_ = 0;
    double total_cost_ = 0.0;
    int violation_steps_ = 0;
};

// Hysteresis thermostat: max flow above the band, zero below, hold inside.
class HvacHysteresis {
  public:
    explicit HvacHysteresis(const HvacConfig& cfg) : cfg_(cfg) {}
    int action(const HvacEnv& env);

  private:
    HvacConfig cfg_;
    std::vector<int> last_;
};

}  // namespace scdrl
