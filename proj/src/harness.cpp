#include "scdrl/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <set>

#include "scdrl/drl.hpp"
#include "scdrl/envs.hpp"
#include "scdrl/ref_network.hpp"
#include "scdrl/sc_network.hpp"
#include "scdrl/sc_units.hpp"
#include "scdrl/util.hpp"

namespace scdrl {

namespace {

const std::set<std::string> kCommands = {
    "bench-apc", "bench-stanh", "bench-timing", "compare-sc",
    "train",     "evaluate",    "gen-traces"};

void check_keys(const nlohmann::json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

class CsvFile {
  public:
    CsvFile(const std::string& path, const std::string& header) : f_(path) {
        if (!f_) {
            throw std::runtime_error("cannot write " + path);
        }
        f_ << header << "\n";
    }
    void row(const std::string& r) { f_ << r << "\n"; }

  private:
    std::ofstream f_;
};

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("cannot open config: " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse(j);
}

ExperimentConfig ExperimentConfig::parse(const nlohmann::json& j) {
    check_keys(j, "config",
               {"version", "command", "seed", "out_dir", "baseline", "sc",
                "network", "compare", "env", "agent", "traces"});
    if (!j.contains("version") || !j["version"].is_number_integer() ||
        j["version"].get<int>() != 1) {
        throw ConfigError("config requires \"version\": 1");
    }
    if (!j.contains("command") || !j["command"].is_string()) {
        throw ConfigError("config requires a \"command\" string");
    }
    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.command = j["command"].get<std::string>();
    if (!kCommands.count(cfg.command)) {
        throw ConfigError("unknown command: " + cfg.command);
    }
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.out_dir = j.value("out_dir", std::string("."));
    cfg.baseline = j.value("baseline", false);

    if (j.contains("sc")) {
        check_keys(j["sc"], "sc",
                   {"lengths", "k", "trials", "t_clk_pipelined_ns",
                    "t_clk_nonpipelined_ns"});
    }
    if (j.contains("network")) {
        check_keys(j["network"], "network",
                   {"widths", "bias", "hidden_activation",
                    "output_activation"});
    }
    if (j.contains("compare")) {
        check_keys(j["compare"], "compare",
                   {"inputs", "epochs", "weight_clip", "weight_file",
                    "lengths"});
    }
    if (j.contains("env")) {
        check_keys(j["env"], "env",
                   {"kind", "jobs", "rate_per_s", "n_servers", "group_size",
                    "encoder_width", "idle_sleep_s", "w_power", "w_latency",
                    "tasks", "kappa", "base_load_kw", "zones", "steps",
                    "lambda", "trace_file", "weather_file"});
    }
    if (j.contains("agent")) {
        check_keys(j["agent"], "agent",
                   {"mode", "gamma", "beta", "rho", "clip", "eps_start",
                    "eps_min", "anneal_episodes", "memory", "batch",
                    "learning_rate", "weight_clip", "episodes",
                    "offline_episodes", "refresh_batches", "offline_epochs",
                    "hidden",
                    "double_q"});
    }
    if (j.contains("traces")) {
        check_keys(j["traces"], "traces",
                   {"jobs", "rate_per_s", "task_sets", "weather_days"});
    }
    return cfg;
}

const nlohmann::json& ExperimentConfig::section(const char* name) const {
    static const nlohmann::json empty = nlohmann::json::object();
    if (raw.contains(name)) {
        return raw.at(name);
    }
    return empty;
}

const char* MetricsRow::csv_header() { return "run_id,metric,value,units,seed"; }

std::string MetricsRow::csv_row() const {
    return run_id + "," + metric + "," + fmt(value) + "," + units + "," +
           std::to_string(seed);
}

namespace {

struct Emitter {
    std::string run_id;
    std::uint64_t seed;
    std::vector<MetricsRow> rows;
    std::string summary;

    void metric(const std::string& name, double value,
                const std::string& units) {
        rows.push_back({run_id, name, value, units, seed});
    }
    void note(const std::string& line) { summary += line + "\n"; }

    void flush(const std::string& out_dir) {
        CsvFile metrics(out_dir + "/metrics.csv", MetricsRow::csv_header());
        for (const auto& r : rows) {
            metrics.row(r.csv_row());
        }
        std::ofstream s(out_dir + "/summary.txt");
        s << summary;
    }
};

// ---- bench commands ----

void cmd_bench_apc(const ExperimentConfig& cfg, Emitter& em) {
    const auto& sc = cfg.section("sc");
    std::vector<std::uint32_t> lengths =
        sc.value("lengths", std::vector<std::uint32_t>{256, 512, 1024});
    std::uint32_t trials = sc.value("trials", 1000u);
    CsvFile out(cfg.out_dir + "/bench_apc.csv",
                "variant,n,length,trials,inaccuracy_pct");
    for (const char* variant : {"original", "improved"}) {
        for (int n : {26, 30}) {
            ApcDesign d = std::string(variant) == "original"
                              ? ApcDesign::original(n)
                              : ApcDesign::improved(n);
            for (std::uint32_t L : lengths) {
                Rng rng(SeedSplitter(cfg.seed).derive(
                    std::hash<std::string>{}(variant) + n + L));
                double pct = 100.0 * apc_inaccuracy(d, L, trials, rng);
                out.row(std::string(variant) + "," + std::to_string(n) + "," +
                        std::to_string(L) + "," + std::to_string(trials) +
                        "," + fmt(pct));
                em.metric(std::string("apc_inaccuracy_") + variant + "_" +
                              std::to_string(n) + "_" + std::to_string(L),
                          pct, "pct");
            }
        }
    }
    em.note("APC inaccuracy benchmark written to bench_apc.csv");
}

void cmd_bench_stanh(const ExperimentConfig& cfg, Emitter& em) {
    const auto& sc = cfg.section("sc");
    int k = sc.value("k", 16);
    std::uint32_t L = 1024;
    if (sc.contains("lengths")) {
        L = sc["lengths"].front().get<std::uint32_t>();
    }
    CsvFile out(cfg.out_dir + "/bench_stanh.csv", "x,decoded,expected,abs_err");
    double max_err = 0.0;
    for (int i = -8; i <= 8; i += 2) {
        double x = i / 10.0;
        SngConfig sng_cfg;
        sng_cfg.seed = SeedSplitter(cfg.seed).derive(100 + i) | 1;
        Sng sng(sng_cfg);
        double decoded = stanh(sng.encode(x, L, Encoding::Bipolar), k).decode();
        double expected = std::tanh(k / 2.0 * x);
        double err = std::fabs(decoded - expected);
        max_err = std::max(max_err, err);
        out.row(fmt(x) + "," + fmt(decoded) + "," + fmt(expected) + "," +
                fmt(err));
    }
    em.metric("stanh_max_abs_err", max_err, "abs");
    em.note("Stanh K=" + std::to_string(k) + " max abs err " + fmt(max_err));
}

void cmd_bench_timing(const ExperimentConfig& cfg, Emitter& em) {
    const auto& sc = cfg.section("sc");
    std::vector<std::uint32_t> lengths =
        sc.value("lengths", std::vector<std::uint32_t>{256, 512, 1024});
    PipelineConfig piped = PipelineConfig::pipelined();
    PipelineConfig nonpiped = PipelineConfig::non_pipelined();
    piped.t_clk_ns = sc.value("t_clk_pipelined_ns", piped.t_clk_ns);
    nonpiped.t_clk_ns = sc.value("t_clk_nonpipelined_ns", nonpiped.t_clk_ns);
    CsvFile out(cfg.out_dir + "/bench_timing.csv", TimingReport::csv_header());
    for (const auto& pc : {piped, nonpiped}) {
        for (std::uint32_t L : lengths) {
            TimingReport t;
            t.stream_length = L;
            t.pipelined = pc.is_pipelined();
            t.delay_ns = delay_ns(L, pc);
            t.throughput_per_ns = t.pipelined ? 1.0 / t.delay_ns : 0.0;
            out.row(t.csv_row());
            em.metric(std::string("delay_") +
                          (t.pipelined ? "pipelined_" : "nonpipelined_") +
                          std::to_string(L),
                      t.delay_ns, "ns");
        }
    }
    em.note("Timing model written to bench_timing.csv");
}

// ---- compare-sc ----

double synthetic_q(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += std::sin(1.7 * x[i] + 0.3 * i) * (i % 3 == 0 ? 0.5 : 0.2);
    }
    return -0.5 + 0.45 * std::tanh(s);
}

NetworkSpec spec_from_config(const nlohmann::json& net,
                             std::vector<int> default_widths) {
    NetworkSpec spec;
    spec.widths = net.value("widths", default_widths);
    spec.bias = net.value("bias", false);
    auto act = [](const std::string& s) {
        if (s == "tanh") return Activation::Tanh;
        if (s == "linear") return Activation::Linear;
        throw ConfigError("unknown activation: " + s);
    };
    spec.hidden_activation = act(net.value("hidden_activation", "tanh"));
    spec.output_activation = act(net.value("output_activation", "tanh"));
    spec.validate();
    return spec;
}

RefNetwork train_synthetic(const NetworkSpec& spec, std::uint64_t seed,
                           int epochs, double weight_clip) {
    RefNetwork net(spec, SeedSplitter(seed).derive(11));
    Rng rng(SeedSplitter(seed).derive(12));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n_train = 2000;
    std::vector<std::vector<double>> feats;
    std::vector<double> targets;
    for (int i = 0; i < n_train; ++i) {
        std::vector<double> x(spec.input_width());
        for (auto& v : x) {
            v = u(rng);
        }
        targets.push_back(synthetic_q(x));
        feats.push_back(std::move(x));
    }
    TrainConfig tc;
    tc.learning_rate = 0.05;
    tc.weight_clip = weight_clip;
    for (int e = 0; e < epochs; ++e) {
        for (int b = 0; b + tc.batch_size <= n_train; b += tc.batch_size) {
            net.train_minibatch(
                std::span<const std::vector<double>>(&feats[b],
                                                     tc.batch_size),
                std::span<const double>(&targets[b], tc.batch_size), tc);
        }
    }
    return net;
}

void cmd_compare_sc(const ExperimentConfig& cfg, Emitter& em) {
    const auto& cmp = cfg.section("compare");
    int inputs = cmp.value("inputs", 100);
    int epochs = cmp.value("epochs", 300);
    double clip = cmp.value("weight_clip", 0.25);
    std::vector<std::uint32_t> lengths =
        cmp.value("lengths", std::vector<std::uint32_t>{256, 1024});

    RefNetwork net = [&] {
        if (cmp.contains("weight_file")) {
            WeightFile wf =
                read_weight_file(cmp["weight_file"].get<std::string>());
            return RefNetwork(wf.spec, wf.weights);
        }
        NetworkSpec spec =
            spec_from_config(cfg.section("network"), {26, 30, 1});
        return train_synthetic(spec, cfg.seed, epochs, clip);
    }();
    const NetworkSpec& spec = net.spec();

    Rng rng(SeedSplitter(cfg.seed).derive(21));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> batch;
    for (int i = 0; i < inputs; ++i) {
        std::vector<double> x(spec.input_width());
        for (auto& v : x) {
            v = u(rng);
        }
        batch.push_back(std::move(x));
    }
    CsvFile out(cfg.out_dir + "/compare_sc.csv",
                "length,mean_abs_err,max_abs_err");
    for (std::uint32_t L : lengths) {
        ScNetwork sc(spec, net.weights(), L,
                     SeedSplitter(cfg.seed).derive(22));
        double mean = 0.0, mx = 0.0;
        for (int i = 0; i < inputs; ++i) {
            double e = std::fabs(sc.forward(batch[i], i).q -
                                 net.forward(batch[i]));
            mean += e;
            mx = std::max(mx, e);
        }
        mean /= inputs;
        out.row(std::to_string(L) + "," + fmt(mean) + "," + fmt(mx));
        em.metric("sc_mean_abs_err_L" + std::to_string(L), mean, "abs");
        em.metric("sc_max_abs_err_L" + std::to_string(L), mx, "abs");
        em.note("L=" + std::to_string(L) + " mean |q_sc - q_exact| = " +
                fmt(mean));
    }
}

// ---- environments ----

std::unique_ptr<Environment> make_env(const ExperimentConfig& cfg,
                                      std::string& kind_out) {
    const auto& env = cfg.section("env");
    std::string kind = env.value("kind", std::string());
    if (kind.empty()) {
        throw ConfigError("env.kind is required for this command");
    }
    kind_out = kind;
    std::uint64_t trace_seed = SeedSplitter(cfg.seed).derive(31);
    if (kind == "cloud") {
        CloudConfig c;
        c.n_servers = env.value("n_servers", 6);
        c.group_size = env.value("group_size", 3);
        c.encoder_width = env.value("encoder_width", 4);
        c.idle_sleep_s = env.value("idle_sleep_s", 90.0);
        c.w_power = env.value("w_power", 1.0);
        c.w_latency = env.value("w_latency", 1.0);
        c.jobs = env.contains("trace_file")
                     ? read_job_csv(env["trace_file"].get<std::string>())
                     : gen_job_trace(env.value("jobs", 100),
                                     env.value("rate_per_s", 0.02),
                                     trace_seed);
        return std::make_unique<CloudEnv>(std::move(c));
    }
    if (kind == "grid") {
        GridConfig g;
        g.kappa = env.value("kappa", 0.02);
        g.base_load_kw = env.value("base_load_kw", 0.4);
        g.tasks = env.contains("trace_file")
                      ? read_task_csv(env["trace_file"].get<std::string>())
                      : gen_task_set(env.value("tasks", 100), trace_seed);
        g.weather =
            env.contains("weather_file")
                ? read_weather_csv(env["weather_file"].get<std::string>())
                : gen_weather(GridConfig::kSlotsPerDay,
                              GridConfig::kSlotsPerDay,
                              SeedSplitter(cfg.seed).derive(32));
        return std::make_unique<GridEnv>(std::move(g));
    }
    if (kind == "hvac") {
        HvacConfig h;
        h.zones = env.value("zones", 1);
        h.steps = env.value("steps", 960);
        h.lambda = env.value("lambda", 1.0);
        h.weather =
            env.contains("weather_file")
                ? read_weather_csv(env["weather_file"].get<std::string>())
                : gen_weather(h.steps + 8, 96,
                              SeedSplitter(cfg.seed).derive(33));
        return std::make_unique<HvacEnv>(std::move(h));
    }
    throw ConfigError("unknown env.kind: " + kind);
}

AgentConfig agent_from_config(const ExperimentConfig& cfg) {
    const auto& a = cfg.section("agent");
    AgentConfig ac;
    std::string mode = a.value("mode", std::string("discrete"));
    if (mode == "discrete") {
        ac.disc = Discounting::discrete(a.value("gamma", 0.9));
    } else if (mode == "continuous") {
        ac.disc = Discounting::continuous(a.value("beta", 0.001));
    } else {
        throw ConfigError("agent.mode must be discrete or continuous");
    }
    ac.rho = a.value("rho", 10.0);
    ac.clip_targets = a.value("clip", true);
    ac.eps_start = a.value("eps_start", 1.0);
    ac.eps_min = a.value("eps_min", 0.05);
    ac.anneal_episodes = a.value("anneal_episodes", 150);
    ac.memory_capacity = a.value("memory", std::size_t{20000});
    ac.batch_size = a.value("batch", 32);
    ac.learning_rate = a.value("learning_rate", 0.05);
    ac.weight_clip = a.value("weight_clip", 0.25);
    ac.refresh_batches = a.value("refresh_batches", 8);
    ac.offline_epochs = a.value("offline_epochs", 20);
    ac.double_q = a.value("double_q", true);
    ac.seed = cfg.seed;
    return ac;
}

NetworkSpec env_network_spec(const std::string& kind, const Environment& env,
                             const ExperimentConfig& cfg) {
    const auto& a = cfg.section("agent");
    int hidden = a.value("hidden", kind == "grid" ? 26 : kind == "hvac" ? 20
                                                                       : 30);
    NetworkSpec spec;
    spec.widths = {env.feature_width(), hidden, 1};
    return spec;
}

// Runs one fixed-policy episode (no learning) and reports the same metrics.
EpisodeMetrics run_policy_episode(
    Environment& env, int episode, std::uint64_t seed,
    const std::function<int(const Environment&, int)>& policy) {
    EpisodeMetrics m;
    m.episode = episode;
    env.reset(seed);
    int k = 0;
    while (!env.done()) {
        int a = policy(env, k++);
        if (!env.action_valid(a)) {
            throw std::runtime_error("baseline chose invalid action");
        }
        StepResult sr = env.step(a);
        m.steps += 1;
        m.return_sum += sr.reward;
        m.energy_or_cost += sr.energy_or_cost;
        m.violations += sr.violations;
    }
    return m;
}

std::function<int(const Environment&, int)> baseline_policy(
    const std::string& kind, Environment& env) {
    if (kind == "cloud") {
        auto* cloud = dynamic_cast<CloudEnv*>(&env);
        int n = cloud->config().n_servers;
        return [n](const Environment&, int k) {
            return cloud_round_robin_action(k, n);
        };
    }
    if (kind == "grid") {
        return [](const Environment& e, int) {
            const auto& ge = dynamic_cast<const GridEnv&>(e);
            return grid_greedy_action(ge.current_task());
        };
    }
    if (kind == "hvac") {
        auto* hvac = dynamic_cast<HvacEnv*>(&env);
        auto controller =
            std::make_shared<HvacHysteresis>(hvac->config());
        return [controller](const Environment& e, int) {
            return controller->action(dynamic_cast<const HvacEnv&>(e));
        };
    }
    throw ConfigError("no baseline for env kind " + kind);
}

void cmd_train(const ExperimentConfig& cfg, Emitter& em) {
    std::string kind;
    auto env = make_env(cfg, kind);
    const auto& a = cfg.section("agent");
    int episodes = a.value("episodes", 200);
    int offline = a.value("offline_episodes", 20);

    if (cfg.baseline) {
        auto policy = baseline_policy(kind, *env);
        CsvFile out(cfg.out_dir + "/episodes.csv",
                    EpisodeMetrics::csv_header());
        EpisodeMetrics m = run_policy_episode(*env, 0, cfg.seed, policy);
        out.row(m.csv_row());
        em.metric("baseline_energy_or_cost", m.energy_or_cost, "env");
        em.metric("baseline_return", m.return_sum, "reward");
        em.metric("baseline_violations", m.violations, "count");
        em.note(kind + " baseline energy_or_cost " + fmt(m.energy_or_cost));
        return;
    }

    AgentConfig ac = agent_from_config(cfg);
    ac.anneal_episodes = std::min(ac.anneal_episodes, episodes);
    DrlAgent agent(env_network_spec(kind, *env, cfg), ac);
    agent.offline_construct(*env, offline);
    CsvFile out(cfg.out_dir + "/episodes.csv", EpisodeMetrics::csv_header());
    EpisodeMetrics last;
    for (int ep = 0; ep < episodes; ++ep) {
        last = agent.online_episode(*env, ep, true);
        out.row(last.csv_row());
    }
    // Greedy evaluation episode on the trained policy.
    EpisodeMetrics eval = agent.online_episode(*env, episodes, false);
    out.row(eval.csv_row());
    write_weight_file(cfg.out_dir + "/checkpoint.json",
                      agent.network().spec(), agent.network().weights(),
                      cfg.seed);
    em.metric("final_energy_or_cost", eval.energy_or_cost, "env");
    em.metric("final_return", eval.return_sum, "reward");
    em.metric("final_violations", eval.violations, "count");
    em.metric("episodes", episodes, "count");
    em.note(kind + " DRL greedy energy_or_cost " + fmt(eval.energy_or_cost));
}

void cmd_evaluate(const ExperimentConfig& cfg, Emitter& em) {
    std::string kind;
    auto env = make_env(cfg, kind);
    const auto& cmp = cfg.section("compare");
    if (!cmp.contains("weight_file")) {
        throw ConfigError("evaluate requires compare.weight_file");
    }
    WeightFile wf = read_weight_file(cmp["weight_file"].get<std::string>());
    AgentConfig ac = agent_from_config(cfg);
    DrlAgent agent(wf.spec, ac);
    agent.network().weights() = wf.weights;
    EpisodeMetrics m = agent.online_episode(*env, 0, false);
    CsvFile out(cfg.out_dir + "/episodes.csv", EpisodeMetrics::csv_header());
    out.row(m.csv_row());
    em.metric("eval_energy_or_cost", m.energy_or_cost, "env");
    em.metric("eval_return", m.return_sum, "reward");
    em.note(kind + " evaluation energy_or_cost " + fmt(m.energy_or_cost));
}

void cmd_gen_traces(const ExperimentConfig& cfg, Emitter& em) {
    const auto& t = cfg.section("traces");
    int jobs = t.value("jobs", 100);
    double rate = t.value("rate_per_s", 0.02);
    std::vector<int> task_sets =
        t.value("task_sets", std::vector<int>{100, 300, 500});
    int weather_days = t.value("weather_days", 10);
    SeedSplitter seeds(cfg.seed);
    write_job_csv(cfg.out_dir + "/jobs.csv",
                  gen_job_trace(jobs, rate, seeds.derive(41)));
    for (int n : task_sets) {
        write_task_csv(cfg.out_dir + "/tasks_" + std::to_string(n) + ".csv",
                       gen_task_set(n, seeds.derive(42)));
    }
    write_weather_csv(cfg.out_dir + "/weather_hourly.csv",
                      gen_weather(24 * weather_days, 24, seeds.derive(43)));
    write_weather_csv(cfg.out_dir + "/weather_15min.csv",
                      gen_weather(96 * weather_days, 96, seeds.derive(44)));
    em.metric("jobs_written", jobs, "count");
    em.note("traces written to " + cfg.out_dir);
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    Emitter em;
    em.run_id = cfg.command + "-" + std::to_string(cfg.seed);
    em.seed = cfg.seed;
    if (cfg.command == "bench-apc") {
        cmd_bench_apc(cfg, em);
    } else if (cfg.command == "bench-stanh") {
        cmd_bench_stanh(cfg, em);
    } else if (cfg.command == "bench-timing") {
        cmd_bench_timing(cfg, em);
    } else if (cfg.command == "compare-sc") {
        cmd_compare_sc(cfg, em);
    } else if (cfg.command == "train") {
        cmd_train(cfg, em);
    } else if (cfg.command == "evaluate") {
        cmd_evaluate(cfg, em);
    } else if (cfg.command == "gen-traces") {
        cmd_gen_traces(cfg, em);
    } else {
        throw ConfigError("unknown command: " + cfg.command);
    }
    em.flush(cfg.out_dir);
    return 0;
}

int run_experiment_catching(const ExperimentConfig& cfg, std::string& error) {
    try {
        return run_experiment(cfg);
    } catch (const ConfigError& e) {
        error = e.what();
        return 2;
    } catch (const std::exception& e) {
        error = e.what();
        return 3;
    }
}

}  // namespace scdrl
