// Acceptance gate: one PASS/FAIL line per criterion, exit 0 only when all
// criteria hold.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scdrl/drl.hpp"
#include "scdrl/envs.hpp"
#include "scdrl/harness.hpp"
#include "scdrl/ref_network.hpp"
#include "scdrl/sc_network.hpp"
#include "scdrl/sc_units.hpp"
#include "scdrl/util.hpp"

using namespace scdrl;
using nlohmann::json;

namespace {

int g_failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
    std::printf("%s  %2d. %s (%s)\n", ok ? "PASS" : "FAIL", id, title,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) {
        ++g_failures;
    }
}

std::string fmtd(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::filesystem::path fresh_dir(const std::string& name) {
    std::filesystem::path d = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::map<std::string, double> run_metrics(const json& config,
                                          const std::string& dir_name) {
    auto dir = fresh_dir(dir_name);
    json j = config;
    j["out_dir"] = dir.string();
    ExperimentConfig cfg = ExperimentConfig::parse(j);
    run_experiment(cfg);
    std::map<std::string, double> out;
    std::ifstream f(dir / "metrics.csv");
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        std::stringstream ss(line);
        std::string run_id, metric, value;
        std::getline(ss, run_id, ',');
        std::getline(ss, metric, ',');
        std::getline(ss, value, ',');
        out[metric] = std::stod(value);
    }
    return out;
}

// ---- 1: APC inaccuracy table ----

void criterion_1() {
    const std::vector<std::uint32_t> lengths{256, 512, 1024};
    const double expect_orig[2][3] = {{2.56, 2.12, 1.71}, {2.34, 2.03, 1.56}};
    bool ok = true;
    std::string detail;
    int ni = 0;
    for (int n : {26, 30}) {
        for (std::size_t li = 0; li < lengths.size(); ++li) {
            Rng rng(1);
            double imp =
                100.0 * apc_inaccuracy(ApcDesign::improved(n), lengths[li],
                                       1000, rng);
            double orig =
                100.0 * apc_inaccuracy(ApcDesign::original(n), lengths[li],
                                       1000, rng);
            if (imp > 1.0) {
                ok = false;
                detail += " improved n=" + std::to_string(n) +
                          " L=" + std::to_string(lengths[li]) + " " +
                          fmtd(imp) + "%";
            }
            if (std::fabs(orig - expect_orig[ni][li]) > 1.0) {
                ok = false;
                detail += " original n=" + std::to_string(n) +
                          " L=" + std::to_string(lengths[li]) + " " +
                          fmtd(orig) + "%";
            }
        }
        ++ni;
    }
    if (ok) {
        detail = "improved <= 1%, original within 1pp of the reference table";
    }
    report(1, "APC inaccuracy table", ok, detail);
}

// ---- 2: timing model ----

void criterion_2() {
    auto pc = PipelineConfig::pipelined();
    bool ok = delay_ns(256, pc) == 256 * 1.02 &&
              std::fabs(delay_ns(256, pc) - 261.12) < 1e-9 &&
              std::fabs(delay_ns(512, pc) - 522.24) < 1e-9 &&
              std::fabs(delay_ns(1024, pc) - 1044.48) < 1e-9;
    // Exact linearity in L.
    for (std::uint32_t L : {64u, 100u, 2048u}) {
        ok = ok && delay_ns(2 * L, pc) == 2.0 * delay_ns(L, pc);
    }
    report(2, "pipelined delay model", ok,
           "delay(256)=" + fmtd(delay_ns(256, pc)) + " ns, exact linearity");
}

// ---- 3: SC vs exact inference ----

void criterion_3() {
    NetworkSpec spec;
    spec.widths = {26, 30, 1};
    RefNetwork net(spec, 42);
    Rng rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto target_fn = [](const std::vector<double>& x) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            s += std::sin(1.7 * x[i] + 0.3 * i) * (i % 3 == 0 ? 0.5 : 0.2);
        }
        return -0.5 + 0.45 * std::tanh(s);
    };
    std::vector<std::vector<double>> feats;
    std::vector<double> targs;
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> x(26);
        for (auto& v : x) {
            v = u(rng);
        }
        feats.push_back(x);
        targs.push_back(target_fn(x));
    }
    TrainConfig tc;
    tc.learning_rate = 0.05;
    tc.weight_clip = 0.25;
    for (int epoch = 0; epoch < 400; ++epoch) {
        for (int b = 0; b + 32 <= 2000; b += 32) {
            net.train_minibatch(
                std::span<const std::vector<double>>(&feats[b], 32),
                std::span<const double>(&targs[b], 32), tc);
        }
    }
    double mean[2] = {0, 0};
    std::uint32_t Ls[2] = {256, 1024};
    for (int li = 0; li < 2; ++li) {
        ScNetwork sc(spec, net.weights(), Ls[li], 99);
        for (int i = 0; i < 100; ++i) {
            mean[li] +=
                std::fabs(sc.forward(feats[i], i).q - net.forward(feats[i]));
        }
        mean[li] /= 100;
    }
    bool ok = mean[1] <= 0.10 && mean[1] < mean[0];
    report(3, "SC inference tracks the exact network", ok,
           "mean err " + fmtd(mean[1]) + " at L=1024 vs " + fmtd(mean[0]) +
               " at L=256");
}

// ---- 4: Stanh fidelity ----

void criterion_4() {
    const int k = 16;
    const std::uint32_t L = 1024;
    double max_err = 0.0;
    SeedSplitter seeds(1);
    for (int i = -8; i <= 8; i += 2) {
        double x = i / 10.0;
        SngConfig cfg;
        cfg.seed = seeds.derive(100 + i) | 1;
        Sng sng(cfg);
        double d = stanh(sng.encode(x, L, Encoding::Bipolar), k).decode();
        max_err = std::max(max_err, std::fabs(d - std::tanh(8.0 * x)));
    }
    report(4, "Stanh K=16 fidelity", max_err <= 0.1,
           "max abs err " + fmtd(max_err) + " on the x grid");
}

// ---- 5: power model ----

void criterion_5() {
    bool ok = server_power(0.0) == 87.0 && server_power(1.0) == 145.0;
    double prev = server_power(0.0);
    for (int i = 1; i <= 1000; ++i) {
        double p = server_power(i / 1000.0);
        ok = ok && p >= prev;
        prev = p;
    }
    report(5, "server power anchors and monotonicity", ok,
           "P(0)=87 W, P(1)=145 W, 1001-point grid monotone");
}

// ---- 6: DRL correctness oracle ----

struct ChainMdp {
    double reward(int s, int a) const {
        static const double r[3][2] = {{-0.04, -0.1}, {-0.02, -0.08}, {0, 0}};
        return r[s][a];
    }
    int next(int s, int a) const { return a == 0 ? std::min(s + 1, 2) : s; }
    bool terminal(int s) const { return s == 2; }
};

void criterion_6() {
    ChainMdp mdp;
    const double gamma = 0.9;
    // Value-iteration oracle over Q.
    std::vector<std::vector<double>> qstar(3, std::vector<double>(2, 0.0));
    for (int it = 0; it < 10000; ++it) {
        auto nq = qstar;
        for (int s = 0; s < 2; ++s) {
            for (int a = 0; a < 2; ++a) {
                int sn = mdp.next(s, a);
                double boot =
                    mdp.terminal(sn)
                        ? 0.0
                        : std::max(qstar[sn][0], qstar[sn][1]);
                nq[s][a] = mdp.reward(s, a) + gamma * boot;
            }
        }
        qstar = nq;
    }

    DoubleQ dq(3, 2);
    Discounting disc = Discounting::discrete(gamma);
    Rng rng(31);
    std::uniform_int_distribution<int> pick(0, 1);
    std::vector<std::vector<int>> visits(3, std::vector<int>(2, 0));
    int updates = 0;
    for (int ep = 0; ep < 5000 && updates < 100000; ++ep) {
        int s = ep % 2;
        for (int t = 0; t < 20 && !mdp.terminal(s); ++t) {
            int a = pick(rng);
            int sn = mdp.next(s, a);
            dq.update(s, a, mdp.reward(s, a), sn, mdp.terminal(sn), disc, 1.0,
                      1.0 / ++visits[s][a]);
            ++updates;
            s = sn;
        }
    }
    double max_dq = 0.0;
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) {
            max_dq = std::max(max_dq, std::fabs(dq.value(s, a) - qstar[s][a]));
        }
    }

    // Network path: fit a 3-4-1 net on (state one-hot, action) rows and check
    // its greedy policy against the oracle.
    NetworkSpec spec;
    spec.widths = {3, 4, 1};
    RefNetwork net(spec, 5);
    TrainConfig tc;
    tc.learning_rate = 0.1;
    std::vector<std::vector<double>> feats;
    std::vector<double> targets;
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) {
            feats.push_back({s == 0 ? 1.0 : 0.0, s == 1 ? 1.0 : 0.0,
                             static_cast<double>(a)});
            targets.push_back(qstar[s][a]);
        }
    }
    for (int e = 0; e < 4000; ++e) {
        net.train_minibatch(feats, targets, tc);
    }
    int match = 0;
    for (int s = 0; s < 2; ++s) {
        double q0 = net.forward(feats[2 * s + 0]);
        double q1 = net.forward(feats[2 * s + 1]);
        int greedy = q0 >= q1 ? 0 : 1;
        int best = qstar[s][0] >= qstar[s][1] ? 0 : 1;
        if (greedy == best) {
            ++match;
        }
    }
    bool ok = max_dq <= 0.05 && match == 2;
    report(6, "double-Q matches value iteration", ok,
           "max |Q - Q*| " + fmtd(max_dq) + ", greedy match " +
               std::to_string(match) + "/2 states");
}

// ---- 7: control quality on the three environments ----

json env_config(const std::string& kind) {
    json j{{"version", 1}, {"command", "train"}, {"seed", 1}};
    if (kind == "cloud") {
        j["env"] = {{"kind", "cloud"}, {"jobs", 100}, {"rate_per_s", 0.02}};
        j["agent"] = {{"mode", "discrete"},     {"gamma", 0.9},
                      {"rho", 60},              {"learning_rate", 0.1},
                      {"refresh_batches", 32},  {"memory", 200000},
                      {"episodes", 200},        {"offline_episodes", 20},
                      {"anneal_episodes", 100}};
    } else if (kind == "grid") {
        j["env"] = {{"kind", "grid"}, {"tasks", 100}};
        j["agent"] = {{"mode", "discrete"},
                      {"gamma", 0.3},
                      {"rho", 20},
                      {"episodes", 120},
                      {"anneal_episodes", 100}};
    } else {
        j["env"] = {{"kind", "hvac"}, {"zones", 1}, {"steps", 960}};
        j["agent"] = {{"mode", "discrete"},    {"gamma", 0.0},
                      {"rho", 30},             {"learning_rate", 0.1},
                      {"refresh_batches", 32}, {"memory", 200000},
                      {"episodes", 60},        {"offline_episodes", 30},
                      {"offline_epochs", 200}, {"anneal_episodes", 50}};
    }
    return j;
}

void criterion_7() {
    // (a) cloud: DRL energy <= round-robin on the same trace.
    json cloud = env_config("cloud");
    auto drl = run_metrics(cloud, "scdrl_acc7_cloud");
    cloud["baseline"] = true;
    auto base = run_metrics(cloud, "scdrl_acc7_cloud_base");
    double c_drl = drl.at("final_energy_or_cost");
    double c_base = base.at("baseline_energy_or_cost");
    bool ok_a = c_drl <= c_base;
    report(7, "cloud DRL beats round-robin energy", ok_a,
           fmtd(c_drl) + " Wh vs " + fmtd(c_base) + " Wh");

    // (b) grid: DRL cost <= greedy by at least 5%.
    json grid = env_config("grid");
    auto gdrl = run_metrics(grid, "scdrl_acc7_grid");
    grid["baseline"] = true;
    auto gbase = run_metrics(grid, "scdrl_acc7_grid_base");
    double g_drl = gdrl.at("final_energy_or_cost");
    double g_base = gbase.at("baseline_energy_or_cost");
    bool ok_b = g_drl <= 0.95 * g_base;
    report(7, "grid DRL beats greedy cost by 5%", ok_b,
           fmtd(g_drl) + " vs " + fmtd(g_base) + " (" +
               fmtd(100.0 * (1.0 - g_drl / g_base)) + "% lower)");

    // (c) hvac: DRL cost <= hysteresis with violation rate <= 5%.
    json hvac = env_config("hvac");
    auto hdrl = run_metrics(hvac, "scdrl_acc7_hvac");
    hvac["baseline"] = true;
    auto hbase = run_metrics(hvac, "scdrl_acc7_hvac_base");
    double h_drl = hdrl.at("final_energy_or_cost");
    double h_base = hbase.at("baseline_energy_or_cost");
    double viol_rate = hdrl.at("final_violations") / 960.0;
    bool ok_c = h_drl <= h_base && viol_rate <= 0.05;
    report(7, "hvac DRL beats hysteresis within comfort", ok_c,
           fmtd(h_drl) + " vs " + fmtd(h_base) + ", violation rate " +
               fmtd(100.0 * viol_rate) + "%");
}

// ---- 8: determinism of every command ----

void criterion_8() {
    std::vector<std::pair<std::string, json>> runs;
    runs.push_back({"bench-apc",
                    json{{"version", 1},
                         {"command", "bench-apc"},
                         {"sc", {{"trials", 100}, {"lengths", {256}}}}}});
    runs.push_back(
        {"bench-stanh", json{{"version", 1}, {"command", "bench-stanh"}}});
    runs.push_back(
        {"bench-timing", json{{"version", 1}, {"command", "bench-timing"}}});
    runs.push_back(
        {"compare-sc",
         json{{"version", 1},
              {"command", "compare-sc"},
              {"network", {{"widths", {4, 5, 1}}}},
              {"compare",
               {{"inputs", 5}, {"epochs", 2}, {"lengths", {256}}}}}});
    runs.push_back({"gen-traces",
                    json{{"version", 1},
                         {"command", "gen-traces"},
                         {"traces",
                          {{"jobs", 20}, {"task_sets", {10}},
                           {"weather_days", 1}}}}});
    json train{{"version", 1},
               {"command", "train"},
               {"env", {{"kind", "grid"}, {"tasks", 5}}},
               {"agent", {{"episodes", 2}, {"offline_episodes", 1}}}};
    runs.push_back({"train", train});

    bool ok = true;
    std::string detail = "all commands byte-identical on re-run";
    std::filesystem::path train_dir;
    for (const auto& [name, cfg] : runs) {
        std::vector<std::string> outputs;
        for (int rep = 0; rep < 2; ++rep) {
            auto dir = fresh_dir("scdrl_acc8_" + name + std::to_string(rep));
            json j = cfg;
            j["out_dir"] = dir.string();
            run_experiment(ExperimentConfig::parse(j));
            // Summaries mention the output directory; the criterion covers
            // the CSV artifacts.
            std::vector<std::filesystem::path> files;
            for (const auto& entry :
                 std::filesystem::directory_iterator(dir)) {
                if (entry.path().extension() != ".txt") {
                    files.push_back(entry.path());
                }
            }
            std::sort(files.begin(), files.end());
            std::string blob;
            for (const auto& p : files) {
                blob += p.filename().string() + "\n" + slurp(p);
            }
            outputs.push_back(blob);
            if (name == "train" && rep == 0) {
                train_dir = dir;
            }
        }
        if (outputs[0] != outputs[1]) {
            ok = false;
            detail = name + " output differs between identical runs";
        }
    }
    // evaluate, fed by the train checkpoint above.
    json ev{{"version", 1},
            {"command", "evaluate"},
            {"env", {{"kind", "grid"}, {"tasks", 5}}},
            {"compare",
             {{"weight_file", (train_dir / "checkpoint.json").string()}}}};
    std::vector<std::string> outputs;
    for (int rep = 0; rep < 2; ++rep) {
        auto dir = fresh_dir("scdrl_acc8_evaluate" + std::to_string(rep));
        json j = ev;
        j["out_dir"] = dir.string();
        run_experiment(ExperimentConfig::parse(j));
        outputs.push_back(slurp(dir / "metrics.csv") +
                          slurp(dir / "episodes.csv"));
    }
    if (outputs[0] != outputs[1]) {
        ok = false;
        detail = "evaluate output differs between identical runs";
    }
    report(8, "identical config and seed reproduce byte-identical outputs",
           ok, detail);
}

// ---- 9: gradient checks on all deployed shapes ----

bool gradient_ok(const std::vector<int>& widths, std::uint64_t seed,
                 double& worst) {
    NetworkSpec spec;
    spec.widths = widths;
    RefNetwork net(spec, seed);
    Rng rng(seed + 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(spec.input_width());
    for (auto& v : x) {
        v = u(rng);
    }
    double target = -0.4;
    WeightSet grad = WeightSet::zeros(spec);
    net.backward(x, target, grad);
    auto loss = [&](const RefNetwork& n) {
        double d = n.forward(x) - target;
        return 0.5 * d * d;
    };
    const double h = 1e-6;
    Rng pick(seed + 2);
    for (std::size_t l = 0; l < grad.layers.size(); ++l) {
        std::uniform_int_distribution<int> pr(0, grad.layers[l].rows - 1);
        std::uniform_int_distribution<int> pc(0, grad.layers[l].cols - 1);
        for (int t = 0; t < 16; ++t) {
            int r = pr(pick), c = pc(pick);
            RefNetwork plus = net, minus = net;
            plus.weights().layers[l].at(r, c) += h;
            minus.weights().layers[l].at(r, c) -= h;
            double fd = (loss(plus) - loss(minus)) / (2 * h);
            double an = grad.layers[l].at(r, c);
            double rel = std::fabs(fd - an) /
                         std::max({std::fabs(fd), std::fabs(an), 1e-8});
            worst = std::max(worst, rel);
            if (rel > 1e-4) {
                return false;
            }
        }
    }
    return true;
}

void criterion_9() {
    double worst = 0.0;
    bool ok = true;
    // Oracle shape, SC benchmark shape, and the three environment shapes
    // (cloud 2*4+6 features, grid 10, hvac 3+5+4).
    for (const auto& widths : std::vector<std::vector<int>>{
             {3, 4, 1}, {26, 30, 1}, {14, 30, 1}, {10, 26, 1}, {12, 20, 1}}) {
        ok = ok && gradient_ok(widths, 1000 + widths[0], worst);
    }
    report(9, "analytic gradients match finite differences", ok,
           "worst relative error " + fmtd(worst));
}

// ---- 10: Bellman clipping property ----

void criterion_10() {
    Rng rng(2024);
    std::uniform_real_distribution<double> urho(1.0, 100.0);
    std::uniform_real_distribution<double> uq(-1.0, 0.0);
    std::uniform_real_distribution<double> ug(0.0, 0.999999);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    bool ok = true;
    for (int i = 0; i < 10000 && ok; ++i) {
        double rho = urho(rng);
        double r = -2.0 * rho * unit(rng);
        double t = bellman_target(r, uq(rng), ug(rng), rho, true);
        ok = t >= -1.0 && t <= 0.0;
    }
    report(10, "clipped Bellman targets stay in [-1, 0]", ok,
           "10000 random (r, q', gamma, rho) draws");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (g_failures == 0) {
        std::printf("ALL CRITERIA PASS\n");
        return 0;
    }
    std::printf("%d criterion check(s) FAILED\n", g_failures);
    return 1;
}
