#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "scdrl/ref_network.hpp"
#include "scdrl/util.hpp"

using namespace scdrl;

namespace {

NetworkSpec make_spec(std::vector<int> widths) {
    NetworkSpec s;
    s.widths = std::move(widths);
    return s;
}

// Straight-line evaluator for a widths={2,2,1} all-tanh network, kept
// independent of the layered implementation.
double dual_forward(const WeightSet& w, double x0, double x1) {
    const Matrix& a = w.layers[0];
    const Matrix& b = w.layers[1];
    double h0 = std::tanh(a.at(0, 0) * x0 + a.at(0, 1) * x1);
    double h1 = std::tanh(a.at(1, 0) * x0 + a.at(1, 1) * x1);
    return std::tanh(b.at(0, 0) * h0 + b.at(0, 1) * h1);
}

double loss(const RefNetwork& net, std::span<const double> x, double target) {
    double d = net.forward(x) - target;
    return 0.5 * d * d;
}

void check_gradient(const NetworkSpec& spec, std::uint64_t seed) {
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

    const double h = 1e-6;
    Rng pick_rng(seed + 2);
    for (std::size_t l = 0; l < grad.layers.size(); ++l) {
        std::uniform_int_distribution<int> pr(0, grad.layers[l].rows - 1);
        std::uniform_int_distribution<int> pc(0, grad.layers[l].cols - 1);
        for (int t = 0; t < 12; ++t) {
            int r = pr(pick_rng), c = pc(pick_rng);
            RefNetwork plus = net, minus = net;
            plus.weights().layers[l].at(r, c) += h;
            minus.weights().layers[l].at(r, c) -= h;
            double fd =
                (loss(plus, x, target) - loss(minus, x, target)) / (2 * h);
            double an = grad.layers[l].at(r, c);
            double denom = std::max({std::fabs(fd), std::fabs(an), 1e-8});
            REQUIRE(std::fabs(fd - an) / denom <= 1e-4);
        }
    }
}

}  // namespace

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(make_spec({}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make_spec({4}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make_spec({4, 0, 1}).validate(), std::invalid_argument);
    CHECK_NOTHROW(make_spec({26, 30, 1}).validate());
}

TEST_CASE("zero weights give zero output") {
    NetworkSpec spec = make_spec({5, 4, 1});
    RefNetwork net(spec, WeightSet::zeros(spec));
    std::vector<double> x{0.3, -0.7, 0.1, 0.9, -0.2};
    CHECK(net.forward(x) == 0.0);
}

TEST_CASE("one-wide network is tanh of a scaled input") {
    NetworkSpec spec = make_spec({1, 1});
    WeightSet w = WeightSet::zeros(spec);
    w.layers[0].at(0, 0) = 0.8;
    RefNetwork net(spec, w);
    for (double x : {-0.9, -0.2, 0.0, 0.5, 1.0}) {
        CHECK(net.forward(std::vector<double>{x}) ==
              doctest::Approx(std::tanh(0.8 * x)).epsilon(1e-12));
    }
}

TEST_CASE("layered forward matches straight-line reimplementation") {
    NetworkSpec spec = make_spec({2, 2, 1});
    RefNetwork net(spec, 99);
    Rng rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        double x0 = u(rng), x1 = u(rng);
        double expect = dual_forward(net.weights(), x0, x1);
        CHECK(net.forward(std::vector<double>{x0, x1}) ==
              doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("gradient vanishes when output equals target") {
    NetworkSpec spec = make_spec({3, 4, 1});
    RefNetwork net(spec, 7);
    std::vector<double> x{0.2, -0.5, 0.8};
    double target = net.forward(x);
    WeightSet grad = WeightSet::zeros(spec);
    net.backward(x, target, grad);
    for (const auto& m : grad.layers) {
        for (double g : m.data) {
            CHECK(g == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("backward matches finite differences") {
    check_gradient(make_spec({3, 4, 1}), 11);
    check_gradient(make_spec({26, 30, 1}), 12);
}

TEST_CASE("input gradient matches finite differences") {
    NetworkSpec spec = make_spec({4, 5, 1});
    RefNetwork net(spec, 21);
    std::vector<double> x{0.1, -0.6, 0.4, 0.9};
    double target = 0.3;
    WeightSet grad = WeightSet::zeros(spec);
    std::vector<double> gx = net.backward(x, target, grad);
    const double h = 1e-6;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        double fd = (loss(net, xp, target) - loss(net, xm, target)) / (2 * h);
        CHECK(gx[i] == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("SGD reduces mse on a synthetic target") {
    NetworkSpec spec = make_spec({4, 12, 1});
    RefNetwork net(spec, 3);
    Rng rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> feats;
    std::vector<double> targets;
    for (int i = 0; i < 512; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) {
            v = u(rng);
        }
        targets.push_back(0.6 * std::tanh(x[0] - 0.5 * x[1] + 0.3 * x[2] * 1.0 +
                                          std::sin(x[3])));
        feats.push_back(std::move(x));
    }
    TrainConfig tc;
    tc.learning_rate = 0.05;
    auto batch_mse = [&](std::size_t b) {
        return net.train_minibatch(
            std::span<const std::vector<double>>(&feats[b], 32),
            std::span<const double>(&targets[b], 32), tc);
    };
    double first = 0.0, last = 0.0;
    for (int e = 0; e < 125; ++e) {
        for (std::size_t b = 0; b + 32 <= feats.size(); b += 32) {
            double m = batch_mse(b);
            if (e == 0 && b == 0) {
                first = m;
            }
            last = m;
        }
    }
    CHECK(first / last >= 10.0);
}

TEST_CASE("training is deterministic") {
    NetworkSpec spec = make_spec({3, 6, 1});
    auto run = [&] {
        RefNetwork net(spec, 17);
        Rng rng(4);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        TrainConfig tc;
        tc.learning_rate = 0.1;
        for (int i = 0; i < 200; ++i) {
            std::vector<std::vector<double>> f{{u(rng), u(rng), u(rng)}};
            std::vector<double> t{u(rng) * 0.5};
            net.train_minibatch(f, t, tc);
        }
        return net.weights();
    };
    WeightSet a = run(), b = run();
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(a.layers[l].data == b.layers[l].data);
    }
}

TEST_CASE("weight_clip projects after each step") {
    NetworkSpec spec = make_spec({2, 3, 1});
    RefNetwork net(spec, 42);
    TrainConfig tc;
    tc.learning_rate = 1.0;
    tc.weight_clip = 0.25;
    Rng rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        std::vector<std::vector<double>> f{{u(rng), u(rng)}};
        std::vector<double> t{u(rng)};
        net.train_minibatch(f, t, tc);
        for (const auto& m : net.weights().layers) {
            for (double w : m.data) {
                REQUIRE(std::fabs(w) <= 0.25 + 1e-12);
            }
        }
    }
}

TEST_CASE("tanh output stays in the open unit interval") {
    NetworkSpec spec = make_spec({6, 10, 1});
    RefNetwork net(spec, 31);
    Rng rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x(6);
        for (auto& v : x) {
            v = u(rng);
        }
        double y = net.forward(x);
        CHECK(y > -1.0);
        CHECK(y < 1.0);
    }
}

TEST_CASE("init draws respect the fan-in bound") {
    NetworkSpec spec = make_spec({16, 8, 1});
    WeightSet w = WeightSet::init(spec, 55);
    double bound0 = 1.0 / std::sqrt(16.0);
    double bound1 = 1.0 / std::sqrt(8.0);
    double max0 = 0.0, max1 = 0.0;
    for (double v : w.layers[0].data) {
        max0 = std::max(max0, std::fabs(v));
    }
    for (double v : w.layers[1].data) {
        max1 = std::max(max1, std::fabs(v));
    }
    CHECK(max0 <= bound0);
    CHECK(max1 <= bound1);
    CHECK(max0 > 0.5 * bound0);
    WeightSet w2 = WeightSet::init(spec, 55);
    CHECK(w.layers[0].data == w2.layers[0].data);
}
