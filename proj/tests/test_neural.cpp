#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "hdqr/neural.hpp"

using namespace hdqr;

TEST_CASE("forward with zero parameters is zero") {
    QNetwork net(4, 3);
    std::vector<double> s{1.0, -2.0, 0.5, 3.0};
    for (double v : net.forward(s)) CHECK(v == 0.0);
}

TEST_CASE("single-path identity network passes nonnegative inputs through") {
    QNetwork net(1, 1, {1});
    net.layers()[0].w = {1.0};
    net.layers()[1].w = {1.0};
    for (double x : {0.0, 0.5, 2.0, 7.25})
        CHECK(net.forward(std::vector<double>{x})[0] == x);
    // rectifier clips the negative side
    CHECK(net.forward(std::vector<double>{-3.0})[0] == 0.0);
}

TEST_CASE("hand-evaluated two-layer forward") {
    QNetwork net(2, 1, {2});
    net.layers()[0].w = {1, 2, 3, 4};  // rows: [1,2], [3,4]
    net.layers()[0].b = {0.5, -10};
    net.layers()[1].w = {1, 1};
    net.layers()[1].b = {0.25};
    // z1 = [1*1+2*0+0.5, 3*1+4*0-10] = [1.5, -7] -> relu [1.5, 0] -> 1.75
    CHECK(net.forward(std::vector<double>{1, 0})[0] == doctest::Approx(1.75));
}

TEST_CASE("forward rejects dimension mismatch") {
    QNetwork net(3, 2);
    CHECK_THROWS(net.forward(std::vector<double>{1.0, 2.0}));
}

TEST_CASE("td_backward is zero for zero TD error or zero IS weight") {
    UniformSource rng(11);
    QNetwork net(3, 2);
    net.init_weights(rng);
    std::vector<double> s{0.3, -0.2, 0.9};
    double q = net.forward(s)[1];
    auto g0 = net.td_backward(s, 1, q, 1.0);
    for (auto& l : g0.layers) {
        for (double v : l.w) CHECK(v == 0.0);
        for (double v : l.b) CHECK(v == 0.0);
    }
    auto gw = net.td_backward(s, 1, q + 5.0, 0.0);
    for (auto& l : gw.layers)
        for (double v : l.w) CHECK(v == 0.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
    UniformSource rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        QNetwork net(4, 3, {5, 4});
        net.init_weights(rng);
        std::vector<double> s(4);
        for (auto& v : s) v = rng.next() * 2 - 1;
        int a = rng.next_int(3);
        double w = 0.25 + rng.next();
        double q = net.forward(s)[a];
        double y = q + (rng.next() * 1.6 - 0.8);  // stay in the quadratic region

        auto grad = net.td_backward(s, a, y, w);
        const double h = 1e-5;
        for (size_t li = 0; li < net.layers().size(); ++li) {
            for (size_t j = 0; j < net.layers()[li].w.size(); ++j) {
                double saved = net.layers()[li].w[j];
                net.layers()[li].w[j] = saved + h;
                double lp = w * huber_loss(y - net.forward(s)[a]);
                net.layers()[li].w[j] = saved - h;
                double lm = w * huber_loss(y - net.forward(s)[a]);
                net.layers()[li].w[j] = saved;
                double fd = -(lp - lm) / (2 * h);  // ascent orientation
                double an = grad.layers[li].w[j];
                CHECK(std::abs(an - fd) / std::max(std::abs(an) + std::abs(fd), 1e-3) <
                      1e-4);
            }
        }
    }
}

TEST_CASE("huber loss regions") {
    CHECK(huber_loss(0.5) == doctest::Approx(0.125));
    CHECK(huber_loss(1.0) == doctest::Approx(0.5));
    CHECK(huber_loss(3.0) == doctest::Approx(2.5));
    CHECK(huber_loss(-3.0) == doctest::Approx(2.5));
    // gradient of prediction bounded by the threshold
    QNetwork net(1, 1, {});
    net.layers()[0].w = {1.0};
    auto g = net.td_backward(std::vector<double>{1.0}, 0, 100.0, 1.0);
    CHECK(g.layers[0].w[0] == doctest::Approx(1.0));
}

TEST_CASE("apply_update with zero gradient leaves parameters unchanged") {
    UniformSource rng(2);
    QNetwork net(2, 2);
    net.init_weights(rng);
    RmsProp opt(net);
    auto before = net.layers();
    ParamSet zero;
    for (auto& l : net.layers()) zero.layers.emplace_back(l.in, l.out);
    opt.apply(net, zero);
    for (size_t i = 0; i < before.size(); ++i) CHECK(net.layers()[i].w == before[i].w);
}

TEST_CASE("constant gradient drives the step size toward the learning rate") {
    QNetwork net(1, 1, {});
    RmsProp opt(net, 1e-3);
    ParamSet g;
    g.layers.emplace_back(1, 1);
    g.layers[0].w[0] = 3.0;
    double prev = net.layers()[0].w[0];
    double step = 0;
    for (int i = 0; i < 300; ++i) {
        opt.apply(net, g);
        step = net.layers()[0].w[0] - prev;
        prev = net.layers()[0].w[0];
    }
    CHECK(step == doctest::Approx(1e-3).epsilon(1e-3));
}

TEST_CASE("scalar regression loss strictly decreases") {
    QNetwork net(1, 1, {});
    RmsProp opt(net, 1e-2);
    std::vector<double> s{1.0};
    double target = 2.0;
    double prev_loss = huber_loss(target - net.forward(s)[0]);
    for (int i = 0; i < 100; ++i) {
        opt.apply(net, net.td_backward(s, 0, target, 1.0));
        double loss = huber_loss(target - net.forward(s)[0]);
        CHECK(loss < prev_loss);
        prev_loss = loss;
    }
}

TEST_CASE("non-finite gradient is rejected") {
    QNetwork net(1, 1, {});
    RmsProp opt(net);
    ParamSet g;
    g.layers.emplace_back(1, 1);
    g.layers[0].w[0] = std::nan("");
    CHECK_THROWS(opt.apply(net, g));
}

TEST_CASE("copy_parameters is a deep copy") {
    UniformSource rng(9);
    QNetwork src(3, 2), dst(3, 2);
    src.init_weights(rng);
    copy_parameters(src, dst);
    std::vector<double> s{0.1, 0.2, 0.3};
    CHECK(src.forward(s) == dst.forward(s));
    src.layers()[0].w[0] += 1.0;
    CHECK(src.layers()[0].w != dst.layers()[0].w);

    QNetwork other(4, 2);
    CHECK_THROWS(copy_parameters(src, other));
}

TEST_CASE("checkpoint round-trips bitwise") {
    UniformSource rng(13);
    QNetwork net(5, 3);
    net.init_weights(rng);
    const char* path = "/tmp/hdqr_ckpt_test.txt";
    net.save(path);
    QNetwork back = QNetwork::load(path);
    REQUIRE(back.same_architecture(net));
    for (size_t i = 0; i < net.layers().size(); ++i) {
        CHECK(back.layers()[i].w == net.layers()[i].w);
        CHECK(back.layers()[i].b == net.layers()[i].b);
    }
    std::remove(path);
}
