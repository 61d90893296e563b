#pragma once

#include <span>
#include <string>
#include <vector>

#include "hdqr/common.hpp"

namespace hdqr {

struct Layer {
    int in = 0, out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;  // out

    Layer() = default;
    Layer(int in_, int out_) : in(in_), out(out_), w(in_ * out_, 0.0), b(out_, 0.0) {}
};

// Per-layer parameter-shaped accumulator (gradients, RMSprop state).
struct ParamSet {
    std::vector<Layer> layers;

    void zero();
    void add(const ParamSet& other);
    bool finite() const;
};

// Dense value network: ReLU hidden layers, identity output. One output unit
// per action.
class QNetwork {
public:
    QNetwork(int input_size, int num_actions, std::vector<int> hidden = {32, 32});

    int input_size() const { return input_size_; }
    int num_actions() const { return num_actions_; }

    // Uniform fan-in/out scaled initialization.
    void init_weights(UniformSource& rng);

    std::vector<double> forward(std::span<const double> s) const;

    // Gradient of is_weight * huber(target - Q(s,a)) w.r.t. the parameters,
    // returned in ascent orientation: apply_update moves Q(s,a) toward the
    // target. Only the chosen action's output unit propagates error.
    ParamSet td_backward(std::span<const double> s, int a, double target,
                         double is_weight, double huber_threshold = 1.0) const;

    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }
    bool same_architecture(const QNetwork& o) const;

    // Checkpoint: text layout with an architecture header, hexfloat
    // parameters (layer-major, row-major within layer); round-trips bitwise.
    void save(const std::string& path) const;
    static QNetwork load(const std::string& path);

private:
    int input_size_, num_actions_;
    std::vector<Layer> layers_;
};

void copy_parameters(const QNetwork& src, QNetwork& dst);

// RMSprop-style adaptive update.
class RmsProp {
public:
    RmsProp(const QNetwork& net, double learning_rate = 1e-3, double decay = 0.9,
            double stabilizer = 1e-7);

    void apply(QNetwork& net, const ParamSet& grad);

    double learning_rate() const { return lr_; }
    const ParamSet& accumulator() const { return acc_; }

private:
    double lr_, decay_, stab_;
    ParamSet acc_;
};

double huber_loss(double delta, double threshold = 1.0);

}  // namespace hdqr
