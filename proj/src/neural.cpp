#include "hdqr/neural.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hdqr {

void ParamSet::zero() {
    for (auto& l : layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
}

void ParamSet::add(const ParamSet& other) {
    if (layers.size() != other.layers.size())
        throw std::invalid_argument("ParamSet shape mismatch");
    for (size_t i = 0; i < layers.size(); ++i) {
        auto& a = layers[i];
        const auto& b = other.layers[i];
        if (a.w.size() != b.w.size() || a.b.size() != b.b.size())
            throw std::invalid_argument("ParamSet shape mismatch");
        for (size_t j = 0; j < a.w.size(); ++j) a.w[j] += b.w[j];
        for (size_t j = 0; j < a.b.size(); ++j) a.b[j] += b.b[j];
    }
}

bool ParamSet::finite() const {
    for (const auto& l : layers) {
        for (double v : l.w)
            if (!std::isfinite(v)) return false;
        for (double v : l.b)
            if (!std::isfinite(v)) return false;
    }
    return true;
}

QNetwork::QNetwork(int input_size, int num_actions, std::vector<int> hidden)
    : input_size_(input_size), num_actions_(num_actions) {
    if (input_size < 1 || num_actions < 1)
        throw std::invalid_argument("QNetwork: bad dimensions");
    int prev = input_size;
    for (int h : hidden) {
        layers_.emplace_back(prev, h);
        prev = h;
    }
    layers_.emplace_back(prev, num_actions);
}

void QNetwork::init_weights(UniformSource& rng) {
    for (auto& l : layers_) {
        double limit = std::sqrt(6.0 / (l.in + l.out));
        for (auto& v : l.w) v = (rng.next() * 2.0 - 1.0) * limit;
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
}

std::vector<double> QNetwork::forward(std::span<const double> s) const {
    if (static_cast<int>(s.size()) != input_size_)
        throw std::invalid_argument("forward: input dimension mismatch");
    std::vector<double> act(s.begin(), s.end());
    for (size_t li = 0; li < layers_.size(); ++li) {
        const Layer& l = layers_[li];
        std::vector<double> next(l.out);
        for (int o = 0; o < l.out; ++o) {
            double z = l.b[o];
            const double* wrow = &l.w[static_cast<size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) z += wrow[i] * act[i];
            next[o] = (li + 1 < layers_.size() && z < 0) ? 0.0 : z;  // ReLU on hidden
        }
        act = std::move(next);
    }
    return act;
}

ParamSet QNetwork::td_backward(std::span<const double> s, int a, double target,
                               double is_weight, double huber_threshold) const {
    if (static_cast<int>(s.size()) != input_size_)
        throw std::invalid_argument("td_backward: input dimension mismatch");
    if (a < 0 || a >= num_actions_)
        throw std::invalid_argument("td_backward: action index out of range");
    if (!std::isfinite(target) || !std::isfinite(is_weight))
        throw std::invalid_argument("td_backward: non-finite target or weight");

    // Forward with cached pre-activations.
    std::vector<std::vector<double>> acts;  // acts[0] = input
    acts.emplace_back(s.begin(), s.end());
    std::vector<std::vector<double>> zs;
    for (size_t li = 0; li < layers_.size(); ++li) {
        const Layer& l = layers_[li];
        std::vector<double> z(l.out);
        for (int o = 0; o < l.out; ++o) {
            double v = l.b[o];
            const double* wrow = &l.w[static_cast<size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) v += wrow[i] * acts.back()[i];
            z[o] = v;
        }
        zs.push_back(z);
        std::vector<double> act(l.out);
        for (int o = 0; o < l.out; ++o)
            act[o] = (li + 1 < layers_.size() && z[o] < 0) ? 0.0 : z[o];
        acts.push_back(std::move(act));
    }

    double q = acts.back()[a];
    double delta = target - q;
    double clipped = delta;
    if (clipped > huber_threshold) clipped = huber_threshold;
    if (clipped < -huber_threshold) clipped = -huber_threshold;
    double upstream = is_weight * clipped;

    ParamSet grad;
    for (const auto& l : layers_) grad.layers.emplace_back(l.in, l.out);

    // Output-layer error: only unit a carries signal.
    std::vector<double> err(layers_.back().out, 0.0);
    err[a] = upstream;

    for (int li = static_cast<int>(layers_.size()) - 1; li >= 0; --li) {
        const Layer& l = layers_[li];
        Layer& g = grad.layers[li];
        const auto& input = acts[li];
        for (int o = 0; o < l.out; ++o) {
            if (err[o] == 0.0) continue;
            g.b[o] = err[o];
            double* grow = &g.w[static_cast<size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) grow[i] = err[o] * input[i];
        }
        if (li > 0) {
            std::vector<double> prev_err(l.in, 0.0);
            for (int o = 0; o < l.out; ++o) {
                if (err[o] == 0.0) continue;
                const double* wrow = &l.w[static_cast<size_t>(o) * l.in];
                for (int i = 0; i < l.in; ++i) prev_err[i] += err[o] * wrow[i];
            }
            // ReLU gate of the layer below
            for (int i = 0; i < l.in; ++i)
                if (zs[li - 1][i] < 0) prev_err[i] = 0.0;
            err = std::move(prev_err);
        }
    }
    return grad;
}

bool QNetwork::same_architecture(const QNetwork& o) const {
    if (layers_.size() != o.layers_.size()) return false;
    for (size_t i = 0; i < layers_.size(); ++i)
        if (layers_[i].in != o.layers_[i].in || layers_[i].out != o.layers_[i].out)
            return false;
    return true;
}

void copy_parameters(const QNetwork& src, QNetwork& dst) {
    if (!src.same_architecture(dst))
        throw std::invalid_argument("copy_parameters: architecture mismatch");
    for (size_t i = 0; i < src.layers().size(); ++i) {
        dst.layers()[i].w = src.layers()[i].w;
        dst.layers()[i].b = src.layers()[i].b;
    }
}

void QNetwork::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open checkpoint file " + path);
    out << "qnetwork 1\n" << input_size_ << ' ' << num_actions_ << ' ' << layers_.size() << '\n';
    for (const auto& l : layers_) out << l.in << ' ' << l.out << '\n';
    out << std::hexfloat;
    for (const auto& l : layers_) {
        for (double v : l.w) out << v << '\n';
        for (double v : l.b) out << v << '\n';
    }
}

QNetwork QNetwork::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint file " + path);
    std::string magic;
    int version, input, actions;
    size_t nlayers;
    in >> magic >> version >> input >> actions >> nlayers;
    if (magic != "qnetwork" || version != 1)
        throw std::runtime_error("bad checkpoint header in " + path);
    std::vector<int> hidden;
    std::vector<std::pair<int, int>> shapes(nlayers);
    for (auto& [i, o] : shapes) in >> i >> o;
    for (size_t i = 0; i + 1 < nlayers; ++i) hidden.push_back(shapes[i].second);
    QNetwork net(input, actions, hidden);
    auto read_double = [&in, &path]() {
        std::string tok;
        if (!(in >> tok)) throw std::runtime_error("truncated checkpoint " + path);
        return std::strtod(tok.c_str(), nullptr);
    };
    for (auto& l : net.layers_) {
        for (auto& v : l.w) v = read_double();
        for (auto& v : l.b) v = read_double();
    }
    return net;
}

RmsProp::RmsProp(const QNetwork& net, double learning_rate, double decay, double stabilizer)
    : lr_(learning_rate), decay_(decay), stab_(stabilizer) {
    for (const auto& l : net.layers()) acc_.layers.emplace_back(l.in, l.out);
}

void RmsProp::apply(QNetwork& net, const ParamSet& grad) {
    if (!grad.finite()) throw std::invalid_argument("apply_update: non-finite gradient");
    if (grad.layers.size() != acc_.layers.size())
        throw std::invalid_argument("apply_update: shape mismatch");
    for (size_t li = 0; li < grad.layers.size(); ++li) {
        Layer& p = net.layers()[li];
        Layer& a = acc_.layers[li];
        const Layer& g = grad.layers[li];
        for (size_t j = 0; j < g.w.size(); ++j) {
            a.w[j] = decay_ * a.w[j] + (1.0 - decay_) * g.w[j] * g.w[j];
            p.w[j] += lr_ * g.w[j] / std::sqrt(a.w[j] + stab_);
        }
        for (size_t j = 0; j < g.b.size(); ++j) {
            a.b[j] = decay_ * a.b[j] + (1.0 - decay_) * g.b[j] * g.b[j];
            p.b[j] += lr_ * g.b[j] / std::sqrt(a.b[j] + stab_);
        }
    }
}

double huber_loss(double delta, double threshold) {
    double ad = std::abs(delta);
    if (ad <= threshold) return 0.5 * delta * delta;
    return threshold * (ad - 0.5 * threshold);
}

}  // namespace hdqr
