#include "hdqr/tabular.hpp"

#include <cmath>
#include <stdexcept>

namespace hdqr {

double TabularQ::max_value(int s) const { return value(s, argmax(s)); }

int TabularQ::argmax(int s) const {
    int best = 0;
    double best_v = value(s, 0);
    for (int a = 1; a < num_actions; ++a) {
        double v = value(s, a);
        if (v > best_v) {
            best_v = v;
            best = a;
        }
    }
    return best;
}

void tabular_q_update(TabularQ& tab, int s, int a, double r, int s_next) {
    if (!std::isfinite(r)) throw std::invalid_argument("non-finite reward");
    double bootstrap = s_next < 0 ? 0.0 : tab.max_value(s_next);
    double& q = tab.q[{s, a}];
    q += tab.learning_rate * (r + tab.gamma * bootstrap - q);
}

void tabular_double_q_update(DoubleTabularQ& tab, int s, int a, double r, int s_next,
                             UniformSource& rng) {
    if (!std::isfinite(r)) throw std::invalid_argument("non-finite reward");
    TabularQ& upd = rng.next() < 0.5 ? tab.q1 : tab.q2;
    TabularQ& eval = (&upd == &tab.q1) ? tab.q2 : tab.q1;
    double bootstrap = s_next < 0 ? 0.0 : eval.value(s_next, upd.argmax(s_next));
    double& q = upd.q[{s, a}];
    q += upd.learning_rate * (r + upd.gamma * bootstrap - q);
}

}  // namespace hdqr
