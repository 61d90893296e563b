#pragma once

#include <map>
#include <utility>

#include "hdqr/common.hpp"

namespace hdqr {

// Tabular Q-learning, used as a reference oracle for the deep variants.
// States and actions are small integers; a negative next state is terminal.
struct TabularQ {
    int num_actions = 1;
    double learning_rate = 0.1;
    double gamma = 0.9;
    std::map<std::pair<int, int>, double> q;

    double value(int s, int a) const {
        auto it = q.find({s, a});
        return it == q.end() ? 0.0 : it->second;
    }
    double max_value(int s) const;
    int argmax(int s) const;  // ties break to the lowest action
};

void tabular_q_update(TabularQ& tab, int s, int a, double r, int s_next);

struct DoubleTabularQ {
    TabularQ q1, q2;
};

// Double update: a fair coin picks which table to update; the updated
// table supplies the argmax, the other one evaluates it.
void tabular_double_q_update(DoubleTabularQ& tab, int s, int a, double r, int s_next,
                             UniformSource& rng);

}  // namespace hdqr
