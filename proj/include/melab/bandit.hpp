#pragma once

#include <cstdint>
#include <vector>

#include "melab/attack.hpp"
#include "melab/mat.hpp"
#include "melab/rng.hpp"

namespace melab::attack {

// One-level adaptive query policy: a candidate OOD pool is clustered into
// arms, an epsilon-greedy bandit picks which arm to draw the next query from,
// and the reward of an answered query is 1 - (top1 - top2) of the response.
struct BanditState {
    Mat pool;                            // remaining candidate queries
    std::vector<int> arm_of;             // arm index per pool row
    std::vector<std::vector<std::size_t>> remaining;  // per-arm pool indices, consumed FIFO
    std::vector<double> mean_reward;
    std::vector<std::size_t> pulls;
    double epsilon = 0.1;

    std::size_t n_arms() const { return mean_reward.size(); }
    std::size_t remaining_total() const;
};

BanditState make_bandit(const Mat& pool, int n_arms, double epsilon, std::uint64_t seed);

// Picks `batch` pool rows (without replacement) by epsilon-greedy arm choice:
// explore an arm uniformly with probability epsilon, otherwise take the arm
// with the best running mean (lowest index on ties). Exhausted arms are
// skipped. Throws InputError when the pool is empty.
std::vector<std::size_t> adaptive_select(BanditState& state, std::size_t batch, Rng& rng);

// Incremental mean update for the arm that produced the query.
void update_reward(BanditState& state, std::size_t pool_index, double reward);

double response_reward(const model::ProbVector& probs);

}  // namespace melab::attack
