#include "melab/bandit.hpp"

#include <algorithm>

#include "melab/errors.hpp"
#include "melab/kmeans.hpp"

namespace melab::attack {

std::size_t BanditState::remaining_total() const {
    std::size_t total = 0;
    for (const auto& arm : remaining) total += arm.size();
    return total;
}

BanditState make_bandit(const Mat& pool, int n_arms, double epsilon, std::uint64_t seed) {
    if (pool.rows == 0) throw InputError("bandit: empty candidate pool");
    if (n_arms < 1) throw ConfigError("bandit: need at least one arm");
    if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("bandit: epsilon must be in [0,1]");

    BanditState s;
    s.pool = pool;
    s.epsilon = epsilon;
    const auto km = instrument::kmeans(pool, n_arms, seed);
    s.arm_of = km.assignment;
    s.remaining.resize(static_cast<std::size_t>(n_arms));
    for (std::size_t i = 0; i < pool.rows; ++i)
        s.remaining[static_cast<std::size_t>(km.assignment[i])].push_back(i);
    s.mean_reward.assign(static_cast<std::size_t>(n_arms), 0.0);
    s.pulls.assign(static_cast<std::size_t>(n_arms), 0);
    return s;
}

namespace {
std::size_t pick_arm(const BanditState& s, Rng& rng) {
    const bool explore = rng.uniform() < s.epsilon;
    if (explore) {
        // Uniform over arms that still have candidates.
        std::vector<std::size_t> open;
        for (std::size_t a = 0; a < s.n_arms(); ++a)
            if (!s.remaining[a].empty()) open.push_back(a);
        return open[rng.index(open.size())];
    }
    std::size_t best = s.n_arms();
    for (std::size_t a = 0; a < s.n_arms(); ++a) {
        if (s.remaining[a].empty()) continue;
        if (best == s.n_arms() || s.mean_reward[a] > s.mean_reward[best]) best = a;
    }
    return best;
}
}  // namespace

std::vector<std::size_t> adaptive_select(BanditState& state, std::size_t batch, Rng& rng) {
    if (state.remaining_total() == 0) throw InputError("bandit: candidate pool exhausted");
    std::vector<std::size_t> out;
    out.reserve(batch);
    for (std::size_t k = 0; k < batch && state.remaining_total() > 0; ++k) {
        const std::size_t arm = pick_arm(state, rng);
        auto& members = state.remaining[arm];
        const std::size_t pos = rng.index(members.size());
        const std::size_t slot = members[pos];
        members[pos] = members.back();
        members.pop_back();
        out.push_back(slot);
    }
    return out;
}

void update_reward(BanditState& state, std::size_t pool_index, double reward) {
    const auto arm = static_cast<std::size_t>(state.arm_of[pool_index]);
    state.pulls[arm] += 1;
    state.mean_reward[arm] +=
        (reward - state.mean_reward[arm]) / static_cast<double>(state.pulls[arm]);
}

double response_reward(const model::ProbVector& probs) {
    double top1 = 0.0, top2 = 0.0;
    for (double p : probs) {
        if (p > top1) {
            top2 = top1;
            top1 = p;
        } else if (p > top2) {
            top2 = p;
        }
    }
    return 1.0 - (top1 - top2);
}

}  // namespace melab::attack
