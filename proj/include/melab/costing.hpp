#pragma once

#include <cstdint>
#include <string>

#include "melab/decimal.hpp"

namespace melab::costing {

// One party's annotation economics: n samples, per-label price, per-sample
// collection cost.
struct PartyCost {
    std::int64_t n = 0;
    Decimal per_label;
    Decimal collection;
};

struct BreakEven {
    Decimal price;     // supremum per-label price that keeps the attack cheaper
    bool achievable;   // false when collection alone already exceeds the budget
};

struct Verdict {
    bool cost_effective;  // strict: attacker total < defender total
    Decimal margin;       // defender total - attacker total
};

// c = n * (pl + cc)
Decimal total_cost(const PartyCost& pc);

// Largest per-label price (on the decimal grid) at which
// n_a * (pl_a + cc_a) stays strictly below the defender budget.
BreakEven break_even_label_price(Decimal defender_cost, std::int64_t n_attacker,
                                 Decimal collection_attacker);

Verdict is_cost_effective(const PartyCost& defender, const PartyCost& attacker);

// Reference price points quoted per labeling service; the tier breakdown of
// the cloud quote is opaque (two tiers of per-1000-image pricing).
Decimal google_cloud_cifar10_quote();   // 35*50 + 10*25 = 2000
Decimal sagemaker_cifar10_quote();      // 0.04 * 60000 = 2400

}  // namespace melab::costing
