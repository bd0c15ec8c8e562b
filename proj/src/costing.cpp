#include "melab/costing.hpp"

#include "melab/errors.hpp"

namespace melab::costing {

Decimal total_cost(const PartyCost& pc) {
    if (pc.n < 0 || pc.per_label < Decimal{} || pc.collection < Decimal{})
        throw InputError("cost: negative field");
    return (pc.per_label + pc.collection) * pc.n;
}

BreakEven break_even_label_price(Decimal defender_cost, std::int64_t n_attacker,
                                 Decimal collection_attacker) {
    if (n_attacker <= 0) throw InputError("break-even: attacker sample count must be positive");
    const Decimal price = defender_cost / n_attacker - collection_attacker;
    if (price < Decimal{}) return {Decimal{}, false};
    return {price, true};
}

Verdict is_cost_effective(const PartyCost& defender, const PartyCost& attacker) {
    const Decimal cd = total_cost(defender);
    const Decimal ca = total_cost(attacker);
    return {ca < cd, cd - ca};
}

Decimal google_cloud_cifar10_quote() {
    return Decimal::from_int(35) * 50 + Decimal::from_int(25) * 10;
}

Decimal sagemaker_cifar10_quote() { return Decimal::parse("0.04") * 60000; }

}  // namespace melab::costing
