#pragma once

#include "json.hpp"
#include "melab/dataset.hpp"

namespace melab::data {

nlohmann::json dist_to_json(const DistributionSpec& spec);
DistributionSpec dist_from_json(const nlohmann::json& j);

}  // namespace melab::data
