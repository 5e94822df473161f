#pragma once

#include <span>

#include "metagym/safetensors.hpp"

namespace metagym {

struct MergeWeights {
    double lambda_d = 1.0;
    double lambda_i = 0.2;
    double lambda_a = 0.1;
};

// Element-wise weighted sum of N parameter maps (the three-specialist case
// is the one that matters; N is free). All maps must share the first map's
// key set and per-key shapes. Accumulation is in double, in input order,
// stored back as float; the output preserves the first map's key order.
ParameterMap merge_parameters(std::span<const ParameterMap* const> maps,
                              std::span<const double> weights);

ParameterMap merge_parameters(const ParameterMap& deduction, const ParameterMap& induction,
                              const ParameterMap& abduction, const MergeWeights& w);

} // namespace metagym
