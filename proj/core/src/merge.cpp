#include "metagym/merge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace metagym {

ParameterMap merge_parameters(std::span<const ParameterMap* const> maps,
                              std::span<const double> weights) {
    if (maps.empty()) throw std::invalid_argument("need at least one parameter map");
    if (maps.size() != weights.size())
        throw std::invalid_argument("one weight per parameter map required");
    for (double w : weights)
        if (!std::isfinite(w)) throw std::invalid_argument("weights must be finite");

    const ParameterMap& first = *maps[0];
    for (std::size_t m = 1; m < maps.size(); ++m) {
        const ParameterMap& other = *maps[m];
        std::vector<std::string> missing, extra;
        for (const std::string& name : first.names())
            if (!other.find(name)) missing.push_back(name);
        for (const std::string& name : other.names())
            if (!first.find(name)) extra.push_back(name);
        if (!missing.empty() || !extra.empty()) {
            std::ostringstream msg;
            msg << "key-set mismatch in map " << m << ":";
            for (const auto& n : missing) msg << " missing '" << n << "'";
            for (const auto& n : extra) msg << " extra '" << n << "'";
            throw std::invalid_argument(msg.str());
        }
        for (const std::string& name : first.names())
            if (first.find(name)->shape != other.find(name)->shape)
                throw std::invalid_argument("shape mismatch for key '" + name +
                                            "' in map " + std::to_string(m));
    }

    ParameterMap out;
    for (const std::string& name : first.names()) {
        const TensorData* base = first.find(name);
        TensorData merged;
        merged.shape = base->shape;
        merged.data.resize(base->data.size());
        for (std::size_t k = 0; k < merged.data.size(); ++k) {
            double acc = 0.0; // 64-bit accumulation, fixed input order
            for (std::size_t m = 0; m < maps.size(); ++m)
                acc += weights[m] * static_cast<double>(maps[m]->find(name)->data[k]);
            merged.data[k] = static_cast<float>(acc);
        }
        out.add(name, std::move(merged));
    }
    return out;
}

ParameterMap merge_parameters(const ParameterMap& deduction, const ParameterMap& induction,
                              const ParameterMap& abduction, const MergeWeights& w) {
    const ParameterMap* maps[] = {&deduction, &induction, &abduction};
    const double weights[] = {w.lambda_d, w.lambda_i, w.lambda_a};
    return merge_parameters(maps, weights);
}

} // namespace metagym
