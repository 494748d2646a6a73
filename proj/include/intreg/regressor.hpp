#pragma once

#include <memory>
#include <span>

#include "json.hpp"

namespace intreg {

// Uniform contract satisfied by all seven models: train once, then predict a
// scalar from a raw (unnormalized) feature row. Trained regressors are
// immutable and safe for concurrent predict calls.
class Regressor {
public:
    virtual ~Regressor() = default;
    virtual double predict(std::span<const double> x) const = 0;
    virtual nlohmann::json hyperparams() const { return nlohmann::json::object(); }
};

class Dataset;

std::vector<double> predict_all(const Regressor& model, const Dataset& data);

}  // namespace intreg
