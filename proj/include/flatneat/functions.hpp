#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "flatneat/errors.hpp"

namespace flatneat {

// Built-in node function implementations. Genomes store registry indices;
// the registry itself (an ordered list of names) lives in AttributeSchema.

using ActivationFn = double (*)(double);

inline double act_identity(double x) { return x; }
inline double act_tanh(double x) { return std::tanh(x); }
inline double act_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double act_relu(double x) { return x > 0.0 ? x : 0.0; }
inline double act_sin(double x) { return std::sin(x); }

inline ActivationFn find_activation(const std::string& name) {
  if (name == "identity") return &act_identity;
  if (name == "tanh") return &act_tanh;
  if (name == "sigmoid") return &act_sigmoid;
  if (name == "relu") return &act_relu;
  if (name == "sin") return &act_sin;
  raise(Errc::unknown_function, "activation '" + name + "' is not built in");
}

enum class AggregationKind { sum, product, max, mean };

inline AggregationKind find_aggregation(const std::string& name) {
  if (name == "sum") return AggregationKind::sum;
  if (name == "product") return AggregationKind::product;
  if (name == "max") return AggregationKind::max;
  if (name == "mean") return AggregationKind::mean;
  raise(Errc::unknown_function, "aggregation '" + name + "' is not built in");
}

// Value of an aggregation over zero inputs. max has no identity; forward
// falls back to 0.0 there so empty-fan-in nodes stay evaluable.
inline double aggregation_identity(AggregationKind kind) {
  switch (kind) {
    case AggregationKind::sum: return 0.0;
    case AggregationKind::product: return 1.0;
    case AggregationKind::max: return 0.0;
    case AggregationKind::mean: return 0.0;
  }
  return 0.0;
}

inline double aggregate(AggregationKind kind, std::span<const double> xs) {
  if (xs.empty()) {
    if (kind == AggregationKind::max)
      raise(Errc::empty_aggregation, "max over zero inputs");
    return aggregation_identity(kind);
  }
  switch (kind) {
    case AggregationKind::sum: {
      double acc = 0.0;
      for (double x : xs) acc += x;
      return acc;
    }
    case AggregationKind::product: {
      double acc = 1.0;
      for (double x : xs) acc *= x;
      return acc;
    }
    case AggregationKind::max: {
      double acc = xs[0];
      for (double x : xs.subspan(1)) acc = x > acc ? x : acc;
      return acc;
    }
    case AggregationKind::mean: {
      double acc = 0.0;
      for (double x : xs) acc += x;
      return acc / double(xs.size());
    }
  }
  return 0.0;
}

}  // namespace flatneat
