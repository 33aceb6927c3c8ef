#pragma once

// Random genome builders shared by the property tests and the acceptance
// suite.

#include <algorithm>
#include <utility>
#include <vector>

#include "flatneat/genome.hpp"
#include "flatneat/rng.hpp"

namespace flatneat::testgen {

struct GenomeSpec {
  int num_inputs = 3;
  int num_outputs = 1;
  int max_hidden = 8;
  double conn_prob = 0.5;
  double disabled_prob = 0.15;
};

struct RawGenome {
  std::vector<NodeRow> nodes;
  std::vector<ConnRow> conns;
  std::vector<int> input_keys;
  std::vector<int> output_keys;

  GenomeTensors pad(GenomeLimits limits) const {
    return pad_genome(nodes, conns, limits, input_keys, output_keys);
  }
};

// Random feedforward genome. Node keys get a random topological rank
// (inputs first, outputs last) and connections only point down-rank, so the
// enabled graph is acyclic by construction.
inline RawGenome random_acyclic_genome(RngStream& stream,
                                       const AttributeSchema& schema,
                                       const GenomeSpec& spec = {}) {
  RawGenome raw;
  const int hidden = spec.max_hidden > 0 ? stream.index(spec.max_hidden + 1) : 0;
  const int total = spec.num_inputs + spec.num_outputs + hidden;

  for (int i = 0; i < spec.num_inputs; ++i) raw.input_keys.push_back(i);
  for (int o = 0; o < spec.num_outputs; ++o)
    raw.output_keys.push_back(spec.num_inputs + o);

  // rank position -> key: inputs, then shuffled hidden, then outputs.
  std::vector<int> by_rank;
  for (int k : raw.input_keys) by_rank.push_back(k);
  std::vector<int> hidden_keys;
  for (int h = 0; h < hidden; ++h)
    hidden_keys.push_back(spec.num_inputs + spec.num_outputs + h);
  for (int i = int(hidden_keys.size()) - 1; i > 0; --i)
    std::swap(hidden_keys[std::size_t(i)],
              hidden_keys[std::size_t(stream.index(i + 1))]);
  for (int k : hidden_keys) by_rank.push_back(k);
  for (int k : raw.output_keys) by_rank.push_back(k);

  for (int k = 0; k < total; ++k) {
    NodeRow row;
    row[kNodeKey] = double(k);
    row[kNodeBias] = stream.normal(0.0, 1.0);
    row[kNodeResponse] = 1.0 + 0.1 * stream.normal(0.0, 1.0);
    row[kNodeAggregation] = double(stream.index(int(schema.aggregations.size())));
    row[kNodeActivation] = double(stream.index(int(schema.activations.size())));
    raw.nodes.push_back(row);
  }

  for (int a = 0; a < total; ++a) {
    for (int b = a + 1; b < total; ++b) {
      const int from = by_rank[std::size_t(a)];
      const int to = by_rank[std::size_t(b)];
      if (std::find(raw.input_keys.begin(), raw.input_keys.end(), to) !=
          raw.input_keys.end())
        continue;
      if (!stream.coin(spec.conn_prob)) continue;
      raw.conns.push_back(ConnRow{double(from), double(to),
                                  stream.coin(spec.disabled_prob) ? 0.0 : 1.0,
                                  stream.normal(0.0, 1.0)});
    }
  }
  return raw;
}

inline std::vector<double> random_inputs(RngStream& stream, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (auto& x : xs) x = stream.uniform(-2.0, 2.0);
  return xs;
}

}  // namespace flatneat::testgen
