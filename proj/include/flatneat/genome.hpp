#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "flatneat/errors.hpp"
#include "flatneat/functions.hpp"

namespace flatneat {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Node rows are [key, bias, response, aggregation_id, activation_id];
// connection rows are [in_key, out_key, enabled, weight]. An empty row is
// all-NaN, and the key (or in_key) cell is the canonical emptiness test.
inline constexpr int kNodeAttrCount = 4;
inline constexpr int kConnAttrCount = 1;
inline constexpr int kNodeCols = 1 + kNodeAttrCount;
inline constexpr int kConnCols = 3 + kConnAttrCount;

// Offsets within a node row.
inline constexpr int kNodeKey = 0;
inline constexpr int kNodeBias = 1;
inline constexpr int kNodeResponse = 2;
inline constexpr int kNodeAggregation = 3;
inline constexpr int kNodeActivation = 4;

// Offsets within a connection row.
inline constexpr int kConnIn = 0;
inline constexpr int kConnOut = 1;
inline constexpr int kConnEnabled = 2;
inline constexpr int kConnWeight = 3;

// Named function registries plus attribute arity. Registry order is
// significant: rows store dense indices into these lists.
struct AttributeSchema {
  std::vector<std::string> activations{"tanh"};
  std::vector<std::string> aggregations{"sum"};
  int default_activation = 0;   // id given to newly created nodes
  int default_aggregation = 0;

  int node_attr_count() const { return kNodeAttrCount; }
  int conn_attr_count() const { return kConnAttrCount; }
  int node_cols() const { return kNodeCols; }
  int conn_cols() const { return kConnCols; }

  int activation_id(const std::string& name) const {
    for (std::size_t i = 0; i < activations.size(); ++i)
      if (activations[i] == name) return int(i);
    raise(Errc::unknown_function, "activation '" + name + "' not registered");
  }

  int aggregation_id(const std::string& name) const {
    for (std::size_t i = 0; i < aggregations.size(); ++i)
      if (aggregations[i] == name) return int(i);
    raise(Errc::unknown_function, "aggregation '" + name + "' not registered");
  }

  const std::string& activation_name(int id) const {
    if (id < 0 || id >= int(activations.size()))
      raise(Errc::unknown_function,
            "activation id " + std::to_string(id) + " out of range");
    return activations[std::size_t(id)];
  }

  const std::string& aggregation_name(int id) const {
    if (id < 0 || id >= int(aggregations.size()))
      raise(Errc::unknown_function,
            "aggregation id " + std::to_string(id) + " out of range");
    return aggregations[std::size_t(id)];
  }

  // Resolves every name against the built-ins so a bad registry fails at
  // construction time, not mid-run.
  void check() const {
    for (const auto& a : activations) find_activation(a);
    for (const auto& a : aggregations) find_aggregation(a);
  }
};

struct GenomeLimits {
  int max_nodes = 50;
  int max_conns = 100;

  friend bool operator==(const GenomeLimits&, const GenomeLimits&) = default;
};

// Readable forms used at the library boundary (tests, serialization, export).
struct NodeRecord {
  int key = 0;
  double bias = 0.0;
  double response = 1.0;
  std::string aggregation = "sum";
  std::string activation = "tanh";
};

struct ConnRecord {
  int in_key = 0;
  int out_key = 0;
  bool enabled = true;
  double weight = 0.0;
};

using NodeRow = std::array<double, kNodeCols>;
using ConnRow = std::array<double, kConnCols>;

inline NodeRow encode_node(const NodeRecord& rec, const AttributeSchema& schema) {
  return NodeRow{double(rec.key), rec.bias, rec.response,
                 double(schema.aggregation_id(rec.aggregation)),
                 double(schema.activation_id(rec.activation))};
}

inline ConnRow encode_conn(const ConnRecord& rec) {
  return ConnRow{double(rec.in_key), double(rec.out_key),
                 rec.enabled ? 1.0 : 0.0, rec.weight};
}

inline NodeRecord decode_node(std::span<const double> row,
                              const AttributeSchema& schema) {
  NodeRecord rec;
  rec.key = int(row[kNodeKey]);
  rec.bias = row[kNodeBias];
  rec.response = row[kNodeResponse];
  rec.aggregation = schema.aggregation_name(int(row[kNodeAggregation]));
  rec.activation = schema.activation_name(int(row[kNodeActivation]));
  return rec;
}

inline ConnRecord decode_conn(std::span<const double> row) {
  ConnRecord rec;
  rec.in_key = int(row[kConnIn]);
  rec.out_key = int(row[kConnOut]);
  rec.enabled = row[kConnEnabled] != 0.0;
  rec.weight = row[kConnWeight];
  return rec;
}

// One genome as two NaN-padded fixed-shape tensors. Valid rows need not be
// contiguous: removal blanks a row in place and insertion reuses the first
// blank row.
struct GenomeTensors {
  GenomeLimits limits;
  std::vector<double> nodes;  // limits.max_nodes x kNodeCols, row-major
  std::vector<double> conns;  // limits.max_conns x kConnCols, row-major
  std::vector<int> input_keys;
  std::vector<int> output_keys;

  GenomeTensors() = default;

  GenomeTensors(GenomeLimits lim, std::vector<int> inputs,
                std::vector<int> outputs)
      : limits(lim),
        nodes(std::size_t(lim.max_nodes) * kNodeCols, kNaN),
        conns(std::size_t(lim.max_conns) * kConnCols, kNaN),
        input_keys(std::move(inputs)),
        output_keys(std::move(outputs)) {}

  std::span<double> node_row(int r) {
    return {nodes.data() + std::size_t(r) * kNodeCols, kNodeCols};
  }
  std::span<const double> node_row(int r) const {
    return {nodes.data() + std::size_t(r) * kNodeCols, kNodeCols};
  }
  std::span<double> conn_row(int r) {
    return {conns.data() + std::size_t(r) * kConnCols, kConnCols};
  }
  std::span<const double> conn_row(int r) const {
    return {conns.data() + std::size_t(r) * kConnCols, kConnCols};
  }

  bool node_row_empty(int r) const { return std::isnan(node_row(r)[kNodeKey]); }
  bool conn_row_empty(int r) const { return std::isnan(conn_row(r)[kConnIn]); }

  int node_count() const {
    int n = 0;
    for (int r = 0; r < limits.max_nodes; ++r)
      if (!node_row_empty(r)) ++n;
    return n;
  }

  int conn_count() const {
    int n = 0;
    for (int r = 0; r < limits.max_conns; ++r)
      if (!conn_row_empty(r)) ++n;
    return n;
  }

  // Row index of a node key, or -1.
  int find_node(int key) const {
    for (int r = 0; r < limits.max_nodes; ++r)
      if (!node_row_empty(r) && int(node_row(r)[kNodeKey]) == key) return r;
    return -1;
  }

  // Row index of a connection (in, out) pair, or -1.
  int find_conn(int in_key, int out_key) const {
    for (int r = 0; r < limits.max_conns; ++r) {
      if (conn_row_empty(r)) continue;
      auto row = conn_row(r);
      if (int(row[kConnIn]) == in_key && int(row[kConnOut]) == out_key)
        return r;
    }
    return -1;
  }

  int first_empty_node_row() const {
    for (int r = 0; r < limits.max_nodes; ++r)
      if (node_row_empty(r)) return r;
    return -1;
  }

  int first_empty_conn_row() const {
    for (int r = 0; r < limits.max_conns; ++r)
      if (conn_row_empty(r)) return r;
    return -1;
  }

  bool is_input(int key) const {
    return std::find(input_keys.begin(), input_keys.end(), key) !=
           input_keys.end();
  }
  bool is_output(int key) const {
    return std::find(output_keys.begin(), output_keys.end(), key) !=
           output_keys.end();
  }

  friend bool operator==(const GenomeTensors& a, const GenomeTensors& b) {
    auto bitwise_equal = [](const std::vector<double>& x,
                            const std::vector<double>& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const bool nx = std::isnan(x[i]), ny = std::isnan(y[i]);
        if (nx != ny) return false;
        if (!nx && x[i] != y[i]) return false;
      }
      return true;
    };
    return a.limits == b.limits && a.input_keys == b.input_keys &&
           a.output_keys == b.output_keys && bitwise_equal(a.nodes, b.nodes) &&
           bitwise_equal(a.conns, b.conns);
  }
};

namespace detail {

inline bool row_fully_nan(std::span<const double> row) {
  for (double v : row)
    if (!std::isnan(v)) return false;
  return true;
}

inline bool row_fully_finite(std::span<const double> row) {
  for (double v : row)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace detail

// Builds a padded genome from explicit row lists. Rows land in prefix
// positions; the remainder stays NaN.
inline GenomeTensors pad_genome(std::span<const NodeRow> nodes,
                                std::span<const ConnRow> conns,
                                GenomeLimits limits, std::vector<int> input_keys,
                                std::vector<int> output_keys) {
  if (int(nodes.size()) > limits.max_nodes)
    raise(Errc::genome_full, std::to_string(nodes.size()) + " nodes exceed max_nodes=" +
                                 std::to_string(limits.max_nodes));
  if (int(conns.size()) > limits.max_conns)
    raise(Errc::genome_full, std::to_string(conns.size()) + " conns exceed max_conns=" +
                                 std::to_string(limits.max_conns));
  GenomeTensors g(limits, std::move(input_keys), std::move(output_keys));
  for (std::size_t i = 0; i < nodes.size(); ++i)
    std::copy(nodes[i].begin(), nodes[i].end(), g.node_row(int(i)).begin());
  for (std::size_t i = 0; i < conns.size(); ++i)
    std::copy(conns[i].begin(), conns[i].end(), g.conn_row(int(i)).begin());
  return g;
}

struct DecodedGenome {
  std::vector<NodeRecord> nodes;
  std::vector<ConnRecord> conns;
};

// Non-empty rows only, in row order. Partially-NaN rows are corruption.
inline DecodedGenome decode_genome(const GenomeTensors& g,
                                   const AttributeSchema& schema) {
  DecodedGenome out;
  for (int r = 0; r < g.limits.max_nodes; ++r) {
    auto row = g.node_row(r);
    if (detail::row_fully_nan(row)) continue;
    if (!detail::row_fully_finite(row))
      raise(Errc::corrupt_row, "node row " + std::to_string(r) +
                                   " is partially NaN");
    out.nodes.push_back(decode_node(row, schema));
  }
  for (int r = 0; r < g.limits.max_conns; ++r) {
    auto row = g.conn_row(r);
    if (detail::row_fully_nan(row)) continue;
    if (!detail::row_fully_finite(row))
      raise(Errc::corrupt_row, "conn row " + std::to_string(r) +
                                   " is partially NaN");
    out.conns.push_back(decode_conn(row));
  }
  return out;
}

// The whole population as two stacked tensors.
struct PopulationTensors {
  int pop_size = 0;
  GenomeLimits limits;
  std::vector<double> pop_nodes;  // pop_size x max_nodes x kNodeCols
  std::vector<double> pop_conns;  // pop_size x max_conns x kConnCols
  std::vector<int> input_keys;
  std::vector<int> output_keys;

  GenomeTensors slice(int i) const {
    GenomeTensors g(limits, input_keys, output_keys);
    const std::size_t ns = std::size_t(limits.max_nodes) * kNodeCols;
    const std::size_t cs = std::size_t(limits.max_conns) * kConnCols;
    std::copy_n(pop_nodes.begin() + std::size_t(i) * ns, ns, g.nodes.begin());
    std::copy_n(pop_conns.begin() + std::size_t(i) * cs, cs, g.conns.begin());
    return g;
  }

  void set_slice(int i, const GenomeTensors& g) {
    const std::size_t ns = std::size_t(limits.max_nodes) * kNodeCols;
    const std::size_t cs = std::size_t(limits.max_conns) * kConnCols;
    std::copy_n(g.nodes.begin(), ns, pop_nodes.begin() + std::size_t(i) * ns);
    std::copy_n(g.conns.begin(), cs, pop_conns.begin() + std::size_t(i) * cs);
  }
};

inline PopulationTensors concat_population(std::span<const GenomeTensors> genomes) {
  PopulationTensors pop;
  pop.pop_size = int(genomes.size());
  if (genomes.empty()) return pop;
  pop.limits = genomes[0].limits;
  pop.input_keys = genomes[0].input_keys;
  pop.output_keys = genomes[0].output_keys;
  const std::size_t ns = std::size_t(pop.limits.max_nodes) * kNodeCols;
  const std::size_t cs = std::size_t(pop.limits.max_conns) * kConnCols;
  pop.pop_nodes.resize(ns * genomes.size());
  pop.pop_conns.resize(cs * genomes.size());
  for (std::size_t i = 0; i < genomes.size(); ++i) {
    if (!(genomes[i].limits == pop.limits))
      raise(Errc::shape_mismatch,
            "genome " + std::to_string(i) + " has different limits");
    std::copy_n(genomes[i].nodes.begin(), ns, pop.pop_nodes.begin() + i * ns);
    std::copy_n(genomes[i].conns.begin(), cs, pop.pop_conns.begin() + i * cs);
  }
  return pop;
}

// Structural soundness check: all-or-nothing rows, integral key/flag/id
// cells, unique keys, valid references, required inputs/outputs present.
// Returns an explanation for invalid genomes; empty string means valid.
inline std::string explain_invalid(const GenomeTensors& g,
                                   const AttributeSchema& schema) {
  std::vector<int> keys;
  for (int r = 0; r < g.limits.max_nodes; ++r) {
    auto row = g.node_row(r);
    if (detail::row_fully_nan(row)) continue;
    if (!detail::row_fully_finite(row))
      return "node row " + std::to_string(r) + " partially NaN";
    const double key = row[kNodeKey];
    if (key < 0 || key != std::floor(key))
      return "node row " + std::to_string(r) + " has non-integral key";
    const int agg = int(row[kNodeAggregation]);
    const int act = int(row[kNodeActivation]);
    if (row[kNodeAggregation] != std::floor(row[kNodeAggregation]) || agg < 0 ||
        agg >= int(schema.aggregations.size()))
      return "node row " + std::to_string(r) + " has bad aggregation id";
    if (row[kNodeActivation] != std::floor(row[kNodeActivation]) || act < 0 ||
        act >= int(schema.activations.size()))
      return "node row " + std::to_string(r) + " has bad activation id";
    keys.push_back(int(key));
  }
  std::vector<int> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    return "duplicate node key";
  for (int k : g.input_keys)
    if (!std::binary_search(sorted.begin(), sorted.end(), k))
      return "input key " + std::to_string(k) + " missing";
  for (int k : g.output_keys)
    if (!std::binary_search(sorted.begin(), sorted.end(), k))
      return "output key " + std::to_string(k) + " missing";
  std::vector<std::pair<int, int>> pairs;
  for (int r = 0; r < g.limits.max_conns; ++r) {
    auto row = g.conn_row(r);
    if (detail::row_fully_nan(row)) continue;
    if (!detail::row_fully_finite(row))
      return "conn row " + std::to_string(r) + " partially NaN";
    const double e = row[kConnEnabled];
    if (e != 0.0 && e != 1.0)
      return "conn row " + std::to_string(r) + " has non-boolean enabled flag";
    const int in = int(row[kConnIn]), out = int(row[kConnOut]);
    if (row[kConnIn] != std::floor(row[kConnIn]) ||
        row[kConnOut] != std::floor(row[kConnOut]) || in < 0 || out < 0)
      return "conn row " + std::to_string(r) + " has non-integral endpoint";
    if (!std::binary_search(sorted.begin(), sorted.end(), in) ||
        !std::binary_search(sorted.begin(), sorted.end(), out))
      return "conn row " + std::to_string(r) + " references a missing node";
    pairs.emplace_back(in, out);
  }
  std::sort(pairs.begin(), pairs.end());
  if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end())
    return "duplicate connection pair";
  return {};
}

inline bool genome_valid(const GenomeTensors& g, const AttributeSchema& schema) {
  return explain_invalid(g, schema).empty();
}

}  // namespace flatneat
