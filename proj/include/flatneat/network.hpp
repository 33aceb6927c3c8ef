#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flatneat/functions.hpp"
#include "flatneat/genome.hpp"
#include "flatneat/parallel.hpp"

namespace flatneat {

inline double apply_activation(const AttributeSchema& schema, int id, double x) {
  return find_activation(schema.activation_name(id))(x);
}

inline double apply_aggregation(const AttributeSchema& schema, int id,
                                std::span<const double> xs) {
  return aggregate(find_aggregation(schema.aggregation_name(id)), xs);
}

// Inference-ready form of one genome: a topological row order plus the
// expanded node x node connection tensor. Cells of `expanded` are finite
// exactly where an enabled connection exists; disabled and absent
// connections stay NaN. The per-row resolved attributes (`row_*`) are a
// lookup-free mirror of the node tensor for the forward pass.
struct TransformedNetwork {
  GenomeLimits limits;
  std::vector<double> nodes;            // copy of the node tensor
  std::vector<std::int32_t> order;      // max_nodes entries, -1 padded tail
  int order_count = 0;
  std::vector<double> expanded;         // max_nodes x max_nodes x conn attrs

  std::vector<int> input_rows;          // in input_keys order
  std::vector<int> output_rows;         // in output_keys order
  std::vector<std::pair<int, int>> key_to_row;  // sorted by key

  // Resolved per-row node attributes (valid where the row is non-empty).
  std::vector<double> row_bias;
  std::vector<double> row_response;
  std::vector<ActivationFn> row_act;
  std::vector<AggregationKind> row_agg;
  std::vector<bool> row_is_input;

  // Incoming edges per row as (source row, weight), ascending source row —
  // the same accumulation order as a scan over the expanded tensor.
  std::vector<std::vector<std::pair<int, double>>> incoming;

  double expanded_cell(int src_row, int dst_row) const {
    return expanded[(std::size_t(src_row) * std::size_t(limits.max_nodes) +
                     std::size_t(dst_row)) *
                    std::size_t(kConnAttrCount)];
  }

  int row_of_key(int key) const {
    auto it = std::lower_bound(
        key_to_row.begin(), key_to_row.end(), key,
        [](const std::pair<int, int>& p, int k) { return p.first < k; });
    if (it == key_to_row.end() || it->first != key) return -1;
    return it->second;
  }

  int num_inputs() const { return int(input_rows.size()); }
  int num_outputs() const { return int(output_rows.size()); }
};

namespace detail {

// Walks successors among the unprocessed nodes until one repeats, and
// returns that loop as node keys for the error message.
inline std::string describe_cycle(const GenomeTensors& g,
                                  const std::vector<bool>& emitted,
                                  const std::vector<int>& row_key) {
  int start = -1;
  for (int r = 0; r < g.limits.max_nodes; ++r)
    if (!g.node_row_empty(r) && !emitted[std::size_t(r)] &&
        (start < 0 || row_key[std::size_t(r)] < row_key[std::size_t(start)]))
      start = r;
  if (start < 0) return "unlocatable cycle";

  std::vector<int> path;
  std::vector<int> pos_in_path(std::size_t(g.limits.max_nodes), -1);
  int at = start;
  for (;;) {
    if (pos_in_path[std::size_t(at)] >= 0) {
      std::string out;
      for (std::size_t i = std::size_t(pos_in_path[std::size_t(at)]);
           i < path.size(); ++i)
        out += std::to_string(row_key[std::size_t(path[i])]) + "->";
      out += std::to_string(row_key[std::size_t(at)]);
      return out;
    }
    pos_in_path[std::size_t(at)] = int(path.size());
    path.push_back(at);
    int next = -1;
    for (int r = 0; r < g.limits.max_conns; ++r) {
      if (g.conn_row_empty(r)) continue;
      auto row = g.conn_row(r);
      if (row[kConnEnabled] != 1.0) continue;
      if (int(row[kConnIn]) != row_key[std::size_t(at)]) continue;
      // Follow only unemitted targets; emitted ones cannot be on a cycle.
      for (int rr = 0; rr < g.limits.max_nodes; ++rr) {
        if (g.node_row_empty(rr) || emitted[std::size_t(rr)]) continue;
        if (row_key[std::size_t(rr)] == int(row[kConnOut])) {
          if (next < 0 || row_key[std::size_t(rr)] < row_key[std::size_t(next)])
            next = rr;
        }
      }
    }
    if (next < 0) return "unlocatable cycle";
    at = next;
  }
}

}  // namespace detail

// Stage one of inference. Deterministic: the topological order uses Kahn's
// algorithm with an ascending-key tie break, so equal genomes always
// transform identically.
inline TransformedNetwork transform(const GenomeTensors& g,
                                    const AttributeSchema& schema) {
  const int mn = g.limits.max_nodes;
  TransformedNetwork t;
  t.limits = g.limits;
  t.nodes = g.nodes;
  t.order.assign(std::size_t(mn), -1);
  t.expanded.assign(std::size_t(mn) * std::size_t(mn) * kConnAttrCount, kNaN);
  t.row_bias.assign(std::size_t(mn), 0.0);
  t.row_response.assign(std::size_t(mn), 1.0);
  t.row_act.assign(std::size_t(mn), &act_identity);
  t.row_agg.assign(std::size_t(mn), AggregationKind::sum);
  t.row_is_input.assign(std::size_t(mn), false);
  t.incoming.resize(std::size_t(mn));

  std::vector<int> row_key(std::size_t(mn), -1);
  int populated = 0;
  for (int r = 0; r < mn; ++r) {
    if (g.node_row_empty(r)) continue;
    auto row = g.node_row(r);
    const int key = int(row[kNodeKey]);
    row_key[std::size_t(r)] = key;
    t.key_to_row.emplace_back(key, r);
    t.row_bias[std::size_t(r)] = row[kNodeBias];
    t.row_response[std::size_t(r)] = row[kNodeResponse];
    t.row_act[std::size_t(r)] =
        find_activation(schema.activation_name(int(row[kNodeActivation])));
    t.row_agg[std::size_t(r)] =
        find_aggregation(schema.aggregation_name(int(row[kNodeAggregation])));
    ++populated;
  }
  std::sort(t.key_to_row.begin(), t.key_to_row.end());

  for (int key : g.input_keys) {
    const int r = t.row_of_key(key);
    if (r < 0) raise(Errc::dangling_endpoint, "input key " + std::to_string(key));
    t.input_rows.push_back(r);
    t.row_is_input[std::size_t(r)] = true;
  }
  for (int key : g.output_keys) {
    const int r = t.row_of_key(key);
    if (r < 0) raise(Errc::dangling_endpoint, "output key " + std::to_string(key));
    t.output_rows.push_back(r);
  }

  // Expanded connections: enabled rows deposit their attributes at
  // (source row, target row); disabled rows leave the cell NaN.
  std::vector<int> in_degree(std::size_t(mn), 0);
  for (int r = 0; r < g.limits.max_conns; ++r) {
    if (g.conn_row_empty(r)) continue;
    auto row = g.conn_row(r);
    const int src = t.row_of_key(int(row[kConnIn]));
    const int dst = t.row_of_key(int(row[kConnOut]));
    if (src < 0 || dst < 0)
      raise(Errc::dangling_endpoint,
            "conn (" + std::to_string(int(row[kConnIn])) + ", " +
                std::to_string(int(row[kConnOut])) + ")");
    if (row[kConnEnabled] != 1.0) continue;
    t.expanded[(std::size_t(src) * std::size_t(mn) + std::size_t(dst)) *
               kConnAttrCount] = row[kConnWeight];
    ++in_degree[std::size_t(dst)];
  }
  for (int dst = 0; dst < mn; ++dst) {
    auto& in = t.incoming[std::size_t(dst)];
    for (int src = 0; src < mn; ++src) {
      const double w = t.expanded_cell(src, dst);
      if (!std::isnan(w)) in.emplace_back(src, w);
    }
  }

  // Kahn's algorithm over rows, popping the smallest key first.
  std::vector<std::pair<int, int>> ready;  // (key, row), kept sorted desc
  for (int r = 0; r < mn; ++r)
    if (row_key[std::size_t(r)] >= 0 && in_degree[std::size_t(r)] == 0)
      ready.emplace_back(row_key[std::size_t(r)], r);
  std::sort(ready.rbegin(), ready.rend());

  std::vector<bool> emitted(std::size_t(mn), false);
  while (!ready.empty()) {
    const auto [key, r] = ready.back();
    ready.pop_back();
    t.order[std::size_t(t.order_count++)] = std::int32_t(r);
    emitted[std::size_t(r)] = true;
    for (int dst = 0; dst < mn; ++dst) {
      if (std::isnan(t.expanded_cell(r, dst))) continue;
      if (--in_degree[std::size_t(dst)] == 0) {
        const auto entry = std::make_pair(row_key[std::size_t(dst)], dst);
        ready.insert(std::upper_bound(ready.begin(), ready.end(), entry,
                                      std::greater<>()),
                     entry);
      }
    }
  }

  if (t.order_count != populated)
    raise(Errc::cycle_detected,
          "cycle " + detail::describe_cycle(g, emitted, row_key));
  return t;
}

// Per-node values during a forward pass, NaN where never written. Reusable
// across calls; reset() restores the untouched state.
struct ValueBuffer {
  std::vector<double> values;
  std::vector<double> scratch;

  void reset(int max_nodes) {
    values.assign(std::size_t(max_nodes), kNaN);
    scratch.clear();
  }
};

// Stage two of inference: seed input rows with the raw inputs, then fold
// each remaining row in topological order as act(response * agg(w*v) + bias).
// Rows with no incoming edges aggregate to the reduction identity (0 for
// max, which has none).
inline void forward_into(const TransformedNetwork& t,
                         std::span<const double> inputs, ValueBuffer& buf,
                         std::span<double> outputs) {
  if (int(inputs.size()) != t.num_inputs())
    raise(Errc::shape_mismatch,
          "expected " + std::to_string(t.num_inputs()) + " inputs, got " +
              std::to_string(inputs.size()));
  for (double x : inputs)
    if (!std::isfinite(x)) raise(Errc::non_finite_input, "input not finite");

  buf.reset(t.limits.max_nodes);
  for (std::size_t i = 0; i < t.input_rows.size(); ++i)
    buf.values[std::size_t(t.input_rows[i])] = inputs[i];

  for (int idx = 0; idx < t.order_count; ++idx) {
    const int r = t.order[std::size_t(idx)];
    if (t.row_is_input[std::size_t(r)]) continue;
    buf.scratch.clear();
    for (const auto& [src, w] : t.incoming[std::size_t(r)])
      buf.scratch.push_back(w * buf.values[std::size_t(src)]);
    const double agg =
        buf.scratch.empty()
            ? aggregation_identity(t.row_agg[std::size_t(r)])
            : aggregate(t.row_agg[std::size_t(r)], buf.scratch);
    buf.values[std::size_t(r)] = t.row_act[std::size_t(r)](
        t.row_response[std::size_t(r)] * agg + t.row_bias[std::size_t(r)]);
  }

  for (std::size_t o = 0; o < t.output_rows.size(); ++o)
    outputs[o] = buf.values[std::size_t(t.output_rows[o])];
}

inline std::vector<double> forward(const TransformedNetwork& t,
                                   std::span<const double> inputs) {
  ValueBuffer buf;
  std::vector<double> outputs(std::size_t(t.num_outputs()));
  forward_into(t, inputs, buf, outputs);
  return outputs;
}

// Population x batch x outputs tensor, flattened row-major. Work splits
// across the population axis; each element equals the corresponding single
// forward() bit for bit.
struct BatchResult {
  int pop_size = 0;
  int batch = 0;
  int outputs = 0;
  std::vector<double> values;

  double at(int p, int b, int o) const {
    return values[(std::size_t(p) * std::size_t(batch) + std::size_t(b)) *
                      std::size_t(outputs) +
                  std::size_t(o)];
  }
};

inline BatchResult batch_forward(std::span<const TransformedNetwork> pop,
                                 std::span<const double> inputs, int batch,
                                 ThreadPool* pool = nullptr, int grain = 16) {
  BatchResult result;
  result.pop_size = int(pop.size());
  result.batch = batch;
  if (pop.empty()) return result;
  const int num_in = pop[0].num_inputs();
  const int num_out = pop[0].num_outputs();
  if (int(inputs.size()) != batch * num_in)
    raise(Errc::shape_mismatch, "input matrix is not batch x num_inputs");
  for (const auto& t : pop)
    if (t.num_inputs() != num_in || t.num_outputs() != num_out)
      raise(Errc::shape_mismatch, "networks disagree on input/output counts");
  result.outputs = num_out;
  result.values.resize(std::size_t(pop.size()) * std::size_t(batch) *
                       std::size_t(num_out));

  parallel_for(pool, int(pop.size()), grain, [&](int lo, int hi) {
    ValueBuffer buf;
    for (int p = lo; p < hi; ++p) {
      for (int b = 0; b < batch; ++b) {
        forward_into(
            pop[std::size_t(p)],
            inputs.subspan(std::size_t(b) * std::size_t(num_in),
                           std::size_t(num_in)),
            buf,
            std::span<double>(result.values)
                .subspan((std::size_t(p) * std::size_t(batch) +
                          std::size_t(b)) *
                             std::size_t(num_out),
                         std::size_t(num_out)));
      }
    }
  });
  return result;
}

}  // namespace flatneat
