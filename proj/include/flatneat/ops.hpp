#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "flatneat/genome.hpp"
#include "flatneat/rng.hpp"

namespace flatneat {

// ---------------------------------------------------------------------------
// Structural primitives. All pure: they take a genome by value (or copy it)
// and return the modified genome.
// ---------------------------------------------------------------------------

inline GenomeTensors add_node(GenomeTensors g, const NodeRow& row) {
  const int key = int(row[kNodeKey]);
  if (g.find_node(key) >= 0)
    raise(Errc::duplicate_key, "node key " + std::to_string(key));
  const int r = g.first_empty_node_row();
  if (r < 0) raise(Errc::genome_full, "no free node row");
  std::copy(row.begin(), row.end(), g.node_row(r).begin());
  return g;
}

// Blanks the node row and cascades to every connection touching the key.
inline GenomeTensors remove_node(GenomeTensors g, int key) {
  if (g.is_input(key) || g.is_output(key))
    raise(Errc::protected_node, "node " + std::to_string(key) +
                                    " is an input or output");
  const int r = g.find_node(key);
  if (r < 0) raise(Errc::key_not_found, "node " + std::to_string(key));
  std::fill(g.node_row(r).begin(), g.node_row(r).end(), kNaN);
  for (int c = 0; c < g.limits.max_conns; ++c) {
    if (g.conn_row_empty(c)) continue;
    auto row = g.conn_row(c);
    if (int(row[kConnIn]) == key || int(row[kConnOut]) == key)
      std::fill(row.begin(), row.end(), kNaN);
  }
  return g;
}

inline GenomeTensors add_conn(GenomeTensors g, const ConnRow& row) {
  const int in = int(row[kConnIn]), out = int(row[kConnOut]);
  if (g.find_node(in) < 0 || g.find_node(out) < 0)
    raise(Errc::dangling_endpoint,
          "(" + std::to_string(in) + ", " + std::to_string(out) + ")");
  if (g.find_conn(in, out) >= 0)
    raise(Errc::duplicate_conn,
          "(" + std::to_string(in) + ", " + std::to_string(out) + ")");
  const int r = g.first_empty_conn_row();
  if (r < 0) raise(Errc::genome_full, "no free conn row");
  std::copy(row.begin(), row.end(), g.conn_row(r).begin());
  return g;
}

inline GenomeTensors remove_conn(GenomeTensors g, int in_key, int out_key) {
  const int r = g.find_conn(in_key, out_key);
  if (r < 0)
    raise(Errc::key_not_found,
          "conn (" + std::to_string(in_key) + ", " + std::to_string(out_key) + ")");
  std::fill(g.conn_row(r).begin(), g.conn_row(r).end(), kNaN);
  return g;
}

inline GenomeTensors set_node_attr(GenomeTensors g, int key, int attr_index,
                                   double value) {
  if (attr_index < 0 || attr_index >= kNodeAttrCount)
    raise(Errc::attr_out_of_range, "node attr " + std::to_string(attr_index));
  const int r = g.find_node(key);
  if (r < 0) raise(Errc::key_not_found, "node " + std::to_string(key));
  g.node_row(r)[std::size_t(1 + attr_index)] = value;
  return g;
}

inline GenomeTensors set_conn_attr(GenomeTensors g, int in_key, int out_key,
                                   int attr_index, double value) {
  if (attr_index < 0 || attr_index >= kConnAttrCount)
    raise(Errc::attr_out_of_range, "conn attr " + std::to_string(attr_index));
  const int r = g.find_conn(in_key, out_key);
  if (r < 0)
    raise(Errc::key_not_found,
          "conn (" + std::to_string(in_key) + ", " + std::to_string(out_key) + ")");
  g.conn_row(r)[std::size_t(3 + attr_index)] = value;
  return g;
}

// True if adding from->to would close a directed cycle through enabled
// connections, i.e. `from` is reachable from `to`.
inline bool creates_cycle(const GenomeTensors& g, int from_key, int to_key) {
  if (from_key == to_key) return true;
  std::vector<int> stack{to_key};
  std::vector<int> seen;
  while (!stack.empty()) {
    const int at = stack.back();
    stack.pop_back();
    if (at == from_key) return true;
    if (std::find(seen.begin(), seen.end(), at) != seen.end()) continue;
    seen.push_back(at);
    for (int r = 0; r < g.limits.max_conns; ++r) {
      if (g.conn_row_empty(r)) continue;
      auto row = g.conn_row(r);
      if (row[kConnEnabled] == 1.0 && int(row[kConnIn]) == at)
        stack.push_back(int(row[kConnOut]));
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Mutation configuration (Appendix-A-shaped parameter surface).
// ---------------------------------------------------------------------------

struct AttrMutation {
  double init_mean = 0.0;
  double init_std = 1.0;
  double mutate_power = 0.5;
  double mutate_rate = 0.7;
  double replace_rate = 0.1;
};

struct MutationConfig {
  double node_add = 0.2;
  double node_delete = 0.0;
  double conn_add = 0.4;
  double conn_delete = 0.0;
  AttrMutation bias{0.0, 1.0, 0.5, 0.7, 0.1};
  AttrMutation response{1.0, 0.0, 0.0, 0.0, 0.0};
  AttrMutation weight{0.0, 1.0, 0.5, 0.8, 0.1};
  double activation_replace_rate = 0.0;
  double aggregation_replace_rate = 0.0;
};

struct DistanceConfig {
  double compatibility_disjoint = 1.0;
  double compatibility_homologous = 0.5;
};

// Historical-marker bookkeeping. Within one generation, every split of the
// same connection pair receives the same new node key; the counter never
// runs backwards, so fresh keys can never collide with inherited ones.
class InnovationTable {
 public:
  explicit InnovationTable(int first_key = 0) : next_key_(first_key) {}

  int get_or_assign(int in_key, int out_key) {
    const auto pair = std::make_pair(in_key, out_key);
    auto it = assignments_.find(pair);
    if (it != assignments_.end()) return it->second;
    const int key = next_key_++;
    assignments_.emplace(pair, key);
    return key;
  }

  void next_generation() { assignments_.clear(); }

  int next_key() const { return next_key_; }

  void reserve_up_to(int key) { next_key_ = std::max(next_key_, key); }

 private:
  std::map<std::pair<int, int>, int> assignments_;
  int next_key_;
};

// ---------------------------------------------------------------------------
// Mutation. Split into phases so population-level reproduction can run the
// random parts in parallel and serialize only the innovation-key handout:
//   plan_node_split (parallel) -> InnovationTable (sequential, slot order)
//   -> apply_node_split + mutate_rest (parallel).
// mutate() composes the phases for single-genome use.
// ---------------------------------------------------------------------------

// Sub-key indices, one per operator, so draw sequences never alias.
namespace mutation_domain {
inline constexpr std::uint64_t kNodeSplit = 0;
inline constexpr std::uint64_t kNewNodeAttrs = 1;
inline constexpr std::uint64_t kConnAdd = 2;
inline constexpr std::uint64_t kNodeDelete = 3;
inline constexpr std::uint64_t kConnDelete = 4;
inline constexpr std::uint64_t kAttrs = 5;
}  // namespace mutation_domain

struct NodeSplitPlan {
  bool split = false;
  int in_key = 0;
  int out_key = 0;
};

// Decides whether this genome splits a connection and which one. Saturates
// to a no-op when no enabled connection exists or the tensors lack room
// (one node row and two conn rows).
inline NodeSplitPlan plan_node_split(const GenomeTensors& g, const RngKey& key,
                                     const MutationConfig& cfg) {
  NodeSplitPlan plan;
  if (cfg.node_add <= 0.0) return plan;
  RngStream stream(key.split(mutation_domain::kNodeSplit));
  if (!stream.coin(cfg.node_add)) return plan;
  std::vector<int> enabled;
  for (int r = 0; r < g.limits.max_conns; ++r)
    if (!g.conn_row_empty(r) && g.conn_row(r)[kConnEnabled] == 1.0)
      enabled.push_back(r);
  if (enabled.empty()) return plan;
  if (g.first_empty_node_row() < 0) return plan;
  int free_conn_rows = 0;
  for (int r = 0; r < g.limits.max_conns && free_conn_rows < 2; ++r)
    if (g.conn_row_empty(r)) ++free_conn_rows;
  if (free_conn_rows < 2) return plan;
  const int pick = enabled[std::size_t(stream.index(int(enabled.size())))];
  plan.split = true;
  plan.in_key = int(g.conn_row(pick)[kConnIn]);
  plan.out_key = int(g.conn_row(pick)[kConnOut]);
  return plan;
}

// Disables the split connection and wires in_key -> new_key -> out_key with
// weights 1.0 and the old weight. New node attributes come from the init
// distributions.
inline GenomeTensors apply_node_split(GenomeTensors g, const NodeSplitPlan& plan,
                                      int new_key, const RngKey& key,
                                      const MutationConfig& cfg,
                                      const AttributeSchema& schema) {
  if (!plan.split) return g;
  const int r = g.find_conn(plan.in_key, plan.out_key);
  if (r < 0) return g;
  auto row = g.conn_row(r);
  const double old_weight = row[kConnWeight];
  row[kConnEnabled] = 0.0;

  RngStream attrs(key.split(mutation_domain::kNewNodeAttrs));
  NodeRow node{double(new_key), attrs.normal(cfg.bias.init_mean, cfg.bias.init_std),
               attrs.normal(cfg.response.init_mean, cfg.response.init_std),
               double(schema.default_aggregation),
               double(schema.default_activation)};
  g = add_node(std::move(g), node);
  g = add_conn(std::move(g), ConnRow{double(plan.in_key), double(new_key), 1.0, 1.0});
  g = add_conn(std::move(g), ConnRow{double(new_key), double(plan.out_key), 1.0,
                                     old_weight});
  return g;
}

namespace detail {

// Uniform choice among legal new connections: rejection sampling first, then
// a deterministic full scan when the random probes keep missing. Legal means
// target is not an input, the pair is absent, and the enabled graph stays
// acyclic.
inline std::optional<std::pair<int, int>> pick_new_conn(const GenomeTensors& g,
                                                        RngStream& stream) {
  std::vector<int> keys;
  for (int r = 0; r < g.limits.max_nodes; ++r)
    if (!g.node_row_empty(r)) keys.push_back(int(g.node_row(r)[kNodeKey]));
  std::vector<int> targets;
  for (int k : keys)
    if (!g.is_input(k)) targets.push_back(k);
  if (keys.empty() || targets.empty()) return std::nullopt;

  auto legal = [&](int from, int to) {
    return g.find_conn(from, to) < 0 && !creates_cycle(g, from, to);
  };

  for (int probe = 0; probe < 16; ++probe) {
    const int from = keys[std::size_t(stream.index(int(keys.size())))];
    const int to = targets[std::size_t(stream.index(int(targets.size())))];
    if (legal(from, to)) return std::make_pair(from, to);
  }

  std::sort(keys.begin(), keys.end());
  std::sort(targets.begin(), targets.end());
  std::vector<std::pair<int, int>> candidates;
  for (int from : keys)
    for (int to : targets)
      if (legal(from, to)) candidates.emplace_back(from, to);
  if (candidates.empty()) return std::nullopt;
  return candidates[std::size_t(stream.index(int(candidates.size())))];
}

inline void mutate_scalar(double& value, const AttrMutation& cfg,
                          RngStream& stream) {
  const double u = stream.uniform();
  if (u < cfg.mutate_rate) {
    value += stream.normal(0.0, cfg.mutate_power);
  } else if (u < cfg.mutate_rate + cfg.replace_rate) {
    value = stream.normal(cfg.init_mean, cfg.init_std);
  }
}

}  // namespace detail

// Everything after the node split: connection add/delete, node delete, then
// per-attribute perturbation. Input-node rows are never touched; their
// attributes are inert placeholders.
inline GenomeTensors mutate_rest(GenomeTensors g, const RngKey& key,
                                 const MutationConfig& cfg,
                                 const AttributeSchema& schema) {
  {
    RngStream stream(key.split(mutation_domain::kConnAdd));
    if (cfg.conn_add > 0.0 && stream.coin(cfg.conn_add) &&
        g.first_empty_conn_row() >= 0) {
      if (auto pick = detail::pick_new_conn(g, stream)) {
        g = add_conn(std::move(g),
                     ConnRow{double(pick->first), double(pick->second), 1.0,
                             stream.normal(cfg.weight.init_mean,
                                           cfg.weight.init_std)});
      }
    }
  }
  {
    RngStream stream(key.split(mutation_domain::kNodeDelete));
    if (cfg.node_delete > 0.0 && stream.coin(cfg.node_delete)) {
      std::vector<int> hidden;
      for (int r = 0; r < g.limits.max_nodes; ++r) {
        if (g.node_row_empty(r)) continue;
        const int k = int(g.node_row(r)[kNodeKey]);
        if (!g.is_input(k) && !g.is_output(k)) hidden.push_back(k);
      }
      if (!hidden.empty())
        g = remove_node(std::move(g),
                        hidden[std::size_t(stream.index(int(hidden.size())))]);
    }
  }
  {
    RngStream stream(key.split(mutation_domain::kConnDelete));
    if (cfg.conn_delete > 0.0 && stream.coin(cfg.conn_delete)) {
      std::vector<int> rows;
      for (int r = 0; r < g.limits.max_conns; ++r)
        if (!g.conn_row_empty(r)) rows.push_back(r);
      if (!rows.empty()) {
        const int r = rows[std::size_t(stream.index(int(rows.size())))];
        const auto row = g.conn_row(r);
        g = remove_conn(std::move(g), int(row[kConnIn]), int(row[kConnOut]));
      }
    }
  }
  {
    RngStream stream(key.split(mutation_domain::kAttrs));
    for (int r = 0; r < g.limits.max_nodes; ++r) {
      if (g.node_row_empty(r)) continue;
      auto row = g.node_row(r);
      if (g.is_input(int(row[kNodeKey]))) continue;
      detail::mutate_scalar(row[kNodeBias], cfg.bias, stream);
      detail::mutate_scalar(row[kNodeResponse], cfg.response, stream);
      if (cfg.aggregation_replace_rate > 0.0 &&
          stream.coin(cfg.aggregation_replace_rate))
        row[kNodeAggregation] =
            double(stream.index(int(schema.aggregations.size())));
      if (cfg.activation_replace_rate > 0.0 &&
          stream.coin(cfg.activation_replace_rate))
        row[kNodeActivation] =
            double(stream.index(int(schema.activations.size())));
    }
    for (int r = 0; r < g.limits.max_conns; ++r) {
      if (g.conn_row_empty(r)) continue;
      detail::mutate_scalar(g.conn_row(r)[kConnWeight], cfg.weight, stream);
    }
  }
  return g;
}

inline GenomeTensors mutate(const GenomeTensors& g, const RngKey& key,
                            const MutationConfig& cfg,
                            const AttributeSchema& schema,
                            InnovationTable& innovations) {
  const NodeSplitPlan plan = plan_node_split(g, key, cfg);
  GenomeTensors out = g;
  if (plan.split) {
    const int new_key = innovations.get_or_assign(plan.in_key, plan.out_key);
    out = apply_node_split(std::move(out), plan, new_key, key, cfg, schema);
  }
  return mutate_rest(std::move(out), key, cfg, schema);
}

// ---------------------------------------------------------------------------
// Crossover. Child topology (keys, endpoint pairs, enabled flags, row
// placement) is the fitter parent's; attributes of genes matched by
// historical marker are picked per attribute by fair coin.
// ---------------------------------------------------------------------------

inline GenomeTensors crossover(const GenomeTensors& fit_parent,
                               const GenomeTensors& other, const RngKey& key) {
  if (!(fit_parent.limits == other.limits))
    raise(Errc::shape_mismatch, "parents have different limits");
  GenomeTensors child = fit_parent;
  RngStream stream(key);
  for (int r = 0; r < child.limits.max_nodes; ++r) {
    if (child.node_row_empty(r)) continue;
    auto row = child.node_row(r);
    const int match = other.find_node(int(row[kNodeKey]));
    if (match < 0) continue;
    auto theirs = other.node_row(match);
    for (int a = 1; a < kNodeCols; ++a)
      if (stream.coin(0.5)) row[std::size_t(a)] = theirs[std::size_t(a)];
  }
  for (int r = 0; r < child.limits.max_conns; ++r) {
    if (child.conn_row_empty(r)) continue;
    auto row = child.conn_row(r);
    const int match = other.find_conn(int(row[kConnIn]), int(row[kConnOut]));
    if (match < 0) continue;
    auto theirs = other.conn_row(match);
    for (int a = 3; a < kConnCols; ++a)
      if (stream.coin(0.5)) row[std::size_t(a)] = theirs[std::size_t(a)];
  }
  return child;
}

// ---------------------------------------------------------------------------
// Compatibility distance: disjoint count plus mean attribute difference of
// marker-matched genes, per gene class, normalized by the larger genome.
// Function-id attributes contribute 0/1.
// ---------------------------------------------------------------------------

inline double distance(const GenomeTensors& g1, const GenomeTensors& g2,
                       const DistanceConfig& cfg) {
  if (g1.limits.max_nodes != g2.limits.max_nodes ||
      g1.limits.max_conns != g2.limits.max_conns)
    raise(Errc::shape_mismatch, "genomes have different limits");

  double total = 0.0;

  {  // Node genes, keyed by historical marker.
    int n1 = 0, n2 = 0, matching = 0;
    double attr_diff_sum = 0.0;
    for (int r = 0; r < g2.limits.max_nodes; ++r)
      if (!g2.node_row_empty(r)) ++n2;
    for (int r = 0; r < g1.limits.max_nodes; ++r) {
      if (g1.node_row_empty(r)) continue;
      ++n1;
      auto row = g1.node_row(r);
      const int match = g2.find_node(int(row[kNodeKey]));
      if (match < 0) continue;
      ++matching;
      auto theirs = g2.node_row(match);
      double d = std::abs(row[kNodeBias] - theirs[kNodeBias]) +
                 std::abs(row[kNodeResponse] - theirs[kNodeResponse]) +
                 (row[kNodeAggregation] != theirs[kNodeAggregation] ? 1.0 : 0.0) +
                 (row[kNodeActivation] != theirs[kNodeActivation] ? 1.0 : 0.0);
      attr_diff_sum += d / double(kNodeAttrCount);
    }
    const int disjoint = (n1 - matching) + (n2 - matching);
    const double norm = std::max(1, std::max(n1, n2));
    total += cfg.compatibility_disjoint * double(disjoint) / norm;
    if (matching > 0)
      total += cfg.compatibility_homologous * attr_diff_sum / double(matching);
  }

  {  // Connection genes, keyed by endpoint pair.
    int n1 = 0, n2 = 0, matching = 0;
    double attr_diff_sum = 0.0;
    for (int r = 0; r < g2.limits.max_conns; ++r)
      if (!g2.conn_row_empty(r)) ++n2;
    for (int r = 0; r < g1.limits.max_conns; ++r) {
      if (g1.conn_row_empty(r)) continue;
      ++n1;
      auto row = g1.conn_row(r);
      const int match = g2.find_conn(int(row[kConnIn]), int(row[kConnOut]));
      if (match < 0) continue;
      ++matching;
      auto theirs = g2.conn_row(match);
      attr_diff_sum += std::abs(row[kConnWeight] - theirs[kConnWeight]) /
                       double(kConnAttrCount);
    }
    const int disjoint = (n1 - matching) + (n2 - matching);
    const double norm = std::max(1, std::max(n1, n2));
    total += cfg.compatibility_disjoint * double(disjoint) / norm;
    if (matching > 0)
      total += cfg.compatibility_homologous * attr_diff_sum / double(matching);
  }

  return total;
}

}  // namespace flatneat
