#pragma once
// Primal network simplex for min-cost flow with node supplies and arc
// capacities, on int64 costs and flows. Designed for transportation
// instances built incrementally: after a solve, new nodes and arcs may be
// appended and the solve resumed from the current basis, which is what the
// column-generation driver in transport.cpp relies on.
//
// The spanning tree is kept strongly feasible (leaving arc = last blocking
// arc around the cycle starting at the apex, in the direction of the
// entering arc), so degenerate pivots cannot cycle. Pivot selection is a
// deterministic block search over the arc list.

#include <cstdint>
#include <vector>

namespace wproj {

class NetworkSimplex {
 public:
  enum class Status { optimal, infeasible, unsolved };

  static constexpr int64_t kInfCap = INT64_MAX / 4;

  // Upper bounds on the eventual node count and arc cost magnitude, so the
  // artificial arc cost keeps dominating real paths when arcs are appended
  // after the first solve.
  void reserve_hint(int max_nodes, int64_t max_cost);

  // Nodes added before the first solve enter the initial artificial tree.
  // Nodes added afterwards must be connected by attach_node before resuming.
  int add_node(int64_t supply);
  // Arcs may be added at any time; post-solve additions start nonbasic at
  // their lower bound.
  int add_arc(int tail, int head, int64_t cap, int64_t cost);

  // Makes `via_arc` (an arc between `node` and an existing tree node, with
  // zero flow) the tree arc of a node created after the last solve.
  void attach_node(int node, int via_arc);

  Status solve();

  int64_t flow(int arc) const { return flow_[arc]; }
  int64_t potential(int node) const { return pi_[node]; }
  // Total cost over non-artificial arcs.
  int64_t total_cost() const;
  int num_nodes() const { return static_cast<int>(supply_.size()); }
  int num_arcs() const { return static_cast<int>(tail_.size()); }

 private:
  enum : int8_t { kTree = 0, kLower = 1, kUpper = -1 };

  void init_tree();
  int find_entering();
  void pivot(int arc);
  int64_t reduced_cost(int arc) const {
    return cost_[arc] - pi_[tail_[arc]] + pi_[head_[arc]];
  }

  // arcs
  std::vector<int> tail_, head_;
  std::vector<int64_t> cap_, cost_, flow_;
  std::vector<int8_t> state_;
  std::vector<uint8_t> artificial_;

  // nodes (+ root at index num_nodes() after init)
  std::vector<int64_t> supply_;
  std::vector<int64_t> pi_;
  std::vector<int> parent_, pred_arc_, depth_;
  std::vector<int8_t> pred_dir_;  // +1: pred arc oriented node -> parent
  std::vector<int> first_child_, next_sib_, prev_sib_;

  int root_ = -1;
  int next_arc_ = 0;
  int64_t art_cost_ = 0;
  int hint_nodes_ = 0;
  int64_t hint_cost_ = 0;
  bool initialized_ = false;

  void child_attach(int node, int par);
  void child_detach(int node);
  // scratch
  std::vector<int> path_buf_;
};

}  // namespace wproj
