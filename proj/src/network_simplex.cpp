#include "wproj/network_simplex.hpp"

#include <cmath>
#include <cstdlib>

#include "wproj/errors.hpp"

namespace wproj {

void NetworkSimplex::reserve_hint(int max_nodes, int64_t max_cost) {
  hint_nodes_ = max_nodes;
  hint_cost_ = max_cost;
}

int NetworkSimplex::add_node(int64_t supply) {
  supply_.push_back(supply);
  pi_.push_back(0);
  parent_.push_back(-1);
  pred_arc_.push_back(-1);
  depth_.push_back(0);
  pred_dir_.push_back(0);
  first_child_.push_back(-1);
  next_sib_.push_back(-1);
  prev_sib_.push_back(-1);
  return static_cast<int>(supply_.size()) - 1;
}

int NetworkSimplex::add_arc(int tail, int head, int64_t cap, int64_t cost) {
  tail_.push_back(tail);
  head_.push_back(head);
  cap_.push_back(cap);
  cost_.push_back(cost);
  flow_.push_back(0);
  state_.push_back(kLower);
  artificial_.push_back(0);
  return static_cast<int>(tail_.size()) - 1;
}

void NetworkSimplex::child_attach(int node, int par) {
  parent_[node] = par;
  next_sib_[node] = first_child_[par];
  prev_sib_[node] = -1;
  if (first_child_[par] >= 0) prev_sib_[first_child_[par]] = node;
  first_child_[par] = node;
}

void NetworkSimplex::child_detach(int node) {
  const int par = parent_[node];
  if (prev_sib_[node] >= 0)
    next_sib_[prev_sib_[node]] = next_sib_[node];
  else
    first_child_[par] = next_sib_[node];
  if (next_sib_[node] >= 0) prev_sib_[next_sib_[node]] = prev_sib_[node];
  next_sib_[node] = prev_sib_[node] = -1;
}

void NetworkSimplex::attach_node(int node, int via_arc) {
  if (flow_[via_arc] != 0)
    throw SolverError("network simplex: attach arc must carry zero flow");
  int other;
  int8_t dir;
  if (tail_[via_arc] == node) {
    other = head_[via_arc];
    dir = +1;
    pi_[node] = cost_[via_arc] + pi_[other];
  } else {
    other = tail_[via_arc];
    dir = -1;
    pi_[node] = pi_[other] - cost_[via_arc];
  }
  pred_arc_[node] = via_arc;
  pred_dir_[node] = dir;
  depth_[node] = depth_[other] + 1;
  state_[via_arc] = kTree;
  child_attach(node, other);
}

void NetworkSimplex::init_tree() {
  const int n = static_cast<int>(supply_.size());
  int64_t max_cost = hint_cost_;
  for (int64_t c : cost_)
    max_cost = std::max<int64_t>(max_cost, std::llabs(c));
  art_cost_ = (max_cost + 1) * (std::max(n, hint_nodes_) + 2);

  root_ = add_node(0);
  pi_[root_] = 0;
  for (int v = 0; v < n; ++v) {
    int a;
    if (supply_[v] >= 0) {
      a = add_arc(v, root_, kInfCap, art_cost_);
      flow_[a] = supply_[v];
      pred_dir_[v] = +1;
      pi_[v] = art_cost_;
    } else {
      a = add_arc(root_, v, kInfCap, art_cost_);
      flow_[a] = -supply_[v];
      pred_dir_[v] = -1;
      pi_[v] = -art_cost_;
    }
    artificial_.back() = 1;
    state_[a] = kTree;
    pred_arc_[v] = a;
    depth_[v] = 1;
    child_attach(v, root_);
  }
  initialized_ = true;
}

int NetworkSimplex::find_entering() {
  const int m = static_cast<int>(tail_.size());
  if (m == 0) return -1;
  if (next_arc_ >= m) next_arc_ = 0;
  const int block =
      std::max(64, static_cast<int>(std::sqrt(static_cast<double>(m))));
  int count = block;
  int best = -1;
  int64_t best_viol = 0;
  for (int scanned = 0; scanned < m; ++scanned) {
    const int a = next_arc_;
    if (++next_arc_ >= m) next_arc_ = 0;
    const int8_t st = state_[a];
    if (st != kTree) {
      const int64_t rc = reduced_cost(a);
      const int64_t viol = st == kLower ? -rc : rc;
      if (viol > best_viol) {
        best_viol = viol;
        best = a;
      }
    }
    if (--count == 0) {
      if (best >= 0) return best;
      count = block;
    }
  }
  return best;
}

void NetworkSimplex::pivot(int a) {
  const int8_t st = state_[a];
  const int u = tail_[a], v = head_[a];
  const int s = st == kLower ? u : v;  // cycle direction: s -> (arc) -> t
  const int t = st == kLower ? v : u;

  int x = s, y = t;
  while (x != y) {
    if (depth_[x] >= depth_[y])
      x = parent_[x];
    else
      y = parent_[y];
  }
  const int join = x;

  static thread_local std::vector<int> svec, tvec;
  svec.clear();
  tvec.clear();
  for (int z = s; z != join; z = parent_[z]) svec.push_back(z);
  for (int z = t; z != join; z = parent_[z]) tvec.push_back(z);

  // Residual of the tree arc above z when delta flows around the cycle.
  auto s_side_res = [&](int z) {
    const int e = pred_arc_[z];
    return pred_dir_[z] > 0 ? flow_[e] : cap_[e] - flow_[e];
  };
  auto t_side_res = [&](int z) {
    const int e = pred_arc_[z];
    return pred_dir_[z] > 0 ? cap_[e] - flow_[e] : flow_[e];
  };

  // Leaving arc: last blocking arc when traversing the cycle from the apex
  // in the entering direction, i.e. apex -> s side (downward), entering arc,
  // t side (upward) -> apex. Ties overwrite so the last minimum wins; this
  // keeps the tree strongly feasible.
  int64_t delta = kInfCap;
  int leave_node = -1;  // -1 means the entering arc leaves again
  bool leave_on_s = false;
  for (std::size_t k = svec.size(); k-- > 0;) {
    const int64_t r = s_side_res(svec[k]);
    if (r <= delta) {
      delta = r;
      leave_node = svec[k];
      leave_on_s = true;
    }
  }
  {
    const int64_t r = st == kLower ? cap_[a] - flow_[a] : flow_[a];
    if (r <= delta) {
      delta = r;
      leave_node = -1;
    }
  }
  for (int z : tvec) {
    const int64_t r = t_side_res(z);
    if (r <= delta) {
      delta = r;
      leave_node = z;
      leave_on_s = false;
    }
  }

  if (delta > 0) {
    flow_[a] += st == kLower ? delta : -delta;
    for (int z : svec) {
      const int e = pred_arc_[z];
      flow_[e] += pred_dir_[z] > 0 ? -delta : delta;
    }
    for (int z : tvec) {
      const int e = pred_arc_[z];
      flow_[e] += pred_dir_[z] > 0 ? delta : -delta;
    }
  }

  if (leave_node < 0) {
    state_[a] = st == kLower ? kUpper : kLower;
    return;
  }

  const int w = leave_node;
  const int la = pred_arc_[w];
  state_[la] = flow_[la] == 0 ? kLower : kUpper;
  state_[a] = kTree;

  const int q = leave_on_s ? s : t;  // q sits in the detached subtree
  const int r_node = leave_on_s ? t : s;
  const int64_t rc = reduced_cost(a);
  const int64_t shift = q == u ? rc : -rc;

  // Re-root the detached subtree at q: reverse the tree path q .. w, then
  // hang q under r_node via the entering arc.
  auto& path = path_buf_;
  path.clear();
  for (int z = q;; z = parent_[z]) {
    path.push_back(z);
    if (z == w) break;
  }
  static thread_local std::vector<int> old_pred;
  static thread_local std::vector<int8_t> old_dir;
  old_pred.assign(path.size(), -1);
  old_dir.assign(path.size(), 0);
  for (std::size_t k = 0; k < path.size(); ++k) {
    old_pred[k] = pred_arc_[path[k]];
    old_dir[k] = pred_dir_[path[k]];
  }
  for (int z : path) child_detach(z);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const int child = path[k + 1], par = path[k];
    pred_arc_[child] = old_pred[k];
    pred_dir_[child] = static_cast<int8_t>(-old_dir[k]);
    child_attach(child, par);
  }
  pred_arc_[q] = a;
  pred_dir_[q] = q == u ? +1 : -1;
  child_attach(q, r_node);

  // Fix depths and potentials across the moved subtree.
  static thread_local std::vector<int> stack;
  stack.clear();
  stack.push_back(q);
  while (!stack.empty()) {
    const int z = stack.back();
    stack.pop_back();
    depth_[z] = depth_[parent_[z]] + 1;
    pi_[z] += shift;
    for (int c = first_child_[z]; c >= 0; c = next_sib_[c])
      stack.push_back(c);
  }
}

NetworkSimplex::Status NetworkSimplex::solve() {
  if (!initialized_) init_tree();
  for (;;) {
    const int e = find_entering();
    if (e < 0) break;
    pivot(e);
  }
  for (std::size_t a = 0; a < tail_.size(); ++a)
    if (artificial_[a] && flow_[a] > 0) return Status::infeasible;
  return Status::optimal;
}

int64_t NetworkSimplex::total_cost() const {
  int64_t total = 0;
  for (std::size_t a = 0; a < tail_.size(); ++a)
    if (!artificial_[a]) total += flow_[a] * cost_[a];
  return total;
}

}  // namespace wproj
