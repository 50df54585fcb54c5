#include "dislab/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dislab {

MinCostFlow::MinCostFlow(int nodes) : n_(nodes), supply_(nodes, 0.0) {
  if (nodes < 1) throw std::invalid_argument("MinCostFlow: need at least one node");
}

int MinCostFlow::add_arc(int from, int to, double cost) {
  if (built_) throw std::logic_error("MinCostFlow: arcs must be added before the first solve");
  if (from < 0 || from >= n_ || to < 0 || to >= n_ || from == to) {
    throw std::invalid_argument("MinCostFlow: bad arc endpoints");
  }
  if (!std::isfinite(cost)) throw std::invalid_argument("MinCostFlow: non-finite cost");
  src_.push_back(from);
  dst_.push_back(to);
  cost_.push_back(cost);
  flow_.push_back(0.0);
  return user_arcs_++;
}

void MinCostFlow::set_cost(int arc, double cost) {
  if (arc < 0 || arc >= user_arcs_) throw std::out_of_range("MinCostFlow: arc index");
  cost_[arc] = cost;
}

void MinCostFlow::set_supply(int node, double supply) {
  if (built_) throw std::logic_error("MinCostFlow: supplies are fixed after the first solve");
  supply_[node] = supply;
}

double MinCostFlow::total_cost() const {
  double c = 0.0;
  for (int a = 0; a < user_arcs_; ++a) c += cost_[a] * flow_[a];
  return c;
}

void MinCostFlow::build_initial_tree() {
  int root = n_;
  double max_cost = 0.0;
  for (int a = 0; a < user_arcs_; ++a) max_cost = std::max(max_cost, std::abs(cost_[a]));
  double big = (max_cost + 1.0) * (n_ + 1);
  parent_.assign(n_ + 1, -1);
  pred_.assign(n_ + 1, -1);
  dir_.assign(n_ + 1, 0);
  depth_.assign(n_ + 1, 0);
  first_child_.assign(n_ + 1, -1);
  next_sib_.assign(n_ + 1, -1);
  prev_sib_.assign(n_ + 1, -1);
  in_tree_.assign(user_arcs_ + n_, 0);
  for (int v = 0; v < n_; ++v) {
    int a = static_cast<int>(src_.size());
    if (supply_[v] >= 0.0) {
      src_.push_back(v);
      dst_.push_back(root);
      flow_.push_back(supply_[v]);
      dir_[v] = +1;
    } else {
      src_.push_back(root);
      dst_.push_back(v);
      flow_.push_back(-supply_[v]);
      dir_[v] = -1;
    }
    cost_.push_back(big);
    in_tree_[a] = 1;
    parent_[v] = root;
    pred_[v] = a;
    depth_[v] = 1;
    add_child(root, v);
  }
  built_ = true;
  int total = static_cast<int>(src_.size());
  block_ = std::max(10, static_cast<int>(std::sqrt(static_cast<double>(total))));
  next_arc_ = 0;
}

void MinCostFlow::add_child(int p, int c) {
  next_sib_[c] = first_child_[p];
  prev_sib_[c] = -1;
  if (first_child_[p] >= 0) prev_sib_[first_child_[p]] = c;
  first_child_[p] = c;
}

void MinCostFlow::remove_child(int p, int c) {
  if (prev_sib_[c] >= 0) {
    next_sib_[prev_sib_[c]] = next_sib_[c];
  } else {
    first_child_[p] = next_sib_[c];
  }
  if (next_sib_[c] >= 0) prev_sib_[next_sib_[c]] = prev_sib_[c];
  next_sib_[c] = prev_sib_[c] = -1;
}

void MinCostFlow::recompute_potentials() {
  int root = n_;
  pi_.assign(n_ + 1, 0.0);
  depth_[root] = 0;
  stack_.clear();
  stack_.push_back(root);
  while (!stack_.empty()) {
    int x = stack_.back();
    stack_.pop_back();
    for (int c = first_child_[x]; c >= 0; c = next_sib_[c]) {
      int a = pred_[c];
      // Tree arcs have zero reduced cost.
      pi_[c] = dir_[c] > 0 ? pi_[x] - cost_[a] : pi_[x] + cost_[a];
      depth_[c] = depth_[x] + 1;
      stack_.push_back(c);
    }
  }
}

void MinCostFlow::update_subtree(int root, double shift) {
  stack_.clear();
  stack_.push_back(root);
  while (!stack_.empty()) {
    int x = stack_.back();
    stack_.pop_back();
    pi_[x] += shift;
    depth_[x] = depth_[parent_[x]] + 1;
    for (int c = first_child_[x]; c >= 0; c = next_sib_[c]) stack_.push_back(c);
  }
}

bool MinCostFlow::find_entering(int& arc) {
  int total = static_cast<int>(src_.size());
  int scanned = 0;
  int a = next_arc_;
  while (scanned < total) {
    int best = -1;
    double best_rc = -eps_;
    int count = 0;
    while (count < block_ && scanned < total) {
      if (!in_tree_[a]) {
        double rc = reduced_cost(a);
        if (rc < best_rc) {
          best_rc = rc;
          best = a;
        }
      }
      ++count;
      ++scanned;
      if (++a == total) a = 0;
    }
    if (best >= 0) {
      arc = best;
      next_arc_ = a;
      return true;
    }
  }
  return false;
}

void MinCostFlow::pivot(int e) {
  int u = src_[e], v = dst_[e];
  // Paths from u and v up to their join.
  path_u_.clear();
  path_v_.clear();
  int a = u, b = v;
  while (depth_[a] > depth_[b]) { path_u_.push_back(a); a = parent_[a]; }
  while (depth_[b] > depth_[a]) { path_v_.push_back(b); b = parent_[b]; }
  while (a != b) {
    path_u_.push_back(a); a = parent_[a];
    path_v_.push_back(b); b = parent_[b];
  }
  // Cycle direction is u -> v, up from v to the join, down to u.
  // On the v side a tree arc is backward when it points parent -> child;
  // on the u side when it points child -> parent.
  double delta = std::numeric_limits<double>::infinity();
  int leave = -1;  // node whose pred arc leaves
  bool leave_on_v = false;
  // Order of traversal from the join: u side top-down, then v side bottom-up.
  // Ties go to the last blocking arc in that order.
  for (int i = static_cast<int>(path_u_.size()) - 1; i >= 0; --i) {
    int x = path_u_[i];
    if (dir_[x] > 0) {
      double f = flow_[pred_[x]];
      if (f <= delta) { delta = f; leave = x; leave_on_v = false; }
    }
  }
  for (int x : path_v_) {
    if (dir_[x] < 0) {
      double f = flow_[pred_[x]];
      if (f <= delta) { delta = f; leave = x; leave_on_v = true; }
    }
  }
  if (leave < 0) throw std::runtime_error("MinCostFlow: unbounded cycle (negative-cost cycle without blocking arc)");
  if (delta > 0.0) {
    flow_[e] += delta;
    for (int x : path_u_) flow_[pred_[x]] += dir_[x] > 0 ? -delta : delta;
    for (int x : path_v_) flow_[pred_[x]] += dir_[x] < 0 ? -delta : delta;
  }
  flow_[pred_[leave]] = 0.0;
  double rc = reduced_cost(e);
  in_tree_[pred_[leave]] = 0;
  in_tree_[e] = 1;

  // Re-hang the subtree cut off by the leaving arc below the entering arc.
  int new_root = leave_on_v ? v : u;
  int new_parent = leave_on_v ? u : v;
  int entering_dir = leave_on_v ? -1 : +1;
  double shift = leave_on_v ? rc : -rc;
  std::vector<int>& path = leave_on_v ? path_v_ : path_u_;
  // path holds new_root first; keep the prefix ending at `leave`.
  std::size_t k = 0;
  while (path[k] != leave) ++k;
  for (std::size_t i = 0; i <= k; ++i) remove_child(parent_[path[i]], path[i]);
  int p_parent = new_parent, p_arc = e, p_dir = entering_dir;
  for (std::size_t i = 0; i <= k; ++i) {
    int x = path[i];
    int old_arc = pred_[x], old_dir = dir_[x];
    parent_[x] = p_parent;
    pred_[x] = p_arc;
    dir_[x] = p_dir;
    add_child(p_parent, x);
    p_parent = x;
    p_arc = old_arc;
    p_dir = -old_dir;
  }
  update_subtree(new_root, shift);
  ++pivots_;
}

MinCostFlow::Status MinCostFlow::solve(double imbalance_tol) {
  if (!built_) build_initial_tree();
  double max_cost = 0.0;
  for (int a = 0; a < user_arcs_; ++a) max_cost = std::max(max_cost, std::abs(cost_[a]));
  // Artificial costs must dominate any user path after cost updates.
  double big = (max_cost + 1.0) * (n_ + 1);
  for (std::size_t a = user_arcs_; a < cost_.size(); ++a) cost_[a] = big;
  eps_ = 1e-12 * big;
  recompute_potentials();
  int e;
  while (find_entering(e)) pivot(e);
  double art = 0.0;
  for (std::size_t a = user_arcs_; a < flow_.size(); ++a) art += flow_[a];
  double scale = 0.0;
  for (double s : supply_) scale += std::abs(s);
  return art <= imbalance_tol * std::max(scale, 1e-300) ? Status::optimal : Status::infeasible;
}

}  // namespace dislab
