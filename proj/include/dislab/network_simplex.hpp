#pragma once

#include <vector>

namespace dislab {

// Uncapacitated min-cost flow by the primal network simplex method
// (big-M artificial root, strongly feasible trees, block-search pricing).
// Costs may be changed between solves; the previous basis is then reused.
class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes);

  int add_arc(int from, int to, double cost);
  void set_cost(int arc, double cost);
  void set_supply(int node, double supply);

  enum class Status { optimal, infeasible };
  // `imbalance_tol` bounds the flow left on artificial arcs.
  Status solve(double imbalance_tol = 1e-9);

  int nodes() const { return n_; }
  int arcs() const { return static_cast<int>(src_.size()) - (built_ ? n_ : 0); }
  double flow(int arc) const { return flow_[arc]; }
  double cost(int arc) const { return cost_[arc]; }
  int source(int arc) const { return src_[arc]; }
  int target(int arc) const { return dst_[arc]; }
  // Sum of cost * flow over the user arcs.
  double total_cost() const;
  // Node potentials with cost + pi[from] - pi[to] >= 0 on every user arc at optimality.
  double potential(int node) const { return pi_[node]; }
  long pivots() const { return pivots_; }

 private:
  void build_initial_tree();
  void recompute_potentials();
  bool find_entering(int& arc);
  void pivot(int arc);
  void remove_child(int p, int c);
  void add_child(int p, int c);
  void update_subtree(int root, double shift);
  double reduced_cost(int a) const { return cost_[a] + pi_[src_[a]] - pi_[dst_[a]]; }

  int n_;
  int user_arcs_ = 0;
  bool built_ = false;
  std::vector<double> supply_;
  std::vector<int> src_, dst_;
  std::vector<double> cost_, flow_;
  std::vector<char> in_tree_;
  // Tree over n_ + 1 nodes (root = n_).
  std::vector<int> parent_, pred_, dir_, depth_;
  std::vector<int> first_child_, next_sib_, prev_sib_;
  std::vector<double> pi_;
  int next_arc_ = 0;
  int block_ = 0;
  double eps_ = 0.0;
  long pivots_ = 0;
  std::vector<int> path_u_, path_v_, stack_;
};

}  // namespace dislab
