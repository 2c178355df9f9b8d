#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dsync/patterns.hpp"

namespace dsync {

/// 1 - p_false^2 - p_true^2. Throws on an empty node.
double gini(std::size_t n_false, std::size_t n_true);

struct TreeParams {
  std::size_t max_depth = 5;
  std::size_t min_samples_leaf = 5;
  double min_impurity_decrease = 0;
};

std::vector<std::string> validate_params(const TreeParams& p);

/// Split condition is `x > threshold`; rows satisfying it go right.
struct TreeNode {
  int id = 0;
  int parent = -1;
  int left = -1;
  int right = -1;
  std::size_t depth = 0;
  std::optional<std::size_t> feature;
  double threshold = 0;
  double gini = 0;
  std::size_t samples = 0;
  std::size_t n_false = 0;
  std::size_t n_true = 0;

  bool is_leaf() const { return !feature.has_value(); }
  bool prediction() const { return n_true > n_false; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root; ids equal positions
  std::vector<std::string> feature_names;
  std::vector<bool> boolean_features;

  const TreeNode& root() const { return nodes.front(); }
  const TreeNode& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
  std::vector<int> leaves() const;
  /// Node ids from the root down to `id`, inclusive.
  std::vector<int> path_to(int id) const;
  bool predict(const std::vector<double>& row) const;
  std::size_t depth() const;
};

/// Greedy CART induction. Candidate thresholds are midpoints between
/// consecutive distinct values; the split with the largest weighted Gini
/// decrease wins, ties going to the lower feature index, then lower threshold.
Tree fit(const std::vector<std::vector<double>>& rows, const std::vector<bool>& labels, const TreeParams& params,
         std::vector<std::string> feature_names = {}, std::vector<bool> boolean_features = {});
Tree fit(const PatternTransitionLog& log, const TreeParams& params);

double training_accuracy(const Tree& tree, const std::vector<std::vector<double>>& rows,
                         const std::vector<bool>& labels);

/// Human-readable condition of one branch, e.g. `nrtokens(q1) > 4.5`.
std::string describe_branch(const Tree& tree, const TreeNode& parent, bool right);

std::string to_text(const Tree& tree);
nlohmann::ordered_json to_json(const Tree& tree);

}  // namespace dsync
