#include "dsync/decision_tree.hpp"

#include <algorithm>
#include <numeric>

namespace dsync {

double gini(std::size_t n_false, std::size_t n_true) {
  if (n_false + n_true == 0) throw Error("gini of an empty node");
  double n = static_cast<double>(n_false + n_true);
  double pf = static_cast<double>(n_false) / n;
  double pt = static_cast<double>(n_true) / n;
  return 1.0 - pf * pf - pt * pt;
}

std::vector<std::string> validate_params(const TreeParams& p) {
  std::vector<std::string> out;
  if (p.max_depth < 1) out.push_back("tree max_depth must be >= 1");
  if (p.min_samples_leaf < 1) out.push_back("tree min_samples_leaf must be >= 1");
  if (!(p.min_impurity_decrease >= 0)) out.push_back("tree min_impurity_decrease must be >= 0");
  return out;
}

namespace {

// Decreases closer than this are treated as ties.
constexpr double kTie = 1e-12;

struct Split {
  std::size_t feature = 0;
  double threshold = 0;
  double decrease = 0;
};

class Builder {
 public:
  Builder(const std::vector<std::vector<double>>& rows, const std::vector<bool>& labels, const TreeParams& p, Tree& tree)
      : rows_(rows), labels_(labels), p_(p), tree_(tree) {}

  int grow(std::vector<std::size_t> idx, int parent, std::size_t depth) {
    TreeNode node;
    node.id = static_cast<int>(tree_.nodes.size());
    node.parent = parent;
    node.depth = depth;
    node.samples = idx.size();
    for (auto i : idx) (labels_[i] ? node.n_true : node.n_false)++;
    node.gini = gini(node.n_false, node.n_true);
    tree_.nodes.push_back(node);

    if (depth >= p_.max_depth || node.gini == 0 || idx.size() < 2 * p_.min_samples_leaf) return node.id;
    auto split = best_split(idx, node);
    if (!split || split->decrease <= kTie || split->decrease < p_.min_impurity_decrease) return node.id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (rows_[i][split->feature] > split->threshold ? right : left).push_back(i);
    auto& stored = tree_.nodes[static_cast<std::size_t>(node.id)];
    stored.feature = split->feature;
    stored.threshold = split->threshold;
    int l = grow(std::move(left), node.id, depth + 1);
    int r = grow(std::move(right), node.id, depth + 1);
    tree_.nodes[static_cast<std::size_t>(node.id)].left = l;
    tree_.nodes[static_cast<std::size_t>(node.id)].right = r;
    return node.id;
  }

 private:
  std::optional<Split> best_split(std::vector<std::size_t> idx, const TreeNode& node) const {
    std::optional<Split> best;
    const std::size_t n = idx.size();
    const std::size_t total_true = node.n_true;
    const std::size_t features = rows_[idx.front()].size();
    for (std::size_t f = 0; f < features; ++f) {
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rows_[a][f] < rows_[b][f]; });
      std::size_t left_true = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        if (labels_[idx[k]]) ++left_true;
        double lo = rows_[idx[k]][f], hi = rows_[idx[k + 1]][f];
        if (lo == hi) continue;
        std::size_t nl = k + 1, nr = n - nl;
        if (nl < p_.min_samples_leaf || nr < p_.min_samples_leaf) continue;
        std::size_t right_true = total_true - left_true;
        double weighted = (static_cast<double>(nl) * gini(nl - left_true, left_true) +
                           static_cast<double>(nr) * gini(nr - right_true, right_true)) /
                          static_cast<double>(n);
        double decrease = node.gini - weighted;
        double threshold = lo + (hi - lo) / 2;
        if (!best || decrease > best->decrease + kTie) best = Split{f, threshold, decrease};
      }
    }
    return best;
  }

  const std::vector<std::vector<double>>& rows_;
  const std::vector<bool>& labels_;
  const TreeParams& p_;
  Tree& tree_;
};

}  // namespace

Tree fit(const std::vector<std::vector<double>>& rows, const std::vector<bool>& labels, const TreeParams& params,
         std::vector<std::string> feature_names, std::vector<bool> boolean_features) {
  if (auto problems = validate_params(params); !problems.empty()) throw ValidationError(problems.front());
  if (rows.empty()) throw ValidationError("cannot fit a tree on an empty table");
  if (rows.size() != labels.size()) throw ValidationError("row and label counts differ");
  const std::size_t width = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != width) throw ValidationError("rows have different widths");
  Tree tree;
  tree.feature_names = std::move(feature_names);
  tree.boolean_features = std::move(boolean_features);
  if (tree.feature_names.empty())
    for (std::size_t f = 0; f < width; ++f) tree.feature_names.push_back("x" + std::to_string(f));
  tree.boolean_features.resize(width, false);
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  Builder(rows, labels, params, tree).grow(std::move(idx), -1, 0);
  return tree;
}

Tree fit(const PatternTransitionLog& log, const TreeParams& params) {
  std::vector<std::vector<double>> rows;
  std::vector<bool> labels;
  rows.reserve(log.rows.size());
  for (const auto& r : log.rows) {
    rows.push_back(r.values);
    labels.push_back(r.label);
  }
  std::vector<std::string> names;
  std::vector<bool> boolean;
  for (const auto& f : log.schema) {
    names.push_back(to_string(f));
    boolean.push_back(f.is_boolean());
  }
  return fit(rows, labels, params, std::move(names), std::move(boolean));
}

std::vector<int> Tree::leaves() const {
  std::vector<int> out;
  for (const auto& n : nodes)
    if (n.is_leaf()) out.push_back(n.id);
  return out;
}

std::vector<int> Tree::path_to(int id) const {
  std::vector<int> out;
  for (int cur = id; cur >= 0; cur = node(cur).parent) out.push_back(cur);
  std::reverse(out.begin(), out.end());
  return out;
}

bool Tree::predict(const std::vector<double>& row) const {
  if (row.size() != feature_names.size()) throw ValidationError("row width does not match the tree's features");
  const TreeNode* n = &root();
  while (!n->is_leaf()) n = &node(row[*n->feature] > n->threshold ? n->right : n->left);
  return n->prediction();
}

std::size_t Tree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

double training_accuracy(const Tree& tree, const std::vector<std::vector<double>>& rows,
                         const std::vector<bool>& labels) {
  if (rows.empty()) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) hits += tree.predict(rows[i]) == labels[i];
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

std::string describe_branch(const Tree& tree, const TreeNode& parent, bool right) {
  const auto f = *parent.feature;
  const auto& name = tree.feature_names[f];
  if (tree.boolean_features[f]) return name + (right ? " == true" : " == false");
  return name + (right ? " > " : " <= ") + format_number(parent.threshold);
}

namespace {

void text_node(const Tree& tree, int id, const std::string& indent, const std::string& label, std::string& out) {
  const auto& n = tree.node(id);
  out += indent + label + "[" + std::to_string(n.id) + "] ";
  if (n.is_leaf()) out += std::string("leaf ") + (n.prediction() ? "True" : "False") + " ";
  out += "gini=" + format_number(n.gini) + " samples=" + std::to_string(n.samples) + " counts=[" +
         std::to_string(n.n_false) + "," + std::to_string(n.n_true) + "]\n";
  if (n.is_leaf()) return;
  text_node(tree, n.left, indent + "  ", describe_branch(tree, n, false) + ": ", out);
  text_node(tree, n.right, indent + "  ", describe_branch(tree, n, true) + ": ", out);
}

}  // namespace

std::string to_text(const Tree& tree) {
  std::string out;
  text_node(tree, 0, "", "", out);
  return out;
}

nlohmann::ordered_json to_json(const Tree& tree) {
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : tree.nodes) {
    nlohmann::ordered_json j;
    j["id"] = n.id;
    if (n.is_leaf()) {
      j["leaf"] = true;
      j["class"] = n.prediction();
    } else {
      j["feature"] = tree.feature_names[*n.feature];
      j["threshold"] = n.threshold;
      j["left"] = n.left;
      j["right"] = n.right;
    }
    j["gini"] = n.gini;
    j["samples"] = n.samples;
    j["class_counts"] = {n.n_false, n.n_true};
    nodes.push_back(std::move(j));
  }
  return nodes;
}

}  // namespace dsync
