#include "dminer/meta.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "dminer/error.hpp"

namespace dminer {

namespace {

constexpr double kAbsent = -1.0;
constexpr double kGiniEps = 1e-12;

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

const std::vector<std::string>& MetaFeatureVector::names() {
  static const std::vector<std::string> kNames = {
      "nr_inst",      "nr_attr",    "nr_class",   "nr_num",          "nr_cat",       "nr_bin",
      "attr_to_inst", "inst_to_attr", "cat_to_num", "num_to_cat", "freq_class_mean", "freq_class_sd"};
  return kNames;
}

std::vector<std::optional<double>> MetaFeatureVector::optional_values() const {
  return {nr_inst, nr_attr, nr_class, nr_num, nr_cat, nr_bin, attr_to_inst, inst_to_attr, cat_to_num, num_to_cat,
          freq_class_mean, freq_class_sd};
}

std::vector<double> MetaFeatureVector::values() const {
  std::vector<double> out;
  for (const auto& v : optional_values()) out.push_back(v.value_or(kAbsent));
  return out;
}

MetaFeatureVector MetaFeatureVector::from_values(const std::vector<std::optional<double>>& v) {
  if (v.size() != names().size())
    throw DataError(fmt::format("meta-features: expected {} values, got {}", names().size(), v.size()));
  auto req = [&](std::size_t i) {
    if (!v[i]) throw DataError(fmt::format("meta-feature '{}' must be present", names()[i]));
    return *v[i];
  };
  MetaFeatureVector m;
  m.nr_inst = req(0);
  m.nr_attr = req(1);
  m.nr_class = req(2);
  m.nr_num = req(3);
  m.nr_cat = req(4);
  m.nr_bin = req(5);
  m.attr_to_inst = v[6];
  m.inst_to_attr = v[7];
  m.cat_to_num = v[8];
  m.num_to_cat = v[9];
  m.freq_class_mean = req(10);
  m.freq_class_sd = req(11);
  return m;
}

MetaFeatureVector extract_metafeatures(const RawDataset& raw) {
  validate(raw);
  MetaFeatureVector m;
  m.nr_inst = static_cast<double>(raw.n_rows());
  for (std::size_t c = 0; c < raw.columns.size(); ++c) {
    if (c == raw.target_column) continue;
    const auto& col = raw.columns[c];
    m.nr_attr += 1;
    if (col.kind == ColumnKind::numeric) m.nr_num += 1;
    else m.nr_cat += 1;
    std::set<std::string> distinct;
    for (const auto& cell : col.cells)
      if (cell) distinct.insert(*cell);
    if (distinct.size() == 2) m.nr_bin += 1;
  }
  auto ratio = [](double a, double b) -> std::optional<double> {
    if (b == 0.0) return std::nullopt;
    return a / b;
  };
  m.attr_to_inst = ratio(m.nr_attr, m.nr_inst);
  m.inst_to_attr = ratio(m.nr_inst, m.nr_attr);
  m.cat_to_num = ratio(m.nr_cat, m.nr_num);
  m.num_to_cat = ratio(m.nr_num, m.nr_cat);

  const auto counts = raw.class_counts();
  m.nr_class = static_cast<double>(counts.size());
  std::vector<double> freq;
  for (const auto& [label, count] : counts) freq.push_back(static_cast<double>(count) / m.nr_inst);
  m.freq_class_mean = 1.0 / m.nr_class;
  double ss = 0.0;
  for (double f : freq) ss += (f - m.freq_class_mean) * (f - m.freq_class_mean);
  m.freq_class_sd = freq.size() > 1 ? std::sqrt(ss / static_cast<double>(freq.size() - 1)) : 0.0;
  return m;
}

const char* to_string(MetaLabel label) { return label == MetaLabel::rs ? "rs" : "default_opt"; }

MetaLabel meta_label_from_string(const std::string& s) {
  if (s == "rs" || s == "RS" || s == "random.search") return MetaLabel::rs;
  if (s == "default_opt" || s == "default.opt") return MetaLabel::default_opt;
  throw DataError(fmt::format("unknown meta label '{}'", s));
}

std::vector<TuneComparison> tune_comparisons(const StrategyTable& table, Pairing pairing) {
  const std::size_t rs = table.strategy_index(strategy::random_search);
  const std::size_t opt = table.strategy_index(strategy::default_opt);
  std::vector<std::string> datasets;
  for (const auto& row : table.rows)
    if (std::find(datasets.begin(), datasets.end(), row.dataset) == datasets.end()) datasets.push_back(row.dataset);

  std::vector<TuneComparison> out;
  for (const auto& name : datasets) {
    TuneComparison c;
    c.dataset = name;
    std::size_t n = 0;
    for (const auto& row : table.rows) {
      if (row.dataset != name) continue;
      c.rs_bac += row.cells[rs].bac;
      c.opt_bac += row.cells[opt].bac;
      ++n;
    }
    c.rs_bac /= static_cast<double>(n);
    c.opt_bac /= static_cast<double>(n);
    const auto [a, b] = paired_observations(table, name, rs, opt, pairing);
    c.p_value = a.empty() ? 1.0 : wilcoxon_signed_rank(a, b).p_value;
    out.push_back(c);
  }
  return out;
}

MetaLabel label_for(const TuneComparison& c, double alpha) {
  return c.rs_bac > c.opt_bac && c.p_value < alpha ? MetaLabel::rs : MetaLabel::default_opt;
}

LabeledMetaData label_meta_examples(const std::vector<std::pair<std::string, MetaFeatureVector>>& metafeatures,
                                    const std::vector<TuneComparison>& comparisons, double alpha) {
  LabeledMetaData out;
  for (const auto& [name, features] : metafeatures) {
    auto it = std::find_if(comparisons.begin(), comparisons.end(),
                           [&](const TuneComparison& c) { return c.dataset == name; });
    if (it == comparisons.end()) {
      out.excluded.push_back(name);
      continue;
    }
    out.examples.push_back({name, features, label_for(*it, alpha)});
  }
  return out;
}

double gini(std::span<const double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (double v : w) s += (v / total) * (v / total);
  return 1.0 - s;
}

std::vector<double> inverse_frequency_weights(std::span<const int> y, std::size_t n_classes) {
  std::vector<double> counts(n_classes, 0.0);
  for (int label : y) counts[static_cast<std::size_t>(label)] += 1.0;
  std::vector<double> w(n_classes, 0.0);
  for (std::size_t c = 0; c < n_classes; ++c)
    if (counts[c] > 0.0) w[c] = static_cast<double>(y.size()) / (static_cast<double>(n_classes) * counts[c]);
  return w;
}

std::optional<Split> best_split(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                                std::span<const double> class_weights, std::size_t min_leaf) {
  const std::size_t n = rows.size();
  const std::size_t n_classes = class_weights.size();
  std::vector<double> total(n_classes, 0.0);
  for (std::size_t r : rows) total[static_cast<std::size_t>(y[r])] += class_weights[static_cast<std::size_t>(y[r])];
  const double w_total = std::accumulate(total.begin(), total.end(), 0.0);

  std::optional<Split> best;
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::vector<double> left(n_classes), right(n_classes);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    std::fill(left.begin(), left.end(), 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto cls = static_cast<std::size_t>(y[order[i]]);
      left[cls] += class_weights[cls];
      const double lo = x(order[i], f);
      const double hi = x(order[i + 1], f);
      if (!(lo < hi)) continue;
      if (i + 1 < min_leaf || n - (i + 1) < min_leaf) continue;
      for (std::size_t c = 0; c < n_classes; ++c) right[c] = total[c] - left[c];
      const double w_left = std::accumulate(left.begin(), left.end(), 0.0);
      const double w_right = w_total - w_left;
      const double impurity = w_total > 0.0 ? (w_left * gini(left) + w_right * gini(right)) / w_total : 0.0;
      if (!best || impurity < best->impurity - kGiniEps) {
        double t = 0.5 * (lo + hi);
        if (!(t > lo)) t = hi;
        best = Split{f, t, impurity};
      }
    }
  }
  return best;
}

int TreeModel::predict(std::span<const double> x) const {
  std::size_t node = 0;
  while (!nodes[node].leaf) {
    const auto& n = nodes[node];
    node = static_cast<std::size_t>(x[n.feature] < n.threshold ? n.left : n.right);
  }
  return nodes[node].prediction;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

TreeModel train_tree(const Matrix& x, std::span<const int> y, std::vector<std::string> feature_names,
                     std::vector<std::string> class_names, const TreeConfig& config) {
  if (x.rows() != y.size()) throw DataError("train_tree: feature rows and labels differ in length");
  if (x.rows() < 1) throw DataError("train_tree: no examples");
  const std::size_t n_classes = class_names.size();
  if (n_classes < 2) throw DataError("train_tree: need at least 2 class names");
  for (int label : y)
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes)
      throw DataError(fmt::format("train_tree: label {} out of range", label));
  if (config.min_leaf < 1) throw ConfigError("min_leaf", "must be at least 1");

  TreeModel tree;
  tree.feature_names = std::move(feature_names);
  tree.class_names = std::move(class_names);
  if (config.class_weights.empty()) {
    tree.class_weights = inverse_frequency_weights(y, n_classes);
  } else {
    if (config.class_weights.size() != n_classes)
      throw ConfigError("class_weights", fmt::format("expected {} weights", n_classes));
    tree.class_weights = config.class_weights;
  }

  std::function<int(std::vector<std::size_t>, std::size_t)> grow = [&](std::vector<std::size_t> rows,
                                                                      std::size_t depth) -> int {
    TreeNode node;
    node.depth = depth;
    node.counts.assign(n_classes, 0);
    std::vector<double> weighted(n_classes, 0.0);
    for (std::size_t r : rows) {
      const auto c = static_cast<std::size_t>(y[r]);
      ++node.counts[c];
      weighted[c] += tree.class_weights[c];
    }
    node.impurity = gini(weighted);
    node.prediction = static_cast<int>(argmax_lowest(weighted));
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(node);

    if (depth >= config.max_depth || node.impurity <= kGiniEps || rows.size() < 2 * config.min_leaf) return id;
    const auto split = best_split(x, y, rows, tree.class_weights, config.min_leaf);
    if (!split || !(split->impurity < node.impurity - kGiniEps)) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (x(r, split->feature) < split->threshold ? left : right).push_back(r);
    const int l = grow(std::move(left), depth + 1);
    const int rgt = grow(std::move(right), depth + 1);
    auto& self = tree.nodes[static_cast<std::size_t>(id)];
    self.leaf = false;
    self.feature = split->feature;
    self.threshold = split->threshold;
    self.left = l;
    self.right = rgt;
    return id;
  };

  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  grow(std::move(all), 0);
  return tree;
}

std::pair<Matrix, std::vector<int>> meta_matrix(const std::vector<MetaExample>& examples) {
  const std::size_t p = MetaFeatureVector::names().size();
  Matrix x(examples.size(), p);
  std::vector<int> y;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto v = examples[i].features.values();
    for (std::size_t j = 0; j < p; ++j) x(i, j) = v[j];
    y.push_back(static_cast<int>(examples[i].label));
  }
  return {std::move(x), std::move(y)};
}

TreeModel train_tree(const std::vector<MetaExample>& examples, const TreeConfig& config) {
  if (examples.size() < 2) throw DataError("train_tree: need at least 2 meta-examples");
  auto [x, y] = meta_matrix(examples);
  return train_tree(x, y, MetaFeatureVector::names(), {"default.opt", "RS"}, config);
}

LooResult loo_cv(const Matrix& x, std::span<const int> y, std::size_t n_classes, const TreeConfig& config) {
  const std::size_t n = x.rows();
  if (n < 2) throw DataError("loo_cv: need at least 2 examples");
  std::vector<std::string> classes(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) classes[c] = fmt::format("class{}", c);
  std::vector<std::string> features(x.cols());

  LooResult out{ConfusionMatrix(n_classes), 0.0, ConfusionMatrix(n_classes), 0.0};
  std::vector<double> overall(n_classes, 0.0);
  for (int label : y) overall[static_cast<std::size_t>(label)] += 1.0;
  const int majority = static_cast<int>(argmax_lowest(overall));

  for (std::size_t hold = 0; hold < n; ++hold) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i)
      if (i != hold) keep.push_back(i);
    const Matrix train_x = x.select_rows(keep);
    std::vector<int> train_y;
    for (std::size_t i : keep) train_y.push_back(y[i]);
    const auto tree = train_tree(train_x, train_y, features, classes, config);
    out.confusion.add(y[hold], tree.predict(x.row(hold)));
    out.baseline_confusion.add(y[hold], majority);
  }
  out.bac = balanced_accuracy(out.confusion);
  out.baseline_bac = balanced_accuracy(out.baseline_confusion);
  return out;
}

LooResult loo_cv(const std::vector<MetaExample>& examples, const TreeConfig& config) {
  auto [x, y] = meta_matrix(examples);
  return loo_cv(x, y, 2, config);
}

bool Rule::matches(std::span<const double> x) const {
  return std::all_of(conditions.begin(), conditions.end(), [&](const RuleCondition& c) { return c.holds(x); });
}

std::vector<Rule> extract_rules(const TreeModel& tree) {
  std::vector<Rule> out;
  std::vector<RuleCondition> path;
  std::function<void(std::size_t)> walk = [&](std::size_t id) {
    const auto& node = tree.nodes[id];
    if (node.leaf) {
      out.push_back({path, node.counts, node.prediction});
      return;
    }
    path.push_back({node.feature, true, node.threshold});
    walk(static_cast<std::size_t>(node.left));
    path.back().less = false;
    walk(static_cast<std::size_t>(node.right));
    path.pop_back();
  };
  if (!tree.nodes.empty()) walk(0);
  return out;
}

std::string format_rules(const TreeModel& tree, const std::vector<Rule>& rules) {
  auto indent = [](std::size_t depth) { return std::string(depth == 0 ? 0 : 2 + 4 * (depth - 1), ' '); };
  std::string classes;
  for (std::size_t c = 0; c < tree.class_names.size(); ++c) classes += (c ? "/" : "") + tree.class_names[c];

  std::string out;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    if (r) out += '\n';
    const auto& rule = rules[r];
    for (std::size_t d = 0; d < rule.conditions.size(); ++d) {
      const auto& c = rule.conditions[d];
      out += fmt::format("{}{} {} {:.6g}\n", indent(d), tree.feature_names.at(c.feature), c.less ? "<" : ">=",
                         c.threshold);
    }
    std::string counts;
    for (std::size_t c = 0; c < rule.counts.size(); ++c) counts += (c ? "/" : "") + std::to_string(rule.counts[c]);
    out += fmt::format("{}[{}] ({})\n", indent(rule.conditions.size()), counts, classes);
  }
  return out;
}

namespace {

nlohmann::ordered_json node_json(const TreeModel& tree, std::size_t id) {
  const auto& node = tree.nodes[id];
  nlohmann::ordered_json j;
  j["counts"] = node.counts;
  j["impurity"] = node.impurity;
  if (node.leaf) {
    j["prediction"] = tree.class_names.at(static_cast<std::size_t>(node.prediction));
  } else {
    j["feature"] = tree.feature_names.at(node.feature);
    j["threshold"] = node.threshold;
    j["left"] = node_json(tree, static_cast<std::size_t>(node.left));
    j["right"] = node_json(tree, static_cast<std::size_t>(node.right));
  }
  return j;
}

}  // namespace

std::string to_json(const TreeModel& tree) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["feature_names"] = tree.feature_names;
  j["class_names"] = tree.class_names;
  j["class_weights"] = tree.class_weights;
  j["root"] = tree.nodes.empty() ? nlohmann::ordered_json() : node_json(tree, 0);
  return j.dump(2);
}

}  // namespace dminer
