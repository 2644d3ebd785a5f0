#include "dminer/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "dminer/error.hpp"

namespace dminer {

namespace {

constexpr std::size_t kFullGramLimit = 4000;
constexpr double kTau = 1e-12;

}  // namespace

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::tool_default: return "tool_default";
    case Provenance::pso: return "pso";
    case Provenance::random_search: return "random_search";
    case Provenance::fixture: return "fixture";
  }
  return "unknown";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "tool_default") return Provenance::tool_default;
  if (s == "pso") return Provenance::pso;
  if (s == "random_search") return Provenance::random_search;
  if (s == "fixture") return Provenance::fixture;
  throw ConfigError("provenance", fmt::format("unknown value '{}'", s));
}

double HPSetting::cost() const { return std::exp2(log2_cost); }
double HPSetting::gamma() const { return std::exp2(log2_gamma); }

bool HPSpace::contains(const HPSetting& hp) const {
  return cost.contains(hp.log2_cost) && gamma.contains(hp.log2_gamma);
}

void HPSpace::validate() const {
  if (!(cost.lower < cost.upper)) throw ConfigError("space.cost", "lower bound must be below upper bound");
  if (!(gamma.lower < gamma.upper)) throw ConfigError("space.gamma", "lower bound must be below upper bound");
}

void validate(const HPSetting& hp, const HPSpace& space) {
  if (!std::isfinite(hp.log2_cost) || !space.cost.contains(hp.log2_cost))
    throw ConfigError("log2_cost", fmt::format("{} outside [{}, {}]", hp.log2_cost, space.cost.lower,
                                               space.cost.upper));
  if (!std::isfinite(hp.log2_gamma) || !space.gamma.contains(hp.log2_gamma))
    throw ConfigError("log2_gamma", fmt::format("{} outside [{}, {}]", hp.log2_gamma, space.gamma.lower,
                                                space.gamma.upper));
}

double squared_distance(std::span<const double> x, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - z[i];
    s += d * d;
  }
  return s;
}

double rbf_kernel(std::span<const double> x, std::span<const double> z, double log2_gamma) {
  if (x.size() != z.size())
    throw DataError(fmt::format("rbf_kernel: dimension mismatch ({} vs {})", x.size(), z.size()));
  return std::exp(-std::exp2(log2_gamma) * squared_distance(x, z));
}

double BinarySvmModel::decision_value(std::span<const double> x) const {
  const double gamma = std::exp2(log2_gamma);
  double f = bias;
  for (std::size_t s = 0; s < dual_coefficients.size(); ++s)
    f += dual_coefficients[s] * std::exp(-gamma * squared_distance(support_vectors.row(s), x));
  return f;
}

SmoSolution solve_smo(std::span<const int> signs, double cost, const KernelRowFn& kernel_row,
                      const SmoOptions& options) {
  const std::size_t n = signs.size();
  bool has_pos = false;
  bool has_neg = false;
  for (int y : signs) {
    if (y == 1) has_pos = true;
    else if (y == -1) has_neg = true;
    else throw DataError(fmt::format("solve_smo: label {} is not +1/-1", y));
  }
  if (!has_pos || !has_neg) throw DataError("solve_smo: both labels must be present");
  if (!(options.tol > 0.0)) throw ConfigError("tol", "must be positive");
  if (!(cost > 0.0) || !std::isfinite(cost)) throw ConfigError("cost", "must be positive and finite");

  const std::size_t max_iter =
      options.max_iterations ? options.max_iterations : std::min<std::size_t>(10000, std::max<std::size_t>(1000, 10 * n));

  // Kernel access: full Gram when it fits, otherwise rows on demand.
  std::vector<double> gram;
  std::vector<double> row_i(n), row_j(n);
  const bool full = n <= kFullGramLimit;
  if (full) {
    gram.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) kernel_row(i, std::span<double>(gram.data() + i * n, n));
  }
  auto row = [&](std::size_t i, std::vector<double>& buffer) -> const double* {
    if (full) return gram.data() + i * n;
    kernel_row(i, buffer);
    return buffer.data();
  };

  SmoSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);  // G = Q alpha - e
  auto& alpha = sol.alpha;

  auto in_up = [&](std::size_t t) { return signs[t] == 1 ? alpha[t] < cost : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return signs[t] == 1 ? alpha[t] > 0.0 : alpha[t] < cost; };
  auto dual_objective = [&] {
    double s = 0.0;
    for (std::size_t t = 0; t < n; ++t) s += alpha[t] * (grad[t] - 1.0);
    return -0.5 * s;
  };

  sol.converged = false;
  std::size_t iter = 0;
  for (;; ++iter) {
    // Maximal violating pair: first choice maximizes -y G over I_up, the
    // second minimizes it over I_low (largest error gap to the first).
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -signs[t] * grad[t];
      if (in_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(t) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    if (i == n || j == n || g_max - g_min < options.tol) {
      sol.converged = true;
      break;
    }
    if (iter >= max_iter) break;

    const double* k_i = row(i, row_i);
    const double* k_j = row(j, row_j);
    const double yi = signs[i];
    const double yj = signs[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];

    if (signs[i] != signs[j]) {
      double quad = k_i[i] + k_j[j] + 2.0 * k_i[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > cost) {
          alpha[i] = cost;
          alpha[j] = cost - diff;
        }
      } else if (alpha[j] > cost) {
        alpha[j] = cost;
        alpha[i] = cost + diff;
      }
    } else {
      double quad = k_i[i] + k_j[j] - 2.0 * k_i[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > cost) {
        if (alpha[i] > cost) {
          alpha[i] = cost;
          alpha[j] = sum - cost;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > cost) {
        if (alpha[j] > cost) {
          alpha[j] = cost;
          alpha[i] = sum - cost;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double d_ai = alpha[i] - old_ai;
    const double d_aj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += signs[t] * (yi * k_i[t] * d_ai + yj * k_j[t] * d_aj);

    if (options.record_objective) sol.objective_trace.push_back(dual_objective());
  }
  sol.iterations = iter;

  // Offset: mean of y G over free vectors, else midpoint of the feasible range.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = signs[t] * grad[t];
    if (alpha[t] >= cost) {
      if (signs[t] == -1) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0.0) {
      if (signs[t] == 1) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      ++n_free;
      free_sum += yg;
    }
  }
  const double rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : 0.5 * (upper + lower);
  sol.bias = -rho;
  return sol;
}

BinarySvmModel train_binary_smo(const Matrix& features, std::span<const int> signs, const HPSetting& hp,
                                const SmoOptions& options) {
  if (features.rows() != signs.size())
    throw DataError(fmt::format("train_binary_smo: {} rows but {} labels", features.rows(), signs.size()));
  const double gamma = hp.gamma();
  const std::size_t n = features.rows();
  auto kernel_row = [&](std::size_t i, std::span<double> out) {
    auto xi = features.row(i);
    for (std::size_t t = 0; t < n; ++t) out[t] = std::exp(-gamma * squared_distance(xi, features.row(t)));
  };
  const auto sol = solve_smo(signs, hp.cost(), kernel_row, options);

  BinarySvmModel model;
  model.log2_gamma = hp.log2_gamma;
  model.cost = hp.cost();
  model.bias = sol.bias;
  model.converged = sol.converged;
  model.iterations = sol.iterations;
  model.objective_trace = sol.objective_trace;
  std::vector<std::size_t> sv;
  for (std::size_t t = 0; t < n; ++t)
    if (sol.alpha[t] > 0.0) sv.push_back(t);
  model.support_vectors = features.select_rows(sv);
  for (std::size_t t : sv) model.dual_coefficients.push_back(sol.alpha[t] * signs[t]);
  return model;
}

bool OvoSvmModel::converged() const {
  return std::all_of(binaries.begin(), binaries.end(), [](const auto& b) { return b.converged; });
}

DistanceCache::DistanceCache(const Matrix& features) : n_(features.rows()), d_(n_ * n_, 0.0) {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double d = squared_distance(features.row(i), features.row(j));
      d_[i * n_ + j] = d;
      d_[j * n_ + i] = d;
    }
}

OvoSvmModel train_ovo(const Matrix& features, std::span<const int> labels, std::size_t n_classes,
                      const HPSetting& hp, std::span<const std::size_t> subset, const DistanceCache* distances,
                      const SmoOptions& options) {
  if (n_classes < 2) throw DataError("train_ovo: need at least 2 classes");
  std::vector<std::size_t> all;
  if (subset.empty()) {
    all.resize(features.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    subset = all;
  }
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t idx : subset) by_class[static_cast<std::size_t>(labels[idx])].push_back(idx);

  const double gamma = hp.gamma();
  OvoSvmModel model;
  model.n_classes = n_classes;
  model.n_features = features.cols();
  for (std::size_t a = 0; a < n_classes; ++a) {
    for (std::size_t b = a + 1; b < n_classes; ++b) {
      std::vector<std::size_t> rows = by_class[a];
      rows.insert(rows.end(), by_class[b].begin(), by_class[b].end());
      std::vector<int> signs(rows.size());
      for (std::size_t t = 0; t < rows.size(); ++t) signs[t] = t < by_class[a].size() ? 1 : -1;

      KernelRowFn kernel_row;
      if (distances) {
        kernel_row = [&](std::size_t i, std::span<double> out) {
          for (std::size_t t = 0; t < rows.size(); ++t) out[t] = std::exp(-gamma * (*distances)(rows[i], rows[t]));
        };
      } else {
        kernel_row = [&](std::size_t i, std::span<double> out) {
          auto xi = features.row(rows[i]);
          for (std::size_t t = 0; t < rows.size(); ++t)
            out[t] = std::exp(-gamma * squared_distance(xi, features.row(rows[t])));
        };
      }

      SmoSolution sol;
      try {
        sol = solve_smo(signs, hp.cost(), kernel_row, options);
      } catch (const Error& e) {
        throw DataError(fmt::format("class pair ({}, {}): {}", a, b, e.what()));
      }

      BinarySvmModel bin;
      bin.label_pair = {static_cast<int>(a), static_cast<int>(b)};
      bin.log2_gamma = hp.log2_gamma;
      bin.cost = hp.cost();
      bin.bias = sol.bias;
      bin.converged = sol.converged;
      bin.iterations = sol.iterations;
      bin.objective_trace = std::move(sol.objective_trace);
      std::vector<std::size_t> sv;
      for (std::size_t t = 0; t < rows.size(); ++t)
        if (sol.alpha[t] > 0.0) {
          sv.push_back(rows[t]);
          bin.dual_coefficients.push_back(sol.alpha[t] * signs[t]);
        }
      bin.support_vectors = features.select_rows(sv);
      model.binaries.push_back(std::move(bin));
    }
  }
  return model;
}

OvoSvmModel train_ovo(const DataTable& table, const HPSetting& hp, const SmoOptions& options) {
  return train_ovo(table.features, table.labels, table.n_classes(), hp, {}, nullptr, options);
}

int predict_one(const OvoSvmModel& model, std::span<const double> x) {
  if (x.size() != model.n_features)
    throw DataError(fmt::format("predict: dimension mismatch ({} vs {})", x.size(), model.n_features));
  std::vector<int> votes(model.n_classes, 0);
  for (const auto& bin : model.binaries) {
    if (bin.decision_value(x) > 0.0) ++votes[static_cast<std::size_t>(bin.label_pair.first)];
    else ++votes[static_cast<std::size_t>(bin.label_pair.second)];
  }
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::vector<int> predict(const OvoSvmModel& model, const Matrix& features) {
  if (features.cols() != model.n_features)
    throw DataError(fmt::format("predict: dimension mismatch ({} vs {})", features.cols(), model.n_features));
  std::vector<int> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out[i] = predict_one(model, features.row(i));
  return out;
}

std::string to_json(const BinarySvmModel& model) {
  nlohmann::ordered_json j;
  j["label_pair"] = {model.label_pair.first, model.label_pair.second};
  j["bias"] = model.bias;
  j["log2_gamma"] = model.log2_gamma;
  j["dual_coefficients"] = model.dual_coefficients;
  auto svs = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < model.support_vectors.rows(); ++s) {
    auto r = model.support_vectors.row(s);
    svs.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["support_vectors"] = std::move(svs);
  return j.dump();
}

}  // namespace dminer
