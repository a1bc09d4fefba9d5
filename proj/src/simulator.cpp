#include "ensel/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace ensel {
namespace {

// Lambdas are solved in descending order so each fit warm-starts from the
// sparser previous one; `order` maps solve position to caller position.
std::vector<std::size_t> descending_order(std::span<const double> lambdas) {
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });
  return order;
}

struct Moments {
  Eigen::VectorXd sum;
  Eigen::VectorXd sum_sq;
  Eigen::VectorXd hits;

  explicit Moments(Eigen::Index n)
      : sum(Eigen::VectorXd::Zero(n)), sum_sq(Eigen::VectorXd::Zero(n)), hits(Eigen::VectorXd::Zero(n)) {}

  void add(const Eigen::VectorXd& w) {
    sum += w;
    sum_sq += w.cwiseAbs2();
  }
};

void fill_signal_block(DatasetRecord& rec, const Moments& mom, const Eigen::VectorXd& truth,
                       int repeats) {
  const double r = repeats;
  const Eigen::VectorXd mean = mom.sum / r;
  const Eigen::VectorXd var =
      ((mom.sum_sq - r * mean.cwiseAbs2()) / (r - 1.0)).cwiseMax(0.0);
  const double n = static_cast<double>(truth.size());
  rec.selection_prob = mom.hits / r;
  rec.q = (mean.cwiseAbs2() - var / r).sum() / n;
  rec.m = mean.dot(truth) / n;
  rec.v = var.sum() / n;
}

void require_repeats(int repeats) {
  if (repeats < 2) throw std::invalid_argument("empirical estimates need at least 2 repeats");
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  std::uint64_t z = parent + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Dataset generate_dataset(int n, const ProblemConfig& config, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate_dataset: n must be at least 2");
  config.validate();
  const int m = static_cast<int>(std::lround(config.alpha * n));
  if (m < 1) throw std::invalid_argument("generate_dataset: alpha * n rounds to zero rows");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution is_signal(config.rho);

  Dataset data;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  data.design = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return scale * normal(rng); });
  data.truth = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (is_signal(rng)) data.truth[i] = normal(rng);
  }
  data.responses = data.design * data.truth;
  const double noise_sd = std::sqrt(config.delta);
  if (noise_sd > 0.0) {
    for (int mu = 0; mu < m; ++mu) data.responses[mu] += noise_sd * normal(rng);
  }
  return data;
}

Eigen::VectorXi bootstrap_counts(int m, double mu_b, std::uint64_t seed) {
  if (m < 1 || !(mu_b > 0.0)) throw std::invalid_argument("bootstrap_counts: need m >= 1, mu_b > 0");
  const long draws = std::lround(mu_b * m);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, m - 1);
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(m);
  for (long k = 0; k < draws; ++k) ++counts[pick(rng)];
  return counts;
}

Eigen::MatrixXd generate_knockoff(int m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  return Eigen::MatrixXd::NullaryExpr(m, n, [&] { return scale * normal(rng); });
}

std::vector<DatasetRecord> ss_empirical_path(const Dataset& data, std::span<const double> lambdas,
                                             double mu_b, int repeats, std::uint64_t seed,
                                             const LassoSettings& settings) {
  require_repeats(repeats);
  const Eigen::Index n = data.cols();
  const auto order = descending_order(lambdas);
  std::vector<Moments> moments(lambdas.size(), Moments(n));

  for (int r = 0; r < repeats; ++r) {
    const Eigen::VectorXd weights =
        bootstrap_counts(static_cast<int>(data.rows()), mu_b, derive_seed(seed, r)).cast<double>();
    const GramLasso<double> lasso(data.design, data.responses, weights);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (const std::size_t k : order) {
      w = lasso.solve(lambdas[k], settings, w);
      moments[k].add(w);
      moments[k].hits += (w.array() != 0.0).cast<double>().matrix();
    }
  }

  std::vector<DatasetRecord> out(lambdas.size());
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    out[k].lambda = lambdas[k];
    fill_signal_block(out[k], moments[k], data.truth, repeats);
  }
  return out;
}

DatasetRecord ss_empirical(const Dataset& data, double lambda, double mu_b, int repeats,
                           std::uint64_t seed, const LassoSettings& settings) {
  const double grid[] = {lambda};
  return ss_empirical_path(data, grid, mu_b, repeats, seed, settings).front();
}

std::vector<DatasetRecord> dko_empirical_path(const Dataset& data, std::span<const double> lambdas,
                                              double z_th, int repeats, std::uint64_t seed,
                                              const LassoSettings& settings) {
  require_repeats(repeats);
  const Eigen::Index m = data.rows();
  const Eigen::Index n = data.cols();
  const auto order = descending_order(lambdas);
  std::vector<Moments> real(lambdas.size(), Moments(n));
  std::vector<Moments> knock(lambdas.size(), Moments(n));

  Eigen::MatrixXd joint(m, 2 * n);
  joint.leftCols(n) = data.design;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  for (int r = 0; r < repeats; ++r) {
    joint.rightCols(n) =
        generate_knockoff(static_cast<int>(m), static_cast<int>(n), derive_seed(seed, r));
    const GramLasso<double> lasso(joint, data.responses, ones);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(2 * n);
    for (const std::size_t k : order) {
      w = lasso.solve(lambdas[k], settings, w);
      const Eigen::VectorXd w_real = w.head(n);
      const Eigen::VectorXd w_knock = w.tail(n);
      real[k].add(w_real);
      knock[k].add(w_knock);
      real[k].hits +=
          ((w_real.array().abs() - w_knock.array().abs()) > z_th).cast<double>().matrix();
    }
  }

  std::vector<DatasetRecord> out(lambdas.size());
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    out[k].lambda = lambdas[k];
    fill_signal_block(out[k], real[k], data.truth, repeats);
    out[k].v_knock = knock[k].sum_sq.sum() / (nn * repeats);
    out[k].knock_mean = knock[k].sum.sum() / (nn * repeats);
  }
  return out;
}

DatasetRecord dko_empirical(const Dataset& data, double lambda, double z_th, int repeats,
                            std::uint64_t seed, const LassoSettings& settings) {
  const double grid[] = {lambda};
  return dko_empirical_path(data, grid, z_th, repeats, seed, settings).front();
}

std::vector<DatasetRecord> lasso_empirical_path(const Dataset& data,
                                                std::span<const double> lambdas,
                                                const LassoSettings& settings) {
  const Eigen::Index n = data.cols();
  const auto order = descending_order(lambdas);
  const GramLasso<double> lasso(data.design, data.responses, Eigen::VectorXd::Ones(data.rows()));
  std::vector<DatasetRecord> out(lambdas.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (const std::size_t k : order) {
    w = lasso.solve(lambdas[k], settings, w);
    auto& rec = out[k];
    rec.lambda = lambdas[k];
    rec.selection_prob = (w.array() != 0.0).cast<double>().matrix();
    rec.q = w.squaredNorm() / static_cast<double>(n);
    rec.m = w.dot(data.truth) / static_cast<double>(n);
    rec.v = 0.0;
  }
  return out;
}

Rates empirical_tpr_fdr(const Eigen::VectorXd& selection_prob, const Eigen::VectorXd& truth,
                        double pi_th) {
  if (selection_prob.size() != truth.size()) {
    throw std::invalid_argument("empirical_tpr_fdr: length mismatch");
  }
  double signals = 0, true_pos = 0, selected = 0, false_pos = 0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const bool chosen = selection_prob[i] > pi_th;
    const bool signal = truth[i] != 0.0;
    signals += signal;
    selected += chosen;
    true_pos += chosen && signal;
    false_pos += chosen && !signal;
  }
  return {signals > 0 ? true_pos / signals : 0.0, selected > 0 ? false_pos / selected : 0.0};
}

Rates empirical_expected_tpr_fdr(const Eigen::VectorXd& selection_prob,
                                 const Eigen::VectorXd& truth) {
  if (selection_prob.size() != truth.size()) {
    throw std::invalid_argument("empirical_expected_tpr_fdr: length mismatch");
  }
  double signals = 0, signal_mass = 0, total_mass = 0, null_mass = 0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const bool signal = truth[i] != 0.0;
    signals += signal;
    total_mass += selection_prob[i];
    (signal ? signal_mass : null_mass) += selection_prob[i];
  }
  return {signals > 0 ? signal_mass / signals : 0.0, total_mass > 0 ? null_mass / total_mass : 0.0};
}

bool EmpiricalResult::has(const std::string& name) const {
  return std::any_of(statistics.begin(), statistics.end(),
                     [&](const auto& s) { return s.first == name; });
}

const Estimate& EmpiricalResult::at(const std::string& name) const {
  for (const auto& [key, value] : statistics) {
    if (key == name) return value;
  }
  throw std::out_of_range("EmpiricalResult: no statistic '" + name + "'");
}

std::vector<EmpiricalResult> run_experiment_path(int n, const ProblemConfig& config,
                                                 std::span<const double> lambdas,
                                                 Method algorithm, int repeats,
                                                 int data_realizations,
                                                 const SelectionThresholds& thresholds,
                                                 std::uint64_t master_seed,
                                                 const ExperimentOptions& options) {
  if (data_realizations < 8) throw std::invalid_argument("run_experiment: need at least 8 data realizations");
  if (lambdas.empty()) throw std::invalid_argument("run_experiment: empty lambda grid");
  for (const double lambda : lambdas) {
    ProblemConfig c = config;
    c.lambda = lambda;
    c.validate();
  }

  std::vector<std::string> names{"q", "m", "v"};
  const bool knockoff = algorithm == Method::kDko || algorithm == Method::kKo;
  if (knockoff) {
    names.push_back("v_knock");
    names.push_back("knock_mean");
  }
  names.push_back("tpr");
  names.push_back("fdr");

  // values[realization][lambda][statistic]
  std::vector<std::vector<std::vector<double>>> values(data_realizations);
  std::vector<Eigen::VectorXd> first_selection(lambdas.size());
  std::vector<std::uint64_t> data_seeds(data_realizations), draw_seeds(data_realizations);
  for (int k = 0; k < data_realizations; ++k) {
    data_seeds[k] = derive_seed(master_seed, 2 * static_cast<std::uint64_t>(k));
    draw_seeds[k] = derive_seed(master_seed, 2 * static_cast<std::uint64_t>(k) + 1);
  }

  const auto run_one = [&](int k) {
    const Dataset data = generate_dataset(n, config, data_seeds[k]);
    std::vector<DatasetRecord> records;
    switch (algorithm) {
      case Method::kSs:
        records = ss_empirical_path(data, lambdas, config.mu_b, repeats, draw_seeds[k], options.lasso);
        break;
      case Method::kDko:
      case Method::kKo:
        records = dko_empirical_path(data, lambdas, thresholds.z_th, repeats, draw_seeds[k],
                                     options.lasso);
        break;
      case Method::kLasso: records = lasso_empirical_path(data, lambdas, options.lasso); break;
    }
    auto& row = values[k];
    row.resize(lambdas.size());
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      const auto& rec = records[j];
      Rates rates;
      if (algorithm == Method::kKo) {
        rates = empirical_expected_tpr_fdr(rec.selection_prob, data.truth);
      } else if (algorithm == Method::kLasso) {
        rates = empirical_tpr_fdr(rec.selection_prob, data.truth, 0.5);
      } else {
        rates = empirical_tpr_fdr(rec.selection_prob, data.truth, thresholds.pi_th);
      }
      row[j] = {rec.q, rec.m, rec.v};
      if (knockoff) {
        row[j].push_back(rec.v_knock);
        row[j].push_back(rec.knock_mean);
      }
      row[j].push_back(rates.tpr);
      row[j].push_back(rates.fdr);
      if (k == 0) first_selection[j] = rec.selection_prob;
    }
  };

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  int failed_at = -1;
  const auto worker = [&] {
    for (int k = next++; k < data_realizations; k = next++) {
      try {
        run_one(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error || k < failed_at) {
          error = std::current_exception();
          failed_at = k;
        }
      }
    }
  };
  const int workers = std::clamp(options.workers, 1, data_realizations);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const std::exception& e) {
      throw SimulationError("realization " + std::to_string(failed_at) + ": " + e.what(), failed_at);
    }
  }

  std::vector<EmpiricalResult> out(lambdas.size());
  const double count = data_realizations;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    auto& res = out[j];
    res.algorithm = algorithm;
    res.config = config;
    res.config.lambda = lambdas[j];
    res.thresholds = thresholds;
    res.n = n;
    res.m = static_cast<int>(std::lround(config.alpha * n));
    res.repeats = algorithm == Method::kLasso ? 1 : repeats;
    res.data_realizations = data_realizations;
    res.master_seed = master_seed;
    res.data_seeds = data_seeds;
    res.draw_seeds = draw_seeds;
    res.selection_prob = first_selection[j];
    for (std::size_t s = 0; s < names.size(); ++s) {
      double sum = 0.0;
      for (int k = 0; k < data_realizations; ++k) sum += values[k][j][s];
      const double mean = sum / count;
      double ss = 0.0;
      for (int k = 0; k < data_realizations; ++k) ss += (values[k][j][s] - mean) * (values[k][j][s] - mean);
      const double se = std::sqrt(ss / (count - 1.0) / count);
      res.statistics.emplace_back(names[s], Estimate{mean, se});
    }
  }
  return out;
}

EmpiricalResult run_experiment(int n, const ProblemConfig& config, Method algorithm, int repeats,
                               int data_realizations, const SelectionThresholds& thresholds,
                               std::uint64_t master_seed, const ExperimentOptions& options) {
  const double grid[] = {config.lambda};
  return run_experiment_path(n, config, grid, algorithm, repeats, data_realizations, thresholds,
                             master_seed, options)
      .front();
}

}  // namespace ensel
