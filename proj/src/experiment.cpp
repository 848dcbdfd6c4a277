#include "robustcalib/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "robustcalib/error.hpp"
#include "robustcalib/io.hpp"
#include "robustcalib/numeric.hpp"
#include "robustcalib/risk.hpp"

namespace robustcalib {

namespace {

constexpr std::uint64_t kInitStream = 0x9e3779b97f4a7c15ULL;

Datasetd draw(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> noise(0.0, 1.0);
  Datasetd d;
  d.features.resize(n, 2);
  d.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const double y = i % 2 == 0 ? 1.0 : -1.0;
    d.labels[i] = y;
    d.features(i, 0) = 2.0 * y + noise(rng);
    d.features(i, 1) = 2.0 * y + noise(rng);
  }
  return d;
}

double max_row_norm(const Eigen::MatrixXd& m) {
  return m.rows() == 0 ? 0.0 : m.rowwise().norm().maxCoeff();
}

// Divides by a hair more than `s` so that no row norm rounds above 1.
double safe_divisor(double s) {
  return std::nextafter(std::nextafter(s, HUGE_VAL), HUGE_VAL);
}

}  // namespace

TwonormSplit gen_twonorm(int n_train, int n_test, std::uint64_t seed) {
  if (n_train < 1 || n_test < 1) throw PreconditionError("twonorm needs at least one point per split");
  std::mt19937_64 rng(seed);
  TwonormSplit s;
  s.train = draw(rng, n_train);
  s.test = draw(rng, n_test);
  s.scale = std::max(max_row_norm(s.train.features), max_row_norm(s.test.features));
  const double div = safe_divisor(s.scale);
  s.train.features /= div;
  s.test.features /= div;
  return s;
}

void validate(const TrainConfig& c) {
  RobustTarget{c.gamma};
  if (!std::isfinite(c.loss.shift)) throw DomainError("beta must be finite");
  if (!(c.lr > 0.0) || !std::isfinite(c.lr)) throw PreconditionError("learning rate must be positive");
  if (c.steps < 1) throw PreconditionError("steps must be at least 1");
}

LinearModeld initial_model(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ kInitStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim + 1);
  do {
    for (Eigen::Index i = 0; i <= dim; ++i) v[i] = normal(rng);
  } while (v.head(dim).norm() == 0.0);
  v.normalize();
  return {v.head(dim), v[dim]};
}

Eigen::VectorXd surrogate_gradient(const LossSpec& loss, const LinearModeld& model,
                                   const Datasetd& data) {
  if (data.size() == 0) throw DomainError("empty dataset");
  const Eigen::VectorXd m = model.margins(data);
  Eigen::VectorXd coef(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i)
    coef[i] = one_sided_derivatives(loss, m[i]).mean() * data.labels[i];
  const double n = static_cast<double>(data.size());
  Eigen::VectorXd g(data.dim() + 1);
  g << data.features.transpose() * coef / n, coef.sum() / n;
  return g;
}

Trajectory train(const TrainConfig& config, const Datasetd& train_data, const Datasetd& test_data) {
  validate(config);
  if (train_data.size() == 0 || test_data.size() == 0) throw DomainError("empty dataset");
  if (train_data.dim() != test_data.dim()) throw DomainError("train and test dimensions differ");

  Trajectory traj;
  traj.config = config;
  traj.records.reserve(config.steps + 1);
  LinearModeld model = initial_model(train_data.dim(), config.seed);
  const LossSpec& loss = config.loss;
  const Eigen::Index d = train_data.dim();

  const auto log = [&] {
    Eigen::VectorXd p(d + 1);
    p << model.weights, model.bias;
    traj.parameters.push_back(std::move(p));
    traj.records.push_back({surrogate_risk(loss, model, train_data),
                            surrogate_risk(loss, model, test_data),
                            robust_risk(model, test_data, config.gamma),
                            zero_one_risk(model, test_data)});
  };
  log();
  for (int t = 0; t < config.steps; ++t) {
    const Eigen::VectorXd g = surrogate_gradient(loss, model, train_data);
    model.weights -= config.lr * g.head(d);
    model.bias -= config.lr * g[d];
    const double norm = model.augmented_norm();
    if (norm > 0.0) {
      model.weights /= norm;
      model.bias /= norm;
    }
    log();
  }
  traj.final_model = model;
  return traj;
}

ExcessProxies excess_proxies(const Trajectory& traj) {
  if (traj.records.empty()) throw DomainError("empty trajectory");
  const Eigen::Index n = static_cast<Eigen::Index>(traj.records.size());
  ExcessProxies p{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    p.surrogate[i] = traj.records[i].test_surrogate;
    p.target[i] = traj.records[i].test_robust;
  }
  p.surrogate.array() -= p.surrogate.minCoeff();
  p.target.array() -= p.target.minCoeff();
  return p;
}

LoadedDataset parse_dataset_csv(const std::string& text) {
  std::vector<double> labels;
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view s = io::trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto fields = io::split(s, ',');
    if (fields.size() < 2) throw ParseError("expected a label and at least one feature", lineno);
    std::vector<double> values;
    for (const auto& f : fields) {
      double v;
      try {
        v = io::parse_double(f);
      } catch (const std::invalid_argument&) {
        throw ParseError("malformed number '" + std::string(io::trim(f)) + "'", lineno);
      }
      if (!std::isfinite(v)) throw ParseError("non-finite value", lineno);
      values.push_back(v);
    }
    if (values[0] != 1.0 && values[0] != -1.0) throw ParseError("label must be -1 or +1", lineno);
    if (dim == 0) dim = values.size() - 1;
    if (values.size() - 1 != dim)
      throw ParseError("expected " + std::to_string(dim) + " features", lineno);
    labels.push_back(values[0]);
    rows.emplace_back(values.begin() + 1, values.end());
  }
  if (rows.empty()) throw ParseError("no data rows", lineno);

  LoadedDataset out;
  out.data.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  out.data.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.data.labels[i] = labels[i];
    for (std::size_t j = 0; j < dim; ++j) out.data.features(i, j) = rows[i][j];
  }
  const double mx = max_row_norm(out.data.features);
  if (mx > 1.0) {
    out.scale = mx;
    out.rescaled = true;
    out.data.features /= safe_divisor(mx);
  }
  return out;
}

LoadedDataset load_csv(const std::string& path) { return parse_dataset_csv(io::read_file(path)); }

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << trajectory_header << '\n';
  for (std::size_t t = 0; t < traj.records.size(); ++t) {
    const StepRecord& r = traj.records[t];
    os << t << ',' << io::format_double(r.train_surrogate) << ','
       << io::format_double(r.test_surrogate) << ',' << io::format_double(r.test_robust) << ','
       << io::format_double(r.test_zero_one) << '\n';
  }
  return os.str();
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  io::write_atomic(path, trajectory_csv(traj));
}

std::vector<StepRecord> parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  std::vector<StepRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view s = io::trim(line);
    if (lineno == 1) {
      if (s != trajectory_header) throw ParseError("unexpected trajectory header", lineno);
      continue;
    }
    if (s.empty()) continue;
    const auto f = io::split(s, ',');
    if (f.size() != 5) throw ParseError("expected 5 columns", lineno);
    try {
      out.push_back({io::parse_double(f[1]), io::parse_double(f[2]), io::parse_double(f[3]),
                     io::parse_double(f[4])});
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

double sign_test_p_value(int wins, int losses) {
  if (wins < 0 || losses < 0) throw DomainError("counts must be nonnegative");
  const int n = wins + losses;
  if (n == 0) return 1.0;
  double p = 0.0;
  for (int k = wins; k <= n; ++k)
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                  n * std::log(2.0));
  return std::min(1.0, p);
}

SweepResult run_sweep(const SweepConfig& c) {
  if (c.losses.empty()) throw PreconditionError("sweep needs at least one loss");
  if (c.seeds < 1) throw PreconditionError("sweep needs at least one seed");
  validate(TrainConfig{{c.losses.front(), c.beta}, c.gamma, c.lr, c.steps, 0});

  SweepResult r;
  r.config = c;
  r.runs.assign(c.losses.size(), std::vector<Trajectory>(c.seeds));
  std::vector<TwonormSplit> data(c.seeds);
  for (int s = 0; s < c.seeds; ++s) data[s] = gen_twonorm(c.n_train, c.n_test, c.seed_base + s);

  const long jobs = static_cast<long>(c.losses.size()) * c.seeds;
  const unsigned threads = c.threads == 0 ? numeric::default_threads() : c.threads;
  numeric::parallel_for(jobs, threads, [&](long job) {
    const std::size_t l = static_cast<std::size_t>(job / c.seeds);
    const int s = static_cast<int>(job % c.seeds);
    const TrainConfig tc{{c.losses[l], c.beta}, c.gamma, c.lr, c.steps, c.seed_base + s};
    r.runs[l][s] = train(tc, data[s].train, data[s].test);
  });
  for (auto& d : data) r.test_sets.push_back(std::move(d.test));
  return r;
}

std::vector<SweepSummary> summarize(const SweepResult& result) {
  std::vector<SweepSummary> out;
  for (std::size_t l = 0; l < result.runs.size(); ++l) {
    const auto& runs = result.runs[l];
    const int n = static_cast<int>(runs.size());
    Eigen::VectorXd sur(n), tar(n);
    for (int s = 0; s < n; ++s) {
      const ExcessProxies p = excess_proxies(runs[s]);
      sur[s] = p.surrogate[p.surrogate.size() - 1];
      tar[s] = p.target[p.target.size() - 1];
    }
    const auto se = [n](const Eigen::VectorXd& v) {
      if (n < 2) return 0.0;
      const double var = (v.array() - v.mean()).square().sum() / (n - 1);
      return std::sqrt(var / n);
    };
    out.push_back({result.config.losses[l], n, sur.mean(), se(sur), tar.mean(), se(tar)});
  }
  return out;
}

std::string summary_csv(const std::vector<SweepSummary>& rows) {
  std::ostringstream os;
  os << "loss,runs,mean_final_surrogate_excess,se_final_surrogate_excess,"
        "mean_final_target_excess,se_final_target_excess\n";
  for (const auto& r : rows)
    os << to_string(r.loss) << ',' << r.runs << ',' << io::format_double(r.mean_final_surrogate_excess)
       << ',' << io::format_double(r.se_final_surrogate_excess) << ','
       << io::format_double(r.mean_final_target_excess) << ','
       << io::format_double(r.se_final_target_excess) << '\n';
  return os.str();
}

}  // namespace robustcalib
