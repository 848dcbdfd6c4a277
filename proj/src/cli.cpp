#include "robustcalib/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include "robustcalib/calibration.hpp"
#include "robustcalib/closed_forms.hpp"
#include "robustcalib/experiment.hpp"
#include "robustcalib/io.hpp"

namespace robustcalib::cli {

namespace {

struct CalibArgs {
  std::string loss;
  double beta = 0.0;
  double gamma = 0.2;
  std::string mode = "numeric";
  std::string out = "-";
  double tolerance = 2e-2;
  double eps_min = 0.02;
  double eps_max = 0.98;
  int eps_points = 97;
  int eta_points = 2001;
  int alpha_points = 2001;
};

struct VerdictArgs {
  std::string loss;
  double beta = 0.0;
  double gamma = 0.2;
};

struct TrainArgs {
  std::string loss;
  double beta = 0.2;
  double gamma = 0.2;
  double lr = 0.1;
  int steps = 200;
  std::uint64_t seed = 0;
  int n_train = 800;
  int n_test = 200;
  std::string train_csv;
  std::string test_csv;
  std::string out = "-";
};

struct SweepArgs {
  std::string losses = "ramp,sigmoid,hinge,logistic";
  double beta = 0.2;
  double gamma = 0.2;
  double lr = 0.1;
  int steps = 200;
  int seeds = 50;
  std::uint64_t seed_base = 0;
  int n_train = 800;
  int n_test = 200;
  std::string out_dir;
};

class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-")
    out << content;
  else
    io::write_atomic(path, content);
}

unsigned env_threads() {
  const char* v = std::getenv("ROBUSTCALIB_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw PreconditionError("ROBUSTCALIB_THREADS must be a positive integer");
  return static_cast<unsigned>(n);
}

int cmd_calib(const CalibArgs& a, std::ostream& out, std::ostream& err) {
  const LossFamily family = parse_family(a.loss);
  const LossSpec loss{family, a.beta};
  RobustTarget{a.gamma};
  if (a.mode != "numeric" && a.mode != "closed" && a.mode != "both")
    throw PreconditionError("mode must be numeric, closed or both");
  const Eigen::VectorXd eps = epsilon_grid(a.eps_min, a.eps_max, a.eps_points);
  const Eigen::Index n = eps.size();

  Eigen::VectorXd closed(n), closed_biconj(n);
  if (a.mode != "numeric") {
    for (Eigen::Index i = 0; i < n; ++i) {
      closed[i] = delta_closed(family, a.beta, a.gamma, eps[i]).value;
      try {
        closed_biconj[i] = biconjugate_closed(family, a.beta, a.gamma, eps[i]);
      } catch (const UnsupportedRegime&) {
        closed_biconj[i] = std::nan("");
      }
    }
  }

  std::ostringstream csv;
  if (a.mode == "closed") {
    csv << "epsilon,delta,delta_biconj\n";
    for (Eigen::Index i = 0; i < n; ++i)
      csv << io::format_double(eps[i]) << ',' << io::format_double(closed[i]) << ','
          << io::format_double(closed_biconj[i]) << '\n';
    emit(a.out, csv.str(), out);
    return ok;
  }

  NumericOptions opt;
  opt.eta_points = a.eta_points;
  opt.alpha_points = a.alpha_points;
  const CalibrationCurve curve = calibration_fn_numeric(loss, a.gamma, eps, opt);
  const CalibrationCurve hull = biconjugate(curve);
  const bool both = a.mode == "both";
  csv << "epsilon,delta,delta_biconj";
  if (both) csv << ",delta_closed,delta_biconj_closed,abs_diff";
  csv << '\n';
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    csv << io::format_double(eps[i]) << ',' << io::format_double(curve.deltas[i]) << ','
        << io::format_double(hull.deltas[i]);
    if (both) {
      const double diff = std::abs(curve.deltas[i] - closed[i]);
      worst = std::max(worst, diff);
      csv << ',' << io::format_double(closed[i]) << ',' << io::format_double(closed_biconj[i])
          << ',' << io::format_double(diff);
    }
    csv << '\n';
  }
  emit(a.out, csv.str(), out);
  if (both) {
    std::ostream& report = a.out == "-" ? err : out;
    report << "max_abs_diff=" << io::format_double(worst) << " tolerance=" << a.tolerance << '\n';
    if (!(worst <= a.tolerance)) throw Failure("numeric and closed forms differ beyond tolerance");
  }
  return ok;
}

int cmd_verdict(const VerdictArgs& a, std::ostream& out) {
  const LossSpec loss{parse_family(a.loss), a.beta};
  RobustTarget{a.gamma};
  const Verdict v = verdict(loss, a.gamma, structural_report(loss));
  out << "calibrated: " << (v.calibrated ? "yes" : "no") << ' ' << to_string(v.rule)
      << " witness=" << io::format_double(v.witness) << '\n';
  if (v.phi01_calibrated) out << "phi01_calibrated: " << (*v.phi01_calibrated ? "yes" : "no") << '\n';
  return ok;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const TrainConfig config{{parse_family(a.loss), a.beta}, a.gamma, a.lr, a.steps, a.seed};
  validate(config);
  if (a.train_csv.empty() != a.test_csv.empty())
    throw PreconditionError("--train-csv and --test-csv must be given together");
  Datasetd train_data, test_data;
  if (a.train_csv.empty()) {
    TwonormSplit s = gen_twonorm(a.n_train, a.n_test, a.seed);
    train_data = std::move(s.train);
    test_data = std::move(s.test);
  } else {
    LoadedDataset tr = load_csv(a.train_csv), te = load_csv(a.test_csv);
    for (const auto* d : {&tr, &te})
      if (d->rescaled)
        err << "warning: rescaled features by 1/" << io::format_double(d->scale)
            << " to fit the unit ball\n";
    train_data = std::move(tr.data);
    test_data = std::move(te.data);
  }
  emit(a.out, trajectory_csv(train(config, train_data, test_data)), out);
  return ok;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  SweepConfig c;
  for (const auto& name : io::split(a.losses, ','))
    c.losses.push_back(parse_family(std::string(io::trim(name))));
  c.beta = a.beta;
  c.gamma = a.gamma;
  c.lr = a.lr;
  c.steps = a.steps;
  c.seeds = a.seeds;
  c.seed_base = a.seed_base;
  c.n_train = a.n_train;
  c.n_test = a.n_test;
  c.threads = env_threads();
  validate(TrainConfig{{c.losses.front(), c.beta}, c.gamma, c.lr, c.steps, 0});
  if (c.seeds < 1) throw PreconditionError("seeds must be at least 1");

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + a.out_dir + ": " + ec.message());

  const SweepResult r = run_sweep(c);
  for (std::size_t l = 0; l < c.losses.size(); ++l)
    for (int s = 0; s < c.seeds; ++s) {
      const std::string name = std::string(to_string(c.losses[l])) + "_seed" +
                               std::to_string(c.seed_base + s) + ".csv";
      write_trajectory_csv((fs::path(a.out_dir) / name).string(), r.runs[l][s]);
    }
  const auto rows = summarize(r);
  io::write_atomic((fs::path(a.out_dir) / "summary.csv").string(), summary_csv(rows));
  out << summary_csv(rows);
  return ok;
}

// Moves `--config FILE` out of the argument list and splices its entries in as flags right
// after the subcommand, so explicit flags (parsed later) take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args, CLI::App& app) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty()) return args;

  std::size_t at = 0;
  CLI::App* sub = nullptr;
  for (std::size_t i = 1; i < args.size() && sub == nullptr; ++i)
    if ((sub = app.get_subcommand_no_throw(args[i])) != nullptr) at = i;
  if (sub == nullptr) throw PreconditionError("--config requires a subcommand");

  const auto entries = parse_config(io::read_file(path));
  std::vector<std::string> extra;
  for (const auto& [key, value] : entries) {
    if (key == "help" || sub->get_option_no_throw("--" + key) == nullptr)
      throw PreconditionError(path + ": unknown key '" + key + "' for " + sub->get_name());
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  args.insert(args.begin() + static_cast<long>(at) + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = io::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", lineno);
    std::string key(io::trim(s.substr(0, eq)));
    std::string value(io::trim(s.substr(eq + 1)));
    if (key.empty()) throw ParseError("empty key", lineno);
    std::replace(key.begin(), key.end(), '_', '-');
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Calibration functions of margin losses under l2-robust 0-1 targets", "robustcalib"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  const auto families = CLI::IsMember(
      {"ramp", "sigmoid", "modified_squared", "hinge", "logistic", "squared"});
  const std::string config_help = "Read key=value defaults from FILE (flags override)";

  CalibArgs ca;
  auto* calib = app.add_subcommand("calib", "Emit a calibration curve as CSV");
  calib->add_option("--loss", ca.loss)->required()->check(families);
  calib->add_option("--beta", ca.beta, "Shift of the loss")->capture_default_str();
  calib->add_option("--gamma", ca.gamma, "Perturbation budget")->capture_default_str();
  calib->add_option("--mode", ca.mode)->check(CLI::IsMember({"numeric", "closed", "both"}))
      ->capture_default_str();
  calib->add_option("--out", ca.out, "Output path, - for stdout")->capture_default_str();
  calib->add_option("--tolerance", ca.tolerance)->capture_default_str();
  calib->add_option("--eps-min", ca.eps_min)->capture_default_str();
  calib->add_option("--eps-max", ca.eps_max)->capture_default_str();
  calib->add_option("--eps-points", ca.eps_points)->capture_default_str();
  calib->add_option("--eta-points", ca.eta_points)->capture_default_str();
  calib->add_option("--alpha-points", ca.alpha_points)->capture_default_str();
  calib->add_option("--config", config_help);

  VerdictArgs va;
  auto* verd = app.add_subcommand("verdict", "Decide calibration wrt the robust 0-1 loss");
  verd->add_option("--loss", va.loss)->required()->check(families);
  verd->add_option("--beta", va.beta)->capture_default_str();
  verd->add_option("--gamma", va.gamma)->capture_default_str();
  verd->add_option("--config", config_help);

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Run one gradient-descent trajectory");
  tr->add_option("--loss", ta.loss)->required()->check(families);
  tr->add_option("--beta", ta.beta)->capture_default_str();
  tr->add_option("--gamma", ta.gamma)->capture_default_str();
  tr->add_option("--lr", ta.lr)->capture_default_str();
  tr->add_option("--steps", ta.steps)->capture_default_str();
  tr->add_option("--seed", ta.seed)->capture_default_str();
  tr->add_option("--n-train", ta.n_train)->capture_default_str();
  tr->add_option("--n-test", ta.n_test)->capture_default_str();
  tr->add_option("--train-csv", ta.train_csv, "Training data instead of synthetic twonorm");
  tr->add_option("--test-csv", ta.test_csv, "Test data; required with --train-csv");
  tr->add_option("--out", ta.out, "Output path, - for stdout")->capture_default_str();
  tr->add_option("--config", config_help);

  SweepArgs sa;
  auto* sw = app.add_subcommand("sweep", "Train every loss on every seed and summarize");
  sw->add_option("--losses", sa.losses, "Comma-separated loss families")->capture_default_str();
  sw->add_option("--beta", sa.beta)->capture_default_str();
  sw->add_option("--gamma", sa.gamma)->capture_default_str();
  sw->add_option("--lr", sa.lr)->capture_default_str();
  sw->add_option("--steps", sa.steps)->capture_default_str();
  sw->add_option("--seeds", sa.seeds)->capture_default_str();
  sw->add_option("--seed-base", sa.seed_base)->capture_default_str();
  sw->add_option("--n-train", sa.n_train)->capture_default_str();
  sw->add_option("--n-test", sa.n_test)->capture_default_str();
  sw->add_option("--out-dir", sa.out_dir)->required();
  sw->add_option("--config", config_help);

  try {
    std::vector<std::string> args = expand_config(raw_args, app);
    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  } catch (const robustcalib::ParseError& e) {
    err << "error: config " << e.what() << '\n';
    return usage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return failure;
  }

  try {
    if (calib->parsed()) return cmd_calib(ca, out, err);
    if (verd->parsed()) return cmd_verdict(va, out);
    if (tr->parsed()) return cmd_train(ta, out, err);
    if (sw->parsed()) return cmd_sweep(sa, out);
  } catch (const UnsupportedRegime& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return failure;
  }
  return usage;
}

}  // namespace robustcalib::cli
