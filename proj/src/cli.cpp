#include "gevmq/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gevmq/asymptotics.hpp"
#include "gevmq/block_maxima.hpp"
#include "gevmq/classical.hpp"
#include "gevmq/errors.hpp"
#include "gevmq/gev.hpp"
#include "gevmq/mc_harness.hpp"
#include "gevmq/multi_quantile.hpp"
#include "gevmq/report_io.hpp"
#include "gevmq/three_quantile.hpp"

namespace gevmq {

namespace {

using nlohmann::json;

// Usage problem detected after parsing, e.g. a missing file.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Estimation failed; the payload has already been written.
struct FitFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
json num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }
std::string opt17(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

struct Common {
  std::string output;
  std::string format = "csv";
  std::uint64_t seed = 1;
};

void add_common(CLI::App* sub, Common& c, bool with_format = true) {
  sub->add_option("-o,--output", c.output, "Output file (default: standard output)");
  if (with_format)
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sub->add_option("--seed", c.seed, "Master random seed (integer)")->capture_default_str();
}

// Writes to the requested file or to out.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& out) : out_(out) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("--output: cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : out_; }

 private:
  std::ofstream file_;
  std::ostream& out_;
};

std::vector<double> read_input(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("--input: cannot open '" + path + "'");
  std::vector<double> v = read_sample_column(f);
  if (v.empty()) throw UsageError("--input: '" + path + "' contains no values");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& flag, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) throw UsageError(flag + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

int default_threads() {
  if (const char* env = std::getenv("GEVMQ_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 0;
}

// ---------------------------------------------------------------- fit

json fit_json(const FitResult& r) {
  return {{"estimator", to_string(r.estimator)}, {"xi_hat", num(r.xi_hat)}, {"mu_hat", num(r.mu_hat)},
          {"sigma_hat", num(r.sigma_hat)},        {"valid", r.valid},
          {"failure_reason", r.failure_reason ? json(*r.failure_reason) : json(nullptr)}};
}

void emit_fit(std::ostream& os, const std::string& format, const FitResult& r, const json& extra) {
  if (format == "json") {
    json j = fit_json(r);
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    os << j.dump(2) << '\n';
  } else {
    os << "estimator,xi_hat,mu_hat,sigma_hat,valid,failure_reason\n"
       << to_string(r.estimator) << ',' << fmt17(r.xi_hat) << ',' << opt17(r.mu_hat) << ',' << opt17(r.sigma_hat)
       << ',' << (r.valid ? "true" : "false") << ',' << (r.failure_reason ? *r.failure_reason : "") << '\n';
  }
}

json weights_summary(const MqXiResult& x) {
  return {{"m_used", x.used.size()},
          {"dropped", x.dropped.size()},
          {"min", x.weights.minCoeff()},
          {"max", x.weights.maxCoeff()},
          {"negative", x.negative_weights},
          {"tau2", num(x.tau2)}};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-quantile and classical estimators for GEV distributions", "gevmq"};
  app.set_config("--config", "", "key=value file supplying defaults; flags override");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Common common;

  // sample
  auto* s_sample = app.add_subcommand("sample", "Draw a GEV sample as a one-column CSV");
  double s_xi = 0.0, s_mu = 0.0, s_sigma = 1.0;
  std::size_t s_n = 1000;
  s_sample->add_option("--xi", s_xi, "Shape xi (dimensionless)")->capture_default_str();
  s_sample->add_option("--mu", s_mu, "Location mu (data units)")->capture_default_str();
  s_sample->add_option("--sigma", s_sigma, "Scale sigma > 0 (data units)")->capture_default_str();
  s_sample->add_option("-n,--n", s_n, "Sample size (observations)")->capture_default_str();
  add_common(s_sample, common, false);

  // fit
  auto* s_fit = app.add_subcommand("fit", "Fit GEV parameters to a one-column CSV sample");
  std::string f_est = "mq", f_input;
  std::size_t f_m = 98, f_k = 100;
  s_fit->add_option("--estimator", f_est, "mq, mle, pwm or deh")->capture_default_str();
  s_fit->add_option("--input", f_input, "Input CSV (single column, optional header 'value')")->required();
  s_fit->add_option("--m", f_m, "MQ: number of random triples (count)")->capture_default_str();
  s_fit->add_option("--k", f_k, "DEH: number of top order statistics (count)")->capture_default_str();
  add_common(s_fit, common);

  // avar
  auto* s_avar = app.add_subcommand("avar", "Asymptotic variances of a three-quantile estimator, or theoretical table rows");
  double a_xi = 0.2, a_mu = 0.0, a_sigma = 1.0;
  std::vector<double> a_q{0.1, 0.5, 0.9};
  bool a_table = false;
  std::string a_xi_list = "-3,-2,-1,-0.5,-0.2,0,0.2,0.5,1,2";
  std::size_t a_n = 1000, a_m = 98;
  s_avar->add_option("--xi", a_xi, "Shape xi (dimensionless)")->capture_default_str();
  s_avar->add_option("--mu", a_mu, "Location mu (data units)")->capture_default_str();
  s_avar->add_option("--sigma", a_sigma, "Scale sigma (data units)")->capture_default_str();
  s_avar->add_option("--q", a_q, "Percentile triple q1 q2 q3 (probabilities)")->expected(3);
  s_avar->add_flag("--table", a_table, "Print theoretical standard errors (MQ, MLE, PWM) per xi instead");
  s_avar->add_option("--xi-list", a_xi_list, "Table: comma-separated xi values")->capture_default_str();
  s_avar->add_option("--n", a_n, "Table: nominal sample size (observations)")->capture_default_str();
  s_avar->add_option("--m", a_m, "Table: number of random triples (count)")->capture_default_str();
  add_common(s_avar, common);

  // optimal-triplet
  auto* s_opt = app.add_subcommand("optimal-triplet", "Percentile triple minimizing the asymptotic variance of xi");
  double o_xi = 0.0, o_step = 0.01;
  s_opt->add_option("--xi", o_xi, "Shape xi in [-5, 5] (dimensionless)")->required();
  s_opt->add_option("--step", o_step, "Coarse grid step (probability)")->capture_default_str();
  add_common(s_opt, common);

  // mc-compare
  auto* s_mc = app.add_subcommand("mc-compare", "Monte Carlo bias and standard error per estimator and xi");
  std::string m_xi_list = "-1,0.2,2", m_est = "mq,mle,pwm,deh";
  ExperimentGrid grid;
  bool m_time = false, m_text = false;
  int m_threads = default_threads();
  s_mc->add_option("--xi-list", m_xi_list, "Comma-separated xi values")->capture_default_str();
  s_mc->add_option("--estimators", m_est, "Comma-separated subset of mq,mle,pwm,deh")->capture_default_str();
  s_mc->add_option("--n", grid.n, "Sample size per replicate (observations)")->capture_default_str();
  s_mc->add_option("--reps", grid.reps, "Replicates K (count)")->capture_default_str();
  s_mc->add_option("--m", grid.m_triples, "MQ: number of random triples (count)")->capture_default_str();
  s_mc->add_option("--deh-k", grid.deh_k, "DEH: top order statistics (count)")->capture_default_str();
  s_mc->add_option("--deh-n", grid.deh_n, "DEH: sample size per replicate (observations)")->capture_default_str();
  s_mc->add_option("--threads", m_threads, "Worker threads, 0 = all (env GEVMQ_THREADS)")->capture_default_str();
  s_mc->add_flag("--wall-time", m_time, "Fill wall_ms with measured fit time (breaks byte-identical output)");
  s_mc->add_flag("--text-table", m_text, "Print a standard-error table instead of CSV/JSON");
  add_common(s_mc, common);

  // tau2-curve
  auto* s_tau = app.add_subcommand("tau2-curve", "Optimal MQ asymptotic variance as a function of m");
  double t_xi = 0.2;
  std::string t_m_list = "5,10,20,40,60,80";
  bool t_nested = false;
  s_tau->add_option("--xi", t_xi, "Shape xi (dimensionless)")->capture_default_str();
  s_tau->add_option("--m-list", t_m_list, "Ascending comma-separated counts of triples")->capture_default_str();
  s_tau->add_flag("--nested", t_nested, "Use nested sets from one grid");
  add_common(s_tau, common);

  // block-maxima
  auto* s_bm = app.add_subcommand("block-maxima", "MQ fit of block maxima of a raw sample");
  std::string b_input;
  std::size_t b_block = 100, b_m = 98, b_boot = 199;
  s_bm->add_option("--input", b_input, "Input CSV (single column, optional header 'value')")->required();
  s_bm->add_option("--block-size", b_block, "Observations per block (count)")->capture_default_str();
  s_bm->add_option("--m", b_m, "Number of random triples (count)")->capture_default_str();
  s_bm->add_option("--bootstrap", b_boot, "Bootstrap resamples for the xi interval, 0 = none (count)")->capture_default_str();
  add_common(s_bm, common);

  auto fail = [&](const std::string& kind, const std::string& msg, std::size_t line, int code) {
    json e{{"error", msg}, {"kind", kind}};
    if (line) e["line"] = line;
    err << e.dump() << '\n';
    return code;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 0, 2);
  }

  try {
    if (s_sample->parsed()) {
      const GevParams theta(s_xi, s_mu, s_sigma);
      Rng rng(common.seed);
      const auto v = sample(theta, s_n, rng);
      Sink sink(common.output, out);
      write_sample_column(sink.stream(), v);
    } else if (s_fit->parsed()) {
      const Estimator e = estimator_from_string(f_est);
      const std::vector<double> data = read_input(f_input);
      FitResult r;
      json extra = json::object();
      if (e == Estimator::MQ) {
        Rng rng(common.seed);
        const TripleSet M = select_robust_triples(f_m, 0.0, rng);
        r.estimator = Estimator::MQ;
        try {
          const MqFit fit = estimate_theta_mq(M, data);
          r.xi_hat = fit.theta.xi;
          r.mu_hat = fit.theta.mu;
          r.sigma_hat = fit.theta.sigma;
          r.valid = true;
          extra["weights"] = weights_summary(fit.xi);
        } catch (const EstimationError& ex) {
          r.xi_hat = std::nan("");
          r.failure_reason = ex.what();
        } catch (const RobustnessError& ex) {
          r.xi_hat = std::nan("");
          r.failure_reason = ex.what();
        }
      } else if (e == Estimator::MLE) {
        r = mle_fit(data);
      } else if (e == Estimator::PWM) {
        r = pwm_fit(data);
      } else {
        r = deh_fit(data, f_k);
      }
      Sink sink(common.output, out);
      emit_fit(sink.stream(), common.format, r, extra);
      if (!r.valid) throw FitFailed(r.failure_reason.value_or("estimation failed"));
    } else if (s_avar->parsed()) {
      Sink sink(common.output, out);
      std::ostream& os = sink.stream();
      if (a_table) {
        const auto xis = parse_list<double>("--xi-list", a_xi_list);
        Rng rng(common.seed);
        json arr = json::array();
        if (common.format == "csv") os << "xi,mq,mle,pwm\n";
        for (double xi : xis) {
          const Table2Row row = table2_row(xi, a_n, a_m, rng);
          if (common.format == "csv")
            os << fmt17(xi) << ',' << fmt17(row.mq) << ',' << opt17(row.mle) << ',' << opt17(row.pwm) << '\n';
          else
            arr.push_back({{"xi", xi}, {"mq", num(row.mq)}, {"mle", num(row.mle)}, {"pwm", num(row.pwm)}});
        }
        if (common.format == "json") os << arr.dump(2) << '\n';
      } else {
        const PercentileTriple q(a_q.at(0), a_q.at(1), a_q.at(2));
        const ThreeQuantileAvar av = avar_sigma_mu(q, GevParams(a_xi, a_mu, a_sigma));
        if (common.format == "csv")
          os << "q1,q2,q3,avar_xi,avar_mu,avar_sigma\n"
             << fmt17(q.q1) << ',' << fmt17(q.q2) << ',' << fmt17(q.q3) << ',' << fmt17(av.avar_xi) << ','
             << fmt17(av.avar_mu) << ',' << fmt17(av.avar_sigma) << '\n';
        else
          os << json{{"q", {q.q1, q.q2, q.q3}},
                     {"avar_xi", av.avar_xi},
                     {"avar_mu", av.avar_mu},
                     {"avar_sigma", av.avar_sigma}}
                    .dump(2)
             << '\n';
      }
    } else if (s_opt->parsed()) {
      const OptimalTriplet t = optimal_triplet(o_xi, o_step);
      Sink sink(common.output, out);
      std::ostream& os = sink.stream();
      if (common.format == "csv")
        os << "xi,q1,q2,q3,avar,crb,efficiency\n"
           << fmt17(o_xi) << ',' << fmt17(t.q.q1) << ',' << fmt17(t.q.q2) << ',' << fmt17(t.q.q3) << ','
           << fmt17(t.avar_star) << ',' << opt17(t.crb) << ',' << opt17(t.efficiency) << '\n';
      else
        os << json{{"xi", o_xi},
                   {"q", {t.q.q1, t.q.q2, t.q.q3}},
                   {"avar", t.avar_star},
                   {"crb", num(t.crb)},
                   {"efficiency", num(t.efficiency)}}
                  .dump(2)
           << '\n';
    } else if (s_mc->parsed()) {
      grid.xi_list = parse_list<double>("--xi-list", m_xi_list);
      grid.estimators.clear();
      for (const auto& name : parse_list<std::string>("--estimators", m_est))
        grid.estimators.push_back(estimator_from_string(name));
      grid.master_seed = common.seed;
      grid.threads = m_threads;
      const auto reports = run_grid(grid);
      Sink sink(common.output, out);
      if (m_text)
        sink.stream() << render_table(reports);
      else if (common.format == "csv")
        write_reports_csv(sink.stream(), reports, m_time);
      else
        write_reports_json(sink.stream(), reports, m_time);
    } else if (s_tau->parsed()) {
      const auto ms = parse_list<std::size_t>("--m-list", t_m_list);
      Rng rng(common.seed);
      const auto curve = t_nested ? tau2_opt_nested(t_xi, ms, rng) : tau2_opt_curve(t_xi, ms, rng);
      Sink sink(common.output, out);
      if (common.format == "csv") {
        sink.stream() << "m,tau2\n";
        for (const auto& p : curve) sink.stream() << p.m << ',' << fmt17(p.tau2) << '\n';
      } else {
        json arr = json::array();
        for (const auto& p : curve) arr.push_back({{"m", p.m}, {"tau2", p.tau2}});
        sink.stream() << arr.dump(2) << '\n';
      }
    } else if (s_bm->parsed()) {
      const std::vector<double> data = read_input(b_input);
      const BlockConfig cfg = BlockConfig::from_length(data.size(), b_block);
      if (cfg.n_blocks < mq_min_sample(b_m))
        throw UsageError("--m: " + std::to_string(cfg.n_blocks) + " blocks support at most m = " +
                         std::to_string(cfg.n_blocks / 10 >= 2 ? cfg.n_blocks / 10 - 2 : 0));
      Rng rng(common.seed);
      const TripleSet M = select_robust_triples(b_m, 0.0, rng);
      const FitResult r = bm_estimate(data, cfg, M);
      json extra{{"block_size", cfg.block_size}, {"n_blocks", cfg.n_blocks}};
      if (r.valid && b_boot > 0) {
        const BootstrapInterval bi = bm_bootstrap_xi(data, cfg, M, rng, b_boot);
        extra["xi_interval"] = {{"lo", bi.lo}, {"hi", bi.hi}, {"level", 0.95}, {"resamples", bi.resamples},
                                {"failures", bi.failures}, {"kind", "bootstrap percentile"}};
      }
      Sink sink(common.output, out);
      emit_fit(sink.stream(), common.format, r, extra);
      if (!r.valid) throw FitFailed(r.failure_reason.value_or("estimation failed"));
    }
  } catch (const FitFailed& e) {
    return fail("estimation", e.what(), 0, 1);
  } catch (const EstimationError& e) {
    return fail("estimation", e.what(), 0, 1);
  } catch (const RobustnessError& e) {
    return fail("estimation", e.what(), 0, 1);
  } catch (const InputError& e) {
    return fail("usage", "--input: " + std::string(e.what()), e.line(), 2);
  } catch (const UsageError& e) {
    return fail("usage", e.what(), 0, 2);
  } catch (const DomainError& e) {
    return fail("usage", e.what(), 0, 2);
  }
  return 0;
}

}  // namespace gevmq
