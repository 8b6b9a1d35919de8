// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Default is the CI scale (K = 300 for the empirical standard-error cells, tolerances x1.8);
// --full runs K = 1000 with the nominal tolerances.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gevmq/asymptotics.hpp"
#include "gevmq/block_maxima.hpp"
#include "gevmq/classical.hpp"
#include "gevmq/cli.hpp"
#include "gevmq/gev.hpp"
#include "gevmq/mc_harness.hpp"
#include "gevmq/multi_quantile.hpp"
#include "gevmq/quantile_stats.hpp"
#include "gevmq/three_quantile.hpp"

using namespace gevmq;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates sub-checks into one criterion verdict.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) pass_ = false;
    if (!detail_.empty()) detail_ += "; ";
    detail_ += (ok ? "" : "MISS ") + what;
  }
  Outcome done() const { return {pass_, detail_}; }

 private:
  bool pass_ = true;
  std::string detail_;
};

std::string fmt(const char* f, double a) {
  char b[64];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

const std::vector<double> kXi{-3, -2, -1, -0.5, -0.2, 0.2, 0.5, 1, 2, 3};
const std::vector<double> kMu{-1, 0, 2};
const std::vector<double> kSigma{0.5, 1, 3};
const std::vector<PercentileTriple> kTriples{{0.1, 0.5, 0.9}, {0.25, 0.5, 0.75}, {0.05, 0.6, 0.95}};

Triple3 true_T(const PercentileTriple& q, const GevParams& t) {
  return {quantile(t, q.q1), quantile(t, q.q2), quantile(t, q.q3)};
}

template <class F>
void for_grid(F f) {
  for (double xi : kXi)
    for (double mu : kMu)
      for (double sg : kSigma)
        for (const auto& q : kTriples) f(q, GevParams(xi, mu, sg));
}

// Max-norm relative error between an analytic vector and its finite-difference estimate.
double vec_rel(const Eigen::RowVector3d& a, const Eigen::RowVector3d& fd) {
  const double s = a.cwiseAbs().maxCoeff();
  return s == 0 ? fd.cwiseAbs().maxCoeff() : (a - fd).cwiseAbs().maxCoeff() / s;
}

Eigen::MatrixXd sample_cov(const std::vector<Eigen::VectorXd>& v) {
  const Eigen::Index d = v.front().size();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
  for (const auto& x : v) m += x;
  m /= double(v.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : v) c += (x - m) * (x - m).transpose();
  return c / double(v.size() - 1);
}

Outcome c1_exact_inversion() {
  double worst = 0;
  for_grid([&](const PercentileTriple& q, const GevParams& t) {
    const GevParams e = estimate_theta(q, true_T(q, t));
    worst = std::max({worst, std::fabs(e.xi - t.xi), std::fabs(e.mu - t.mu), std::fabs(e.sigma - t.sigma)});
  });
  return {worst < 1e-8, "max |theta_hat - theta| = " + fmt("%.3g", worst)};
}

Outcome c2_residual() {
  double worst = 0;
  for_grid([&](const PercentileTriple& q, const GevParams& t) {
    const Triple3 T = true_T(q, t);
    worst = std::max(worst, std::fabs(h_scaled(triple_geometry(q, T), solve_xi(q, T))));
  });
  return {worst < 1e-12, "max |h(xi_hat)| = " + fmt("%.3g", worst)};
}

Outcome c3_gradients() {
  double wW = 0, wQ = 0, wS = 0, wL = 0;
  for_grid([&](const PercentileTriple& q, const GevParams& t) {
    const Triple3 T = true_T(q, t);
    const Eigen::RowVector3d W = grad_W(q, t);
    Eigen::RowVector3d fdW;
    for (int i = 0; i < 3; ++i) {
      const double gap = i == 0 ? T[1] - T[0] : i == 2 ? T[2] - T[1] : std::min(T[1] - T[0], T[2] - T[1]);
      const double h = 1e-6 * gap;
      Triple3 a = T, b = T;
      a[std::size_t(i)] += h;
      b[std::size_t(i)] -= h;
      fdW(i) = (solve_xi(q, a) - solve_xi(q, b)) / (2 * h);
    }
    wW = std::max(wW, vec_rel(W, fdW));

    const double hq = 1e-6;
    const Eigen::RowVector3d fdQ = (q_vector(q, t.xi + hq) - q_vector(q, t.xi - hq)) / (2 * hq);
    wQ = std::max(wQ, vec_rel(dxi_q_vector(q, t.xi), fdQ));

    const Eigen::RowVector3d Tv(T[0], T[1], T[2]);
    const Eigen::RowVector3d Q = q_vector(q, t.xi);
    const SlGradients g = sl_gradients(Tv, Q);
    Eigen::RowVector3d dTS, dQS, dTL, dQL;
    const double hT = 1e-6 * (T[2] - T[0]), hQ = 1e-6 * (Q(2) - Q(0));
    for (int i = 0; i < 3; ++i) {
      Eigen::RowVector3d eT = Eigen::RowVector3d::Zero(), eQ = Eigen::RowVector3d::Zero();
      eT(i) = hT;
      eQ(i) = hQ;
      dTS(i) = (scale_S(Tv + eT, Q) - scale_S(Tv - eT, Q)) / (2 * hT);
      dQS(i) = (scale_S(Tv, Q + eQ) - scale_S(Tv, Q - eQ)) / (2 * hQ);
      dTL(i) = (location_L(Tv + eT, Q) - location_L(Tv - eT, Q)) / (2 * hT);
      dQL(i) = (location_L(Tv, Q + eQ) - location_L(Tv, Q - eQ)) / (2 * hQ);
    }
    wS = std::max({wS, vec_rel(g.dT_S, dTS), vec_rel(g.dQ_S, dQS)});
    wL = std::max({wL, vec_rel(g.dT_L, dTL), vec_rel(g.dQ_L, dQL)});
  });
  Verdict v;
  v.check(wW < 1e-5, "W " + fmt("%.2g", wW));
  v.check(wQ < 1e-5, "dQ/dxi " + fmt("%.2g", wQ));
  v.check(wS < 1e-5, "S blocks " + fmt("%.2g", wS));
  v.check(wL < 1e-5, "L blocks " + fmt("%.2g", wL));
  return v.done();
}

Outcome c4_quantile_clt() {
  const GevParams t(0.2, 0, 1);
  const PercentileTriple q(0.25, 0.5, 0.75);
  const std::size_t N = 50000, K = 2000;
  const Triple3 T = true_T(q, t);
  std::vector<Eigen::VectorXd> z;
  std::vector<double> buf(N);
  for (std::size_t k = 0; k < K; ++k) {
    Rng rng(stream_seed(401, 0, k));
    sample_into(t, buf, rng);
    const SortedSample s(buf);
    Eigen::VectorXd v(3);
    for (int j = 0; j < 3; ++j) v(j) = std::sqrt(double(N)) * (s.quantile(q[j]) - T[std::size_t(j)]);
    z.push_back(v);
  }
  const Eigen::MatrixXd C = sample_cov(z);
  const Eigen::Matrix3d S = sigma_T(t, q);
  double diag = 0, off = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double r = std::fabs(C(i, j) - S(i, j)) / std::fabs(S(i, j));
      (i == j ? diag : off) = std::max(i == j ? diag : off, r);
    }
  Verdict v;
  v.check(diag < 0.05, "diagonal rel err " + fmt("%.3f", diag));
  v.check(off < 0.08, "off-diagonal rel err " + fmt("%.3f", off));
  return v.done();
}

Outcome c5_avar_invariance() {
  double worst = 0;
  for_grid([&](const PercentileTriple& q, const GevParams& t) {
    worst = std::max(worst, std::fabs(avar_xi(q, t) - avar_xi(q, GevParams(t.xi, 0, 1))));
  });
  return {worst < 1e-10, "max |AVAR(xi,mu,sigma) - AVAR(xi,0,1)| = " + fmt("%.3g", worst)};
}

Outcome c6_lambda_mc() {
  const double xi = 0.2;
  const TripleSet M({{0.1, 0.5, 0.9}, {0.2, 0.6, 0.8}});
  const auto L = lambda_matrix(M, xi);
  const std::size_t N = 100000, K = 2000;
  std::vector<Eigen::VectorXd> z;
  std::vector<double> buf(N);
  for (std::size_t k = 0; k < K; ++k) {
    Rng rng(stream_seed(601, 0, k));
    sample_into(GevParams(xi, 0, 1), buf, rng);
    const SortedSample s(buf);
    Eigen::VectorXd v(2);
    for (int j = 0; j < 2; ++j) {
      const auto& q = M.triples[std::size_t(j)];
      v(j) = std::sqrt(double(N)) * (solve_xi(q, {s.quantile(q.q1), s.quantile(q.q2), s.quantile(q.q3)}) - xi);
    }
    z.push_back(v);
  }
  const Eigen::MatrixXd C = sample_cov(z);
  double worst = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) worst = std::max(worst, std::fabs(C(i, j) - L.values(i, j)) / std::fabs(L.values(i, j)));
  std::ostringstream d;
  d << "Lambda = [" << L.values(0, 0) << ", " << L.values(0, 1) << "; " << L.values(1, 1) << "], MC = [" << C(0, 0)
    << ", " << C(0, 1) << "; " << C(1, 1) << "], max rel err " << fmt("%.3f", worst);
  return {worst < 0.07, d.str()};
}

Outcome c7_tau2_curve() {
  Verdict v;
  const double crb = crb_xi(0.2);
  v.check(std::fabs(crb - 0.805) <= 0.01, "CRB(0.2) = " + fmt("%.4f", crb) + " vs 0.805");
  const std::vector<std::size_t> ms{10, 20, 40, 80};
  const std::vector<std::size_t> m80{80};
  for (double xi : {0.2, -2.0}) {
    Rng rng(stream_seed(701, xi > 0, 0));
    const double t80 = tau2_opt_curve(xi, m80, rng).front().tau2;
    const double lo = xi > 0 ? 0.80 : 0.71, hi = xi > 0 ? 0.90 : 0.81;
    v.check(t80 >= lo && t80 <= hi, "tau2(80) at xi=" + fmt("%g", xi) + " = " + fmt("%.4f", t80) + " vs [" +
                                        fmt("%.2f", lo) + ", " + fmt("%.2f", hi) + "]");
    Rng nrng(stream_seed(702, xi > 0, 0));
    const auto c = tau2_opt_nested(xi, ms, nrng);
    bool mono = true;
    std::string seq;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i && c[i].tau2 > c[i - 1].tau2 * (1 + 1e-9)) mono = false;
      seq += (i ? " " : "") + fmt("%.4f", c[i].tau2);
    }
    v.check(mono, "nested tau2 at xi=" + fmt("%g", xi) + " over m=10,20,40,80: " + seq);
  }
  return v.done();
}

Outcome c8_theoretical_se() {
  Verdict v;
  auto near = [&](const std::string& what, std::optional<double> got, double ref, double tol) {
    if (!got) return v.check(false, what + " absent");
    v.check(std::fabs(*got - ref) <= tol, what + " " + fmt("%.4f", *got) + " vs " + fmt("%.3f", ref));
  };
  Rng rng(801);
  const Table2Row a = table2_row(-3, 1000, 98, rng);
  near("xi=-3 MQ", a.mq, 0.075, 0.008);
  near("xi=-3 PWM", a.pwm, 0.185, 0.01);
  v.check(!a.mle, "xi=-3 MLE absent");
  const Table2Row b = table2_row(0.2, 1000, 98, rng);
  near("xi=0.2 MQ", b.mq, 0.026, 0.003);
  near("xi=0.2 MLE", b.mle, 0.025, 0.001);
  near("xi=0.2 PWM", b.pwm, 0.030, 0.002);
  const Table2Row c = table2_row(2, 1000, 98, rng);
  near("xi=2 MQ", c.mq, 0.060, 0.006);
  near("xi=2 MLE", c.mle, 0.058, 0.002);
  v.check(!c.pwm, "xi=2 PWM absent");
  return v.done();
}

Outcome c9_empirical_se(bool full) {
  const std::size_t K = full ? 1000 : 300;
  const double widen = full ? 1.0 : 1.8;
  auto run = [&](double xi, Estimator e) {
    ExperimentGrid g;
    g.xi_list = {xi};
    g.estimators = {e};
    g.reps = K;
    g.n = 1000;
    g.master_seed = 901;
    return run_grid(g).front();
  };
  Verdict v;
  auto cell = [&](double xi, Estimator e, double ref) {
    const McReport r = run(xi, e);
    const double rel = r.std_error / ref - 1;
    v.check(r.failure_rate <= 0.5 && std::fabs(rel) <= 0.15 * widen,
            to_string(e) + " xi=" + fmt("%g", xi) + " stderr " + fmt("%.4f", r.std_error) + " vs " + fmt("%.3f", ref) +
                " (" + fmt("%+.0f%%", 100 * rel) + ")");
  };
  cell(-1, Estimator::MQ, 0.039);
  cell(0.2, Estimator::MQ, 0.036);
  cell(2, Estimator::MQ, 0.082);
  cell(0.2, Estimator::MLE, 0.026);
  cell(-2, Estimator::PWM, 0.085);
  const McReport mle = run(-2, Estimator::MLE);
  v.check(mle.failure_rate > 0.5, "MLE xi=-2 failure rate " + fmt("%.2f", mle.failure_rate));
  const McReport pwm = run(2, Estimator::PWM);
  v.check(pwm.failure_rate > 0.5, "PWM xi=2 failure rate " + fmt("%.2f", pwm.failure_rate));
  return v.done();
}

Outcome c10_optimal_triplet() {
  Verdict v;
  const OptimalTriplet t = optimal_triplet(-1);
  const double ref[3] = {0.037, 0.832, 0.987};
  bool ok = true;
  for (int j = 0; j < 3; ++j) ok = ok && std::fabs(t.q[j] - ref[j]) <= 0.02;
  v.check(ok, "optimal triplet at xi=-1 (" + fmt("%.4f", t.q.q1) + ", " + fmt("%.4f", t.q.q2) + ", " +
                  fmt("%.4f", t.q.q3) + ")");
  const OptimalTriplet u = optimal_triplet(2);
  const double eff = u.efficiency.value_or(std::nan(""));
  v.check(eff >= 0.807 && eff <= 0.847, "efficiency at xi=2 " + fmt("%.4f", eff) + " vs [0.807, 0.847]");
  return v.done();
}

Outcome c11_fisher() {
  const double xi = 0.2;
  Rng rng(1101);
  const auto x = sample(GevParams(xi, 0, 1), 1000000, rng);
  auto ll = [&](double a, double b, double c) { return log_likelihood(GevParams(a, b, c), x) / double(x.size()); };
  const double p[3] = {xi, 0, 1}, h = 1e-4;
  Eigen::Matrix3d H;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      auto at = [&](double di, double dj) {
        double q[3] = {p[0], p[1], p[2]};
        q[i] += di;
        q[j] += dj;
        return ll(q[0], q[1], q[2]);
      };
      H(i, j) = -(at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
    }
  const Eigen::Matrix3d J = fisher_info(xi).J;
  const double worst = ((H - J).cwiseAbs().array() / J.cwiseAbs().array()).maxCoeff();
  Verdict v;
  v.check(worst < 0.02, "Fisher vs Monte Carlo Hessian max rel err " + fmt("%.4f", worst));
  const double crb = crb_xi(xi);
  v.check(std::fabs(crb - 0.805) <= 0.01, "CRB(0.2) = " + fmt("%.4f", crb) + " vs 0.805");
  return v.done();
}

Outcome c12_block_maxima() {
  Verdict v;
  Rng sel(1201);
  const TripleSet M = select_robust_triples(98, 0.0, sel);
  const BlockConfig cfg(100, 1000);
  Rng rng(1202);
  std::vector<double> u(100000), e(100000);
  for (double& a : u) a = rng.uniform();
  for (double& a : e) a = -std::log(rng.uniform());
  const double xu = bm_estimate(u, cfg, M).xi_hat, xe = bm_estimate(e, cfg, M).xi_hat;
  v.check(xu >= -1.15 && xu <= -0.85, "uniform xi_hat " + fmt("%.4f", xu));
  v.check(std::fabs(xe) <= 0.1, "exponential xi_hat " + fmt("%.4f", xe));
  const auto g = sample(GevParams(0.2, 0, 1), 5000, rng);
  const FitResult a = bm_estimate(g, BlockConfig::from_length(g.size(), 1), M);
  const MqFit b = estimate_theta_mq(M, std::span<const double>(g));
  v.check(a.xi_hat == b.theta.xi && a.mu_hat == b.theta.mu && a.sigma_hat == b.theta.sigma,
          "blocks of one equal the plain MQ fit bitwise");
  return v.done();
}

Outcome c13_determinism() {
  auto run = [](const std::string& threads) {
    std::vector<std::string> args{"gevmq", "mc-compare", "--xi-list", "-1,0.2,2", "--reps", "20",
                                  "--seed", "1301", "--threads", threads};
    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = run_cli(int(argv.size()), argv.data(), out, err);
    return std::make_pair(code, out.str());
  };
  const auto a = run("1"), b = run("2"), c = run("4");
  const bool ok = a.first == 0 && a.second == b.second && a.second == c.second && !a.second.empty();
  return {ok, "mc-compare with --threads 1, 2, 4: " + std::string(ok ? "identical bytes" : "outputs differ")};
}

Outcome c14_deh() {
  ExperimentGrid g;
  g.xi_list = {0.0};
  g.estimators = {Estimator::DEH};
  g.reps = 1000;
  g.deh_n = 10000;
  g.deh_k = 100;
  g.master_seed = 1401;
  const McReport r = run_grid(g).front();
  Verdict v;
  v.check(r.failure_rate <= 0.01, "finite in " + fmt("%.1f%%", 100 * (1 - r.failure_rate)) + " of replicates");
  v.check(r.std_error >= 0.05 && r.std_error <= 0.2, "stderr " + fmt("%.4f", r.std_error) + " vs 0.100 within factor 2");
  return v.done();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-14"};
  bool full = false;
  std::vector<int> only;
  app.add_flag("--full", full, "Empirical standard errors with K = 1000 and nominal tolerances");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact inversion", c1_exact_inversion},
      {"root residual", c2_residual},
      {"gradient verification", c3_gradients},
      {"quantile CLT", c4_quantile_clt},
      {"AVAR invariance", c5_avar_invariance},
      {"Lambda consistency", c6_lambda_mc},
      {"tau2_opt curve and CRB(0.2)", c7_tau2_curve},
      {"theoretical standard errors", c8_theoretical_se},
      {"empirical standard errors", [full] { return c9_empirical_se(full); }},
      {"optimal triplet and efficiency", c10_optimal_triplet},
      {"Fisher oracle and CRB(0.2)", c11_fisher},
      {"block maxima", c12_block_maxima},
      {"determinism across threads", c13_determinism},
      {"DEH smoke", c14_deh},
  };
  std::printf("mode: %s\n", full ? "full (K = 1000)" : "CI (K = 300, empirical standard-error tolerances x1.8)");
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2d %s: %s [%s] (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), s);
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed ? 1 : 0;
}
