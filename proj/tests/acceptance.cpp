// Acceptance suite: one test case per criterion, each printing a PASS or
// FAIL line with its runtime.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "oracle_utils.hpp"
#include "wunt/wunt.hpp"

using namespace wunt;

namespace {

class Stopwatch {
public:
  double seconds() const
  {
    return std::chrono::duration<double>(
             std::chrono::steady_clock::now() - start_)
      .count();
  }

private:
  std::chrono::steady_clock::time_point start_{
    std::chrono::steady_clock::now()
  };
};

bool report(const char* id, const char* what, bool pass, double secs)
{
  std::printf("[%s] %s - %s (%.1f s)\n", id, pass ? "PASS" : "FAIL", what,
              secs);
  std::fflush(stdout);
  return pass;
}

} // namespace

TEST_CASE("criterion 1: exact grid property of the adaptive transformer")
{
  Stopwatch timer;
  std::mt19937_64 gen(10001);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  bool pass = true;

  for (int trial = 0; trial < 200 && pass; ++trial) {
    const int d = 1 + trial % 3;
    int n0_axis = 2;
    switch (d) {
      case 1:
        n0_axis = 2 + static_cast<int>(gen() % 39);
        break;
      case 2:
        n0_axis = 2 + static_cast<int>(gen() % 11);
        break;
      default:
        n0_axis = 2 + static_cast<int>(gen() % 5);
        break;
    }
    Eigen::Index n = 1;
    for (int k = 0; k < d; ++k) {
      n *= n0_axis;
    }
    Eigen::MatrixXd pts(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) {
        pts(i, k) = unif(gen);
      }
    }
    const Partition p = build_adaptive(pts);
    if (p.cells_per_axis() != n0_axis) {
      pass = false;
      break;
    }
    for (Eigen::Index i = 0; i < n && pass; ++i) {
      const Eigen::VectorXd out = p.transform(pts.row(i));
      const auto& cell = p.cell_of_point(i);
      for (int k = 0; k < d; ++k) {
        const double lo =
          static_cast<double>(cell[static_cast<std::size_t>(k)]) / n0_axis;
        const double hi =
          static_cast<double>(cell[static_cast<std::size_t>(k)] + 1) /
          n0_axis;
        if (!(out[k] >= lo && out[k] < hi)) {
          pass = false;
        }
      }
    }
  }

  const double secs = timer.seconds();
  pass = pass && secs < 10.0;
  REQUIRE(report("C1", "grid property, 200 perfect-power control sets",
                 pass, secs));
}

TEST_CASE("criterion 2: brute-force oracle equivalence on 500 instances")
{
  Stopwatch timer;
  std::mt19937_64 gen(20002);
  std::uniform_real_distribution<double> hdist(0.3, 2.5);
  std::uniform_int_distribution<long> ldist(1, 30);
  bool pass = true;
  int kernel_checked = 0, projection_checked = 0, skipped = 0;

  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index n = 6 + static_cast<Eigen::Index>(gen() % 25);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(trial % 3);
    const Dataset ds = oracle::random_instance(gen, n, d);
    if (ds.n0() < 2 || ds.n1() < 2) {
      ++skipped;
      continue;
    }
    UniformTransformer t = UniformTransformer::identity(d);
    if (trial % 3 == 1) {
      t = make_transformer(TransformerKind::marginal, ds);
    } else if (trial % 3 == 2) {
      t = make_transformer(TransformerKind::adaptive, ds);
    }

    const int order = (trial % 2 == 0) ? 2 : 4;
    const ProductKernel kernel = ProductKernel::for_order(
      order, Eigen::VectorXd::Constant(d, hdist(gen)));
    try {
      const double mine = estimate_kernel(ds, t, kernel).mu_ct_hat;
      const double direct = oracle::direct_mu_kernel(ds, t, kernel);
      if (oracle::relative_diff(mine, direct) >= 1e-12) {
        pass = false;
      }
      ++kernel_checked;
    } catch (const overlap_error&) {
      ++skipped;
    }

    const ProjectionBasis basis(trial % 2 == 0 ? BasisFamily::tensor_cosine
                                               : BasisFamily::tensor_haar,
                                d, ldist(gen));
    try {
      const double mine = estimate_projection(ds, t, basis).mu_ct_hat;
      const double direct = oracle::direct_mu_projection(ds, t, basis);
      if (oracle::relative_diff(mine, direct) >= 1e-10) {
        pass = false;
      }
      ++projection_checked;
    } catch (const overlap_error&) {
      ++skipped;
    } catch (const std::runtime_error&) {
      ++skipped;
    }
  }

  pass = pass && kernel_checked > 450 && projection_checked > 450;
  const double secs = timer.seconds();
  pass = pass && secs < 30.0;
  std::printf("       kernel checked %d, projection checked %d, "
              "skipped %d\n",
              kernel_checked, projection_checked, skipped);
  REQUIRE(report("C2", "Eq.(4)/Eq.(5) match direct double loops", pass,
                 secs));
}

TEST_CASE("criterion 3: degenerate limits return the control mean exactly")
{
  Stopwatch timer;
  std::mt19937_64 gen(30003);
  bool pass = true;

  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(gen() % 50);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(trial % 3);
    const Dataset ds = oracle::random_instance(gen, n, d);
    if (ds.n0() < 1 || ds.n1() < 1) {
      continue;
    }
    CompensatedSum acc;
    Eigen::Index n0 = 0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (ds.treatment[i] == 0) {
        acc.add((*ds.outcome)[i]);
        ++n0;
      }
    }
    const double mean = acc.value() / static_cast<double>(n0);

    const UniformTransformer id = UniformTransformer::identity(d);
    const ProjectionBasis constant(BasisFamily::tensor_cosine, d, 1);
    if (estimate_projection(ds, id, constant).mu_ct_hat != mean) {
      pass = false;
    }
    const ProductKernel flat(KernelFamily::epanechnikov,
                             Eigen::VectorXd::Constant(d, 1e12));
    if (estimate_kernel(ds, id, flat).mu_ct_hat != mean) {
      pass = false;
    }
  }

  const double secs = timer.seconds();
  pass = pass && secs < 5.0;
  REQUIRE(report("C3", "L=1 and flat-kernel limits equal the control mean",
                 pass, secs));
}

TEST_CASE("criterion 4: desk-scale reproduction of the Y1 comparison cells")
{
  Stopwatch timer;
  SimConfig cfg;
  cfg.model = SimModel::y1;
  cfg.rho = 0.0;
  cfg.n1 = 500;
  cfg.n0 = 1000;
  cfg.unlabeled = 0; // no-extra-data column

  const std::vector<EstimatorSpec> specs = {
    parse_estimator_spec("kernel+marginal"),
    parse_estimator_spec("projection+marginal"),
  };
  const ReplicationResult result = run_replications(cfg, specs, 100, 424242);

  const CellResult& kernel_cell = result.cells[0];
  const CellResult& projection_cell = result.cells[1];
  std::printf("       kernel+marginal: bias %.3f rmse %.3f (targets "
              "-0.11+-0.15, 0.47+-30%%)\n",
              kernel_cell.bias, kernel_cell.rmse);
  std::printf("       projection+marginal: bias %.3f rmse %.3f (targets "
              "-0.06+-0.15, 0.51+-30%%)\n",
              projection_cell.bias, projection_cell.rmse);

  bool pass = !kernel_cell.failed_cell && !projection_cell.failed_cell;
  pass = pass && std::abs(kernel_cell.bias - (-0.11)) <= 0.15;
  pass = pass && kernel_cell.rmse >= 0.47 * 0.7 &&
         kernel_cell.rmse <= 0.47 * 1.3;
  pass = pass && std::abs(projection_cell.bias - (-0.06)) <= 0.15;
  pass = pass && projection_cell.rmse >= 0.51 * 0.7 &&
         projection_cell.rmse <= 0.51 * 1.3;

  const double secs = timer.seconds();
  pass = pass && secs < 600.0;
  REQUIRE(report("C4", "Y1 kernel/projection + marginal bias and RMSE",
                 pass, secs));
}

TEST_CASE("criterion 5: Y4 bias trend and RMSE dominance over IPW")
{
  Stopwatch timer;
  const std::uint64_t seed = 515151;

  // kernel+joint bias across paired sample sizes
  double bias[3] = { 0.0, 0.0, 0.0 };
  const Eigen::Index sizes[3] = { 1000, 2000, 5000 };
  bool pass = true;
  for (int s = 0; s < 3; ++s) {
    SimConfig cfg;
    cfg.model = SimModel::y4;
    cfg.n = sizes[s];
    const ReplicationResult result = run_replications(
      cfg, { parse_estimator_spec("kernel+joint") }, 100, seed);
    pass = pass && !result.cells[0].failed_cell;
    bias[s] = result.cells[0].bias;
  }
  std::printf("       kernel+joint bias: %.3f (n=1000) %.3f (n=2000) %.3f "
              "(n=5000)\n",
              bias[0], bias[1], bias[2]);
  pass = pass && std::abs(bias[0]) > std::abs(bias[1]) &&
         std::abs(bias[1]) > std::abs(bias[2]);

  // all four WUNT estimators beat logistic IPW on RMSE at n=1000
  SimConfig cfg;
  cfg.model = SimModel::y4;
  cfg.n = 1000;
  const std::vector<EstimatorSpec> specs = {
    parse_estimator_spec("kernel+joint"),
    parse_estimator_spec("kernel+marginal"),
    parse_estimator_spec("projection+joint"),
    parse_estimator_spec("projection+marginal"),
    parse_estimator_spec("ipw"),
  };
  const ReplicationResult field = run_replications(cfg, specs, 100, seed);
  const double ipw_rmse = field.cells[4].rmse;
  std::printf("       rmse at n=1000:");
  for (const auto& cell : field.cells) {
    std::printf(" %s=%.3f", cell.label.c_str(), cell.rmse);
  }
  std::printf("\n");
  for (int s = 0; s < 4; ++s) {
    pass = pass && !field.cells[static_cast<std::size_t>(s)].failed_cell &&
           field.cells[static_cast<std::size_t>(s)].rmse < ipw_rmse;
  }

  const double secs = timer.seconds();
  pass = pass && secs < 1200.0;
  REQUIRE(report("C5", "Y4 monotone kernel bias and WUNT < IPW RMSE", pass,
                 secs));
}

TEST_CASE("criterion 6: timing shape of the two estimator families")
{
  Stopwatch timer;
  SimConfig cfg;
  cfg.model = SimModel::y3;

  std::vector<EstimatorSpec> specs = {
    parse_estimator_spec("kernel+joint"),
    parse_estimator_spec("projection+joint"),
  };
  // bench defaults: the Y3 surface is very smooth
  for (auto& spec : specs) {
    spec.alpha = 4.0;
    spec.beta = 4.0;
  }
  const BenchResult bench =
    timing_bench(cfg, { 1000, 2000, 5000 }, specs, 10, 606060);

  double kernel_slope = 0.0, projection_slope = 0.0;
  for (const auto& [label, slope] : bench.slopes) {
    if (label == "kernel+joint") {
      kernel_slope = slope;
    } else {
      projection_slope = slope;
    }
  }
  for (const auto& entry : bench.entries) {
    std::printf("       %s n=%ld: %.4f s\n", entry.label.c_str(),
                static_cast<long>(entry.n), entry.mean_seconds);
  }
  std::printf("       slopes: kernel %.2f (want 1.7..2.3), projection %.2f "
              "(want 0.8..1.6)\n",
              kernel_slope, projection_slope);

  bool pass = kernel_slope >= 1.7 && kernel_slope <= 2.3;
  pass = pass && projection_slope >= 0.8 && projection_slope <= 1.6;

  // adaptive transformer construction at n = 10000
  std::mt19937_64 gen(606061);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd pts(10000, 4);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index k = 0; k < 4; ++k) {
      pts(i, k) = unif(gen);
    }
  }
  const Stopwatch build_timer;
  const Partition p = build_adaptive(pts);
  const double build_secs = build_timer.seconds();
  std::printf("       adaptive build at n=10000: %.3f s (want < 2)\n",
              build_secs);
  pass = pass && build_secs < 2.0 && p.n_points() == 10000;

  const double secs = timer.seconds();
  pass = pass && secs < 900.0;
  REQUIRE(report("C6", "log-log timing slopes and transformer build time",
                 pass, secs));
}

TEST_CASE("criterion 7: warm-up bandwidth separation for a rough response")
{
  Stopwatch timer;
  WarmupConfig cfg;
  cfg.n0 = 2000;
  cfg.n1 = 2000;
  cfg.reps = 50;
  cfg.response = WarmupResponse::rough;
  cfg.beta = 1.0;
  cfg.seed = 707070;
  cfg.bandwidth_grid = warmup_default_grid(0.002, 0.5, 10);
  const WarmupResult result = run_warmup(cfg);

  std::printf("       best h %.4f vs density rule %.4f\n",
              result.best_bandwidth, result.density_rule);
  bool pass = result.best_bandwidth < result.density_rule;

  const double secs = timer.seconds();
  pass = pass && secs < 300.0;
  REQUIRE(report("C7", "MSE-optimal bandwidth below n^(-1/(1+2 beta))",
                 pass, secs));
}

TEST_CASE("criterion 8: invariant suites")
{
  Stopwatch timer;
  bool pass = true;

  // kernel moment cancellation by quadrature
  {
    const ProductKernel k4(KernelFamily::gauss_order4,
                           Eigen::VectorXd::Ones(1));
    const ProductKernel k6(KernelFamily::gauss_order6,
                           Eigen::VectorXd::Ones(1));
    for (int t = 1; t <= 3; ++t) {
      const double m = oracle::simpson(
        [&](double x) { return std::pow(x, t) * k4.g(x); }, -12.0, 12.0,
        40000);
      pass = pass && std::abs(m) < 1e-8;
    }
    for (int t = 1; t <= 5; ++t) {
      const double m = oracle::simpson(
        [&](double x) { return std::pow(x, t) * k6.g(x); }, -12.0, 12.0,
        40000);
      pass = pass && std::abs(m) < 1e-8;
    }
  }

  // Gram orthonormality for the cosine family
  {
    const ProjectionBasis basis(BasisFamily::tensor_cosine, 1, 64);
    for (long a = 0; a < 64; a += 9) {
      for (long b = a; b < 64; b += 13) {
        const double integral = oracle::simpson(
          [&](double x) {
            return basis.eval(a, Eigen::VectorXd::Constant(1, x)) *
                   basis.eval(b, Eigen::VectorXd::Constant(1, x));
          },
          0.0, 1.0, 10000);
        pass = pass && std::abs(integral - (a == b ? 1.0 : 0.0)) < 1e-6;
      }
    }
  }

  // weight normalization, permutation invariance, equivariance,
  // thread-count determinism
  {
    const SimData data = generate_y1_y2(SimModel::y1, 0.0, 60, 90, 0, 808080);
    const Dataset& ds = data.labeled;
    const UniformTransformer t = make_transformer(TransformerKind::marginal,
                                                  ds);
    const ProductKernel kernel =
      ProductKernel::for_order(2, Eigen::VectorXd::Constant(5, 0.3));
    const EstimateReport base = estimate_kernel(ds, t, kernel);

    CompensatedSum weight_sum;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (ds.treatment[i] == 0) {
        weight_sum.add(base.weights[i]);
      } else {
        pass = pass && base.weights[i] == 1.0;
      }
    }
    pass = pass && std::abs(weight_sum.value() - 1.0) < 1e-10;

    // permutation
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(ds.n()));
    std::iota(perm.begin(), perm.end(), Eigen::Index{ 0 });
    std::mt19937_64 gen(808081);
    std::shuffle(perm.begin(), perm.end(), gen);
    Dataset shuffled = ds;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      shuffled.covariates.row(i) = ds.covariates.row(perm[i]);
      shuffled.treatment[i] = ds.treatment[perm[i]];
      (*shuffled.outcome)[i] = (*ds.outcome)[perm[i]];
    }
    const UniformTransformer ts =
      make_transformer(TransformerKind::marginal, shuffled);
    const double shuffled_mu = estimate_kernel(shuffled, ts, kernel).mu_ct_hat;
    pass = pass && oracle::relative_diff(base.mu_ct_hat, shuffled_mu) < 1e-10;

    // location/scale equivariance
    Dataset moved = ds;
    *moved.outcome = moved.outcome->array() * 3.0 + 5.0;
    const EstimateReport moved_report = estimate_kernel(moved, t, kernel);
    pass = pass &&
           std::abs(moved_report.mu_ct_hat - (3.0 * base.mu_ct_hat + 5.0)) <
             1e-9;
    pass = pass &&
           std::abs(moved_report.tau_att_hat - 3.0 * base.tau_att_hat) <
             1e-9;

    // bitwise determinism across thread counts
    set_thread_count(1);
    const double mu1 = estimate_kernel(ds, t, kernel).mu_ct_hat;
    SimConfig rep_cfg;
    rep_cfg.model = SimModel::y4;
    rep_cfg.n = 150;
    const ReplicationResult rep1 = run_replications(
      rep_cfg, { parse_estimator_spec("projection+joint") }, 8, 9);
    set_thread_count(3);
    const double mu3 = estimate_kernel(ds, t, kernel).mu_ct_hat;
    const ReplicationResult rep3 = run_replications(
      rep_cfg, { parse_estimator_spec("projection+joint") }, 8, 9);
    set_thread_count(default_thread_count());
    pass = pass && mu1 == mu3 && mu1 == base.mu_ct_hat;
    pass = pass && rep1.cells[0].bias == rep3.cells[0].bias &&
           rep1.cells[0].rmse == rep3.cells[0].rmse;
  }

  const double secs = timer.seconds();
  pass = pass && secs < 120.0;
  REQUIRE(report("C8", "moments, Gram, weights, invariances, determinism",
                 pass, secs));
}
