#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "collapse/ensemble.hpp"
#include "collapse/errors.hpp"

using namespace collapse;

namespace {
ExperimentConfig tiny() {
  ExperimentConfig c;
  c.lambda = 1.0;
  c.alpha = 0.5;
  c.centers = {-2.0, 2.0};
  c.weights = {1.0, 1.0};
  c.width = 0.5;
  c.grid = {-16.0, 16.0, 128};
  c.dt = 0.005;
  c.t_final = 0.1;
  c.record_every = 5;
  c.n_trajectories = 70;
  c.seed = 42;
  c.workers = 1;
  c.histogram_bins = 8;
  return c;
}

std::string csv_of(const EnsembleSummary& s) {
  std::ostringstream os;
  write_summary_csv(os, s);
  write_finals_csv(os, s);
  write_histogram_csv(os, s);
  write_density_csv(os, s);
  return os.str();
}
}  // namespace

TEST_CASE("config round-trips through text and JSON") {
  auto c = tiny();
  c.mode = DynamicsMode::Linear;
  c.momenta = {0.25, -0.125};
  c.width_imag = -0.3;
  c.format = OutputFormat::Json;
  c.out_dir = "some/dir";
  CHECK(ExperimentConfig::parse_text(c.to_text()) == c);
  CHECK(ExperimentConfig::parse_json(c.to_json()) == c);
  c.width.reset();
  CHECK(ExperimentConfig::parse_text(c.to_text()) == c);
}

TEST_CASE("config keys are validated") {
  ExperimentConfig c;
  CHECK_THROWS_AS(c.set("no_such_key", "1"), Error);
  CHECK_THROWS_AS(c.set("dt", "fast"), Error);
  CHECK_THROWS_AS(c.set("mode", "sideways"), Error);
  c.set("grid.n_points", "100");
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.set("dt", "-1");
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.set("packet.centers", "0,1");
  c.set("packet.weights", "1,2,3");
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("text config ignores comments and blank lines") {
  const auto c = ExperimentConfig::parse_text("# comment\n\nlambda = 2.5\n  alpha=0.125  \n");
  CHECK(c.lambda == 2.5);
  CHECK(c.alpha == 0.125);
}

TEST_CASE("running statistics merge like a single pass") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(3.0, 2.0);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = g(rng);
  RunningStat all;
  for (double x : xs) all.add(x);
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (xs.size() - 1);
  CHECK(all.mean == doctest::Approx(mean).epsilon(1e-13));
  CHECK(all.variance() == doctest::Approx(var).epsilon(1e-12));

  RunningStat a, b, c;
  for (std::size_t i = 0; i < 300; ++i) a.add(xs[i]);
  for (std::size_t i = 300; i < 310; ++i) b.add(xs[i]);
  for (std::size_t i = 310; i < xs.size(); ++i) c.add(xs[i]);
  RunningStat left = a;
  left.merge(b);
  left.merge(c);
  RunningStat bc = b;
  bc.merge(c);
  RunningStat right = a;
  right.merge(bc);
  CHECK(left.mean == doctest::Approx(right.mean).epsilon(1e-14));
  CHECK(left.variance() == doctest::Approx(right.variance()).epsilon(1e-13));
  CHECK(left.variance() == doctest::Approx(var).epsilon(1e-12));
  RunningStat empty;
  left.merge(empty);
  CHECK(left.count == 1000);
}

TEST_CASE("ensemble output does not depend on the worker count") {
  auto c = tiny();
  const auto one = csv_of(run_ensemble(c));
  c.workers = 3;
  const auto three = csv_of(run_ensemble(c));
  CHECK(one == three);
}

TEST_CASE("single trajectories reproduce the ensemble records") {
  const auto c = tiny();
  const auto s = run_ensemble(c);
  const auto r = run_single_trajectory(c, 5);
  bool found = false;
  for (const auto& [idx, rec] : s.finals)
    if (idx == 5) {
      found = true;
      CHECK(rec.q_mean == r.back().q_mean);
      CHECK(rec.sq_q == r.back().sq_q);
    }
  CHECK(found);
  CHECK(s.n_completed == c.n_trajectories);
  CHECK(s.times.size() == r.size());
}

TEST_CASE("golden tiny run") {
  const auto s = run_ensemble(tiny());
  std::ostringstream os;
  write_summary_csv(os, s);
  std::ifstream in(COLLAPSE_TEST_DATA "/golden_tiny_summary.csv");
  REQUIRE_MESSAGE(in.good(), "missing golden file");
  std::stringstream golden;
  golden << in.rdbuf();
  CHECK(os.str() == golden.str());
}

TEST_CASE("summary CSV layout") {
  const auto s = run_ensemble(tiny());
  std::ostringstream os;
  write_summary_csv(os, s);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "# collapse-ensemble-summary v1");
  std::getline(is, line);
  CHECK(line.rfind("#", 0) == 0);
  std::getline(is, line);
  CHECK(line.rfind("t,q_mean_mean,q_mean_se", 0) == 0);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("linear mode keeps the raw norm") {
  auto c = tiny();
  c.mode = DynamicsMode::Linear;
  const auto s = run_ensemble(c);
  const auto last = s.times.size() - 1;
  CHECK(std::abs(s.mean(last, kNorm) - 1.0) < 4.0 * s.se(last, kNorm) + 1e-12);
  CHECK(s.se(last, kNorm) > 0.0);
}
