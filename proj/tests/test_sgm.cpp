#include <memory>

#include "doctest.h"
#include "nysgm/error.hpp"
#include "nysgm/sgm.hpp"
#include "oracles.hpp"

using namespace nysgm;

namespace {

Dataset single_point() {
  Dataset d;
  d.X = Matrix::Zero(1, 1);
  d.y = Vector::Ones(1);
  return d;
}

std::shared_ptr<const NystromFactor> make_factor(const KernelSpec& k, const Dataset& d, std::size_t m) {
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  return std::make_shared<const NystromFactor>(build_factor(k, d.X, idx));
}

Dataset random_problem(std::size_t n, std::uint64_t seed) {
  Dataset d = gen_toy(n, seed);
  return d;
}

}  // namespace

TEST_CASE("single-point steps approach the response geometrically") {
  const auto k = KernelSpec::gaussian(0.2);
  const Dataset d = single_point();
  const auto f = make_factor(k, d, 1);
  CHECK(f->rank == 1);
  PrecomputedFeatures cross(k, *f, d.X);
  TrainConfig config;
  config.eta1 = 0.5;
  const std::vector<std::size_t> batch{0};

  ModelState s = ModelState::initial(f->rank);
  CHECK(s.t == 1);
  s = step(s, config, d.y, cross, batch);
  CHECK(s.t == 2);
  CHECK(Predictor(k, f, s.coefficients)(d.X.row(0)) == doctest::Approx(0.5).epsilon(1e-15));
  s = step(s, config, d.y, cross, batch);
  CHECK(Predictor(k, f, s.coefficients)(d.X.row(0)) == doctest::Approx(0.75).epsilon(1e-15));

  config.iterations = 1;
  const Trajectory traj = train(config, d, k, f);
  REQUIRE(traj.snapshots.size() == 1);
  CHECK(traj.snapshots[0].iteration == 1);
  CHECK(traj.final_predictor()(d.X.row(0)) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("zero step size is the identity") {
  const auto k = KernelSpec::gaussian(0.2);
  const Dataset d = random_problem(10, 1);
  const auto f = make_factor(k, d, 5);
  PrecomputedFeatures cross(k, *f, d.X);
  TrainConfig config;
  config.eta1 = 0.0;
  ModelState s{Vector::LinSpaced(f->rank, -1.0, 1.0), 4};
  const std::vector<std::size_t> batch{1, 3, 3};
  const ModelState next = step(s, config, d.y, cross, batch);
  CHECK(next.coefficients == s.coefficients);
  CHECK(next.t == 5);

  config.iterations = 30;
  config.snapshot_stride = 7;
  const Trajectory traj = train(config, d, k, f);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i)
    CHECK(traj.predictor(i).predict_all(d.X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("step rejects out-of-range indices") {
  const auto k = KernelSpec::gaussian(0.2);
  const Dataset d = random_problem(4, 1);
  const auto f = make_factor(k, d, 2);
  PrecomputedFeatures cross(k, *f, d.X);
  TrainConfig config;
  const std::vector<std::size_t> bad{4};
  CHECK_THROWS_AS(step(ModelState::initial(f->rank), config, d.y, cross, bad), InputError);
  const std::vector<std::size_t> stream{0, 1, 9};
  config.iterations = 3;
  CHECK_THROWS_AS(train_with_stream(config, d, k, f, stream), InputError);
}

TEST_CASE("snapshots every stride and at T") {
  const auto k = KernelSpec::gaussian(0.2);
  const Dataset d = random_problem(10, 2);
  const auto f = make_factor(k, d, 4);
  TrainConfig config;
  config.eta1 = 0.1;
  config.batch_size = 3;
  config.iterations = 10;
  // default stride ceil(10/3) = 4
  const Trajectory traj = train(config, d, k, f);
  REQUIRE(traj.snapshots.size() == 3);
  CHECK(traj.snapshots[0].iteration == 4);
  CHECK(traj.snapshots[1].iteration == 8);
  CHECK(traj.snapshots[2].iteration == 10);
}

TEST_CASE("training is deterministic and storage strategies agree bitwise") {
  const auto k = KernelSpec::gaussian(0.2);
  const Dataset d = random_problem(30, 3);
  const auto f = make_factor(k, d, 8);
  TrainConfig config;
  config.eta1 = 0.3;
  config.batch_size = 2;
  config.iterations = 200;
  config.seed = 99;
  const Trajectory a = train(config, d, k, f);
  const Trajectory b = train(config, d, k, f);
  config.storage = StorageStrategy::on_the_fly;
  const Trajectory c = train(config, d, k, f);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  REQUIRE(a.snapshots.size() == c.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    CHECK(a.snapshots[i].coefficients == b.snapshots[i].coefficients);
    CHECK(a.snapshots[i].coefficients == c.snapshots[i].coefficients);
  }
  config.seed = 100;
  const Trajectory other = train(config, d, k, f);
  CHECK(other.snapshots.back().coefficients != a.snapshots.back().coefficients);
}

TEST_CASE("m = n reduces to classic SGM") {
  const auto k = KernelSpec::gaussian(0.2);
  Dataset d = random_problem(10, 4);
  for (Eigen::Index i = 0; i < 10; ++i) d.X(i, 0) = static_cast<double>(i) / 9.0;  // distinct, full rank
  const auto f = make_factor(k, d, 10);
  REQUIRE(f->rank == 10);
  TrainConfig config;
  config.eta1 = 0.5;
  config.batch_size = 2;
  config.iterations = 50;
  config.snapshot_stride = 5;
  config.seed = 8;
  const auto stream = draw_index_stream(10, 100, config.seed);
  const Trajectory traj = train_with_stream(config, d, k, f, stream);
  std::vector<std::size_t> at;
  for (const auto& s : traj.snapshots) at.push_back(s.iteration);
  const Matrix probe = eval_grid(25).points;
  const auto expected = testing::plain_sgm_predictions(d, k, 0.5, 2, stream, probe, at);
  REQUIRE(expected.size() == traj.snapshots.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK((traj.predictor(i).predict_all(probe) - expected[i]).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("coefficient form matches the functional projected update") {
  const auto k = KernelSpec::gaussian(0.2);
  Rng pick(12);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + pick.index(19);
    const std::size_t m = 1 + pick.index(std::min<std::size_t>(n, 10));
    const Dataset d = random_problem(n, 100 + static_cast<std::uint64_t>(trial));
    const auto f = make_factor(k, d, m);
    TrainConfig config;
    config.eta1 = 0.5;
    config.batch_size = 1 + pick.index(3);
    config.iterations = 50;
    config.snapshot_stride = 10;
    const auto stream = draw_index_stream(n, config.batch_size * 50, 7 + static_cast<std::uint64_t>(trial));
    const Trajectory traj = train_with_stream(config, d, k, f, stream);
    std::vector<std::size_t> at;
    for (const auto& s : traj.snapshots) at.push_back(s.iteration);
    const Matrix probe = eval_grid(15).points;
    const auto expected = testing::functional_nysgm_predictions(d, k, f->landmarks, 0.5,
                                                                config.batch_size, stream, probe, at);
    for (std::size_t i = 0; i < expected.size(); ++i)
      CHECK((traj.predictor(i).predict_all(probe) - expected[i]).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("predictor is linear in its coefficients") {
  const auto k = KernelSpec::gaussian(0.2);
  const Dataset d = random_problem(12, 5);
  const auto f = make_factor(k, d, 6);
  const Vector c = Vector::LinSpaced(f->rank, -2.0, 3.0);
  const Predictor p(k, f, c), scaled(k, f, 2.5 * c), zero(k, f, Vector::Zero(f->rank));
  const Matrix probe = eval_grid(40).points;
  CHECK((scaled.predict_all(probe) - 2.5 * p.predict_all(probe)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(zero.predict_all(probe).cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index i = 0; i < probe.rows(); ++i)
    CHECK(p(probe.row(i)) == doctest::Approx(p.predict_all(probe)(i)).epsilon(1e-12));
  Eigen::RowVectorXd wrong(2);
  wrong << 0.1, 0.2;
  CHECK_THROWS_AS(p(wrong), InputError);
  CHECK_THROWS_AS(Predictor(k, f, Vector::Zero(f->rank + 1)), InputError);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.eta1 = 0.4;
  CHECK(c.validate(1.0).empty());
  c.eta1 = 0.6;
  CHECK(c.validate(1.0).size() == 1);
  c.eta1 = 1.2;
  CHECK_THROWS_AS(c.validate(1.0), InputError);
  c.eta1 = 0.1;
  CHECK_THROWS_AS(c.validate(4.0), InputError);  // 0.1 * 16 > 1
  c.theta = 1.0;
  CHECK_THROWS_AS(c.validate(1.0), InputError);
  c.theta = 0.5;
  CHECK(c.step_size(4) == doctest::Approx(0.05));
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(1.0), InputError);

  const auto k = KernelSpec::gaussian(0.2);
  const Dataset d = random_problem(5, 1);
  TrainConfig zero_iters;
  zero_iters.iterations = 0;
  CHECK_THROWS_AS(train(zero_iters, d, k, make_factor(k, d, 2)), InputError);
}

TEST_CASE("index stream is uniform over [n]") {
  const auto stream = draw_index_stream(4, 40000, 1);
  std::vector<int> counts(4, 0);
  for (auto j : stream) ++counts[j];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
  CHECK(draw_index_stream(4, 10, 3) == draw_index_stream(4, 10, 3));
}

TEST_CASE("pass counts") {
  auto p = pass_count(100, 1, 100, 10);
  CHECK(p.epochs == 1.0);
  CHECK(p.paper_passes == 10.0);
  CHECK(pass_count(1, 50, 50, 7).epochs == 1.0);
  CHECK(pass_count(10, 10, 100, 3).epochs == 1.0);
  CHECK(pass_count(3, 1, 100, 2).paper_passes == 2.0);
}
