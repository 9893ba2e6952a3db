// End-to-end reachability driver: exactness on degenerate/linear cases, mode
// semantics (single / incremental / boundary), determinism, and the error
// surface for invalid inputs.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mmreach/reach.hpp"
#include "oracles.hpp"

using namespace mmreach;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

NeuralOdeModel scalar_decay_model() {
  NeuralOdeModel m;
  m.state_dim = 1;
  m.layers.push_back(
      Layer::make_linear(-Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)));
  validate_model(m);
  return m;
}

NeuralOdeModel zero_field_model() {
  NeuralOdeModel m;
  m.state_dim = 2;
  m.layers.push_back(Layer::make_linear(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2)));
  validate_model(m);
  return m;
}

IntervalVector origin_box(double half_width, int n) {
  return IntervalVector(Eigen::VectorXd::Constant(n, -half_width),
                        Eigen::VectorXd::Constant(n, half_width));
}

ReachSpec fpa_spec(Method method, Mode mode) {
  ReachSpec spec;
  spec.model = fpa_model();
  spec.x0_box = origin_box(0.1, 5);
  spec.t_final = 1.0;
  spec.method = method;
  spec.mode = mode;
  return spec;
}

}  // namespace

TEST_CASE("a point initial box reproduces the flow", "[reach]") {
  const NeuralOdeModel m = fpa_model();
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(5, 0.2);
  const Eigen::VectorXd ref = flow(m, x0, 1.0);

  for (const Method method : {Method::ct_mm, Method::sd_mm}) {
    ReachSpec spec;
    spec.model = m;
    spec.x0_box = IntervalVector::point(x0);
    spec.t_final = 1.0;
    spec.method = method;
    const ReachResult r = reach(spec);
    CHECK(r.box.width().maxCoeff() < 1e-9);
    CHECK((r.box.lo() - ref).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("a zero field returns the initial box unchanged", "[reach]") {
  const NeuralOdeModel m = zero_field_model();
  const IntervalVector x0 = origin_box(0.75, 2);

  ReachSpec spec;
  spec.model = m;
  spec.x0_box = x0;
  spec.t_final = 3.0;

  spec.method = Method::ct_mm;
  const ReachResult ct = reach(spec);
  CHECK(ct.box.lo() == x0.lo());  // exact: every term in the update is zero
  CHECK(ct.box.hi() == x0.hi());

  // The sampled-data variant widens by the sensitivity margin floor applied
  // to the identity sensitivity matrix; it must still contain the box and
  // stay within that tiny tolerance.
  spec.method = Method::sd_mm;
  const ReachResult sd = reach(spec);
  CHECK(sd.box.contains(x0));
  CHECK((sd.box.lo() - x0.lo()).cwiseAbs().maxCoeff() < 1e-5);
  CHECK((sd.box.hi() - x0.hi()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("sampled-data reach collapses to the box as the horizon vanishes", "[reach]") {
  ReachSpec spec = fpa_spec(Method::sd_mm, Mode::single);
  spec.t_final = 1e-8;
  const ReachResult r = reach(spec);
  CHECK((r.box.lo() - spec.x0_box.lo()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((r.box.hi() - spec.x0_box.hi()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("scalar linear decay is computed exactly by both methods", "[reach]") {
  // dx/dt = -x on [0.9, 1.1] over one time unit: the true reachable set is
  // [0.9 e^-1, 1.1 e^-1] and neither method introduces slack.
  ReachSpec spec;
  spec.model = scalar_decay_model();
  spec.x0_box = IntervalVector(Eigen::VectorXd::Constant(1, 0.9),
                               Eigen::VectorXd::Constant(1, 1.1));
  spec.t_final = 1.0;
  const double e1 = std::exp(-1.0);

  for (const Method method : {Method::ct_mm, Method::sd_mm}) {
    spec.method = method;
    const ReachResult r = reach(spec);
    CHECK_THAT(r.box[0].lo, WithinAbs(0.9 * e1, 1e-6));
    CHECK_THAT(r.box[0].hi, WithinAbs(1.1 * e1, 1e-6));
  }
}

TEST_CASE("results are sound against sampled trajectories", "[reach]") {
  auto gen = oracles::rng(71);
  for (const Method method : {Method::ct_mm, Method::sd_mm}) {
    for (const Mode mode : {Mode::single, Mode::incremental, Mode::boundary}) {
      ReachSpec spec = fpa_spec(method, mode);
      spec.step = 0.25;
      const ReachResult r = reach(spec);
      for (int s = 0; s < 100; ++s) {
        const Eigen::VectorXd xT =
            flow(spec.model, oracles::uniform_vector(gen, spec.x0_box.lo(), spec.x0_box.hi()),
                 spec.t_final);
        REQUIRE(contains(r.box, xT, 1e-9));
      }
    }
  }
}

TEST_CASE("continuous-time result stays inside its lipschitz tube", "[reach]") {
  const ReachResult r = reach(fpa_spec(Method::ct_mm, Mode::single));
  CHECK(r.tube_used.contains(r.box));
}

TEST_CASE("incremental mode counts clipped steps", "[reach]") {
  ReachSpec spec = fpa_spec(Method::ct_mm, Mode::incremental);
  spec.t_final = 2.0;
  spec.step = 0.05;
  const ReachResult r = reach(spec);
  CHECK(r.steps_taken == 40);

  spec.t_final = 0.9;
  spec.step = 0.4;  // 0.4 + 0.4 + 0.1
  CHECK(reach(spec).steps_taken == 3);
}

TEST_CASE("incremental with step equal to the horizon matches single exactly", "[reach]") {
  for (const Method method : {Method::ct_mm, Method::sd_mm}) {
    ReachSpec spec = fpa_spec(method, Mode::single);
    const ReachResult one = reach(spec);
    spec.mode = Mode::incremental;
    spec.step = spec.t_final;
    const ReachResult inc = reach(spec);
    CHECK(inc.steps_taken == 1);
    CHECK(inc.box.lo() == one.box.lo());  // bitwise: same seed, same arithmetic
    CHECK(inc.box.hi() == one.box.hi());
    CHECK(inc.tube_used.lo() == one.tube_used.lo());
    CHECK(inc.tube_used.hi() == one.tube_used.hi());
    CHECK(inc.shift_used.entries == one.shift_used.entries);
  }
}

TEST_CASE("boundary mode hulls one run per facet", "[reach]") {
  const ReachResult r = reach(fpa_spec(Method::ct_mm, Mode::boundary));
  REQUIRE(r.per_facet.has_value());
  REQUIRE(r.per_facet->size() == 10);
  for (const IntervalVector& facet : *r.per_facet) REQUIRE(r.box.contains(facet));
  CHECK(r.steps_taken == 1);
}

TEST_CASE("boundary mode rejects degenerate initial boxes", "[reach]") {
  ReachSpec spec = fpa_spec(Method::ct_mm, Mode::boundary);
  spec.x0_box[2] = Interval::point(0.05);
  CHECK_THROWS_MATCHES(reach(spec), ReachError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("coordinate 3") &&
                                                       ContainsSubstring("single mode")));
}

TEST_CASE("reach is deterministic for a fixed seed", "[reach]") {
  for (const Method method : {Method::ct_mm, Method::sd_mm}) {
    for (const Mode mode : {Mode::single, Mode::boundary}) {
      ReachSpec spec = fpa_spec(method, mode);
      spec.tube_source = TubeSource::monte_carlo;  // exercises the RNG paths
      spec.seed = 99;
      const ReachResult a = reach(spec);
      const ReachResult b = reach(spec);
      CHECK(a.box.lo() == b.box.lo());
      CHECK(a.box.hi() == b.box.hi());
    }
  }
}

TEST_CASE("a user tube is used verbatim", "[reach]") {
  ReachSpec spec = fpa_spec(Method::ct_mm, Mode::single);
  // Feed the lipschitz tube back as a user tube: identical domain, identical
  // embedding, bitwise identical result.
  const ReachResult lip = reach(spec);
  spec.tube_source = TubeSource::user_provided;
  spec.user_tube = IntervalVector(lip.tube_used.lo(), lip.tube_used.hi());
  const ReachResult usr = reach(spec);
  CHECK(usr.tube_used.lo() == lip.tube_used.lo());
  CHECK(usr.box.lo() == lip.box.lo());
  CHECK(usr.box.hi() == lip.box.hi());
}

TEST_CASE("reach rejects invalid inputs up front", "[reach]") {
  ReachSpec spec = fpa_spec(Method::ct_mm, Mode::single);

  ReachSpec wrong_dim = spec;
  wrong_dim.x0_box = origin_box(0.1, 3);
  CHECK_THROWS_AS(reach(wrong_dim), ValidationError);

  ReachSpec bad_t = spec;
  bad_t.t_final = 0.0;
  CHECK_THROWS_AS(reach(bad_t), ValidationError);

  ReachSpec bad_step = spec;
  bad_step.mode = Mode::incremental;
  bad_step.step = 2.0;  // exceeds t_final = 1
  CHECK_THROWS_AS(reach(bad_step), ValidationError);

  ReachSpec no_tube = spec;
  no_tube.tube_source = TubeSource::user_provided;
  CHECK_THROWS_AS(reach(no_tube), ValidationError);

  ReachSpec small_tube = no_tube;
  small_tube.user_tube = origin_box(0.05, 5);  // does not contain x0
  CHECK_THROWS_AS(reach(small_tube), ValidationError);

  ReachSpec bad_sens = spec;
  bad_sens.sensitivity_samples = 0;
  CHECK_THROWS_AS(reach(bad_sens), ValidationError);
}

TEST_CASE("inverted output boxes surface as reach errors", "[reach]") {
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.0, 1.0;
  hi << 1.0, 0.5;  // second coordinate inverted
  CHECK_THROWS_MATCHES(detail::require_ordered(lo, hi), ReachError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("coordinate 2")));
}

TEST_CASE("sensitivity enclosure covers sampled sensitivities", "[reach]") {
  const NeuralOdeModel m = fpa_model();
  const IntervalVector box = origin_box(0.1, 5);
  const IntervalMatrix bounds = estimate_sensitivity_bounds(m, box, 1.0, 100, 0.05, 5);

  auto gen = oracles::rng(72);
  for (int s = 0; s < 50; ++s) {
    const Eigen::MatrixXd sm =
        sensitivity(m, oracles::uniform_vector(gen, box.lo(), box.hi()), 1.0);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) {
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        REQUIRE(bounds.at(i, j).lo <= sm(ii, jj) + 1e-9);
        REQUIRE(sm(ii, jj) <= bounds.at(i, j).hi + 1e-9);
      }
  }

  // Degenerate box: the sampled spread is zero, so only the scale-relative
  // margin floor remains.  The enclosure must be centred on the true
  // sensitivity and stay narrow relative to the largest entry.
  const IntervalMatrix pt =
      estimate_sensitivity_bounds(m, IntervalVector::point(box.lo()), 1.0, 10, 0.05, 5);
  const Eigen::MatrixXd exact = sensitivity(m, box.lo(), 1.0);
  const double scale = exact.cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      REQUIRE(pt.at(i, j).lo <= exact(ii, jj));
      REQUIRE(exact(ii, jj) <= pt.at(i, j).hi);
      REQUIRE(pt.at(i, j).width() <= 2e-6 * scale);
    }
}
