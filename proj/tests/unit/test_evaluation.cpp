#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "aeattack/channel.hpp"
#include "aeattack/errors.hpp"
#include "aeattack/evaluation.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace aeattack;
using namespace aeattack::evaluation;

namespace {

Scenario classical_scenario(double ebno, std::size_t trials, std::uint64_t seed) {
  Scenario sc;
  sc.id = "classical_clean";
  sc.system = std::make_shared<ClassicalLink>();
  sc.channel = channel::ChannelConfig::make(ebno, 4, 7);
  sc.trials = trials;
  sc.seed = seed;
  return sc;
}

Scenario mlp_scenario(double ebno, std::size_t trials, std::uint64_t seed) {
  Scenario sc;
  sc.id = "mlp_clean";
  sc.system = std::make_shared<AutoencoderLink>(fixture::trained_mlp(), "mlp");
  sc.channel = channel::ChannelConfig::make(ebno, 4, 7);
  sc.trials = trials;
  sc.seed = seed;
  return sc;
}

}  // namespace

TEST_CASE("a zero perturbation is indistinguishable from no attack") {
  for (auto sc : {classical_scenario(3.0, 1, 9), mlp_scenario(3.0, 1, 9)}) {
    Scenario zero = sc;
    zero.attack = AttackKind::Perturbation;
    zero.perturbation = Tensor::zeros(14);
    Scenario zero_shift = zero;
    zero_shift.shift = ShiftPolicy::UniformCyclic;
    for (std::uint64_t t = 0; t < 3000; ++t) {
      const auto a = trace_trial(sc, t);
      const auto b = trace_trial(zero, t);
      CHECK(a.message == b.message);
      CHECK(a.noise == b.noise);
      CHECK(a.decided == b.decided);
      CHECK(run_trial(sc, t) == run_trial(zero_shift, t));
    }
  }
}

TEST_CASE("clean trials on a noiseless channel are all correct") {
  auto sc = classical_scenario(0.0, 2000, 1);
  sc.channel.sigma2 = 0.0;
  const auto p = estimate_bler(sc);
  CHECK(p.errors == 0);
  CHECK(p.bler == 0.0);
  CHECK(p.ci95 == 0.0);
  CHECK(p.upper() == doctest::Approx(3.0 / 2000));
  CHECK(p.lower() == 0.0);
}

TEST_CASE("confidence interval formula") {
  CHECK(ci_halfwidth(0.5, 100) == doctest::Approx(0.098).epsilon(1e-12));
  CHECK(ci_halfwidth(0.0, 100) == 0.0);
  CHECK(ci_halfwidth(0.01, 20000) / ci_halfwidth(0.01, 10000) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  const auto p = make_point(2.0, 25, 1000);
  CHECK(p.bler == 0.025);
  CHECK(p.ci95 == doctest::Approx(1.96 * std::sqrt(0.025 * 0.975 / 1000)));
  CHECK(p.upper() == doctest::Approx(0.025 + p.ci95));

  const auto hi = make_point(0.0, 500, 1000);
  const auto lo = make_point(0.0, 100, 1000);
  CHECK(dominance(hi, lo) == Dominance::Greater);
  CHECK(dominance(lo, hi) == Dominance::Less);
  CHECK(dominance(hi, hi) == Dominance::Indistinct);
  // No observed errors: the upper end is 3/N, not 0.
  CHECK(dominance(make_point(0.0, 2, 1000), make_point(0.0, 0, 1000)) == Dominance::Indistinct);
  CHECK(dominance(make_point(0.0, 20, 1000), make_point(0.0, 0, 1000)) == Dominance::Greater);
}

TEST_CASE("the estimator is unbiased on a link of known error rate") {
  for (double q : {0.3, 0.05}) {
    Scenario sc;
    sc.id = "coin";
    sc.system = std::make_shared<oracle::CoinFlipLink>(q, 1.0);
    sc.channel = {0.0, 1, 1, 1.0};
    sc.trials = 1000000;
    sc.seed = 44;
    const auto p = estimate_bler(sc);
    CHECK(std::abs(p.bler - q) < 3.0 * p.ci95);
  }
}

TEST_CASE("thread count does not change the estimate") {
  auto sc = mlp_scenario(2.0, 20000, 17);
  const auto one = estimate_bler(sc, {1});
  const auto four = estimate_bler(sc, {4});
  const auto many = estimate_bler(sc, {13});
  CHECK(one.errors == four.errors);
  CHECK(one.errors == many.errors);

  sc.attack = AttackKind::Jamming;
  sc.psr_db = -6.0;
  CHECK(estimate_bler(sc, {1}).errors == estimate_bler(sc, {3}).errors);
}

TEST_CASE("sweep over a grid") {
  auto sc = classical_scenario(0.0, 20000, 5);
  const std::vector<double> one{4.0};
  const auto single = sweep(sc, one);
  REQUIRE(single.points.size() == 1);
  CHECK(single.points[0].ebno_db == 4.0);
  CHECK(single.system == "classical");
  CHECK(single.attack == "none");
  CHECK(single.shift_policy == "none");

  const auto grid = ebno_range(0.0, 6.0);
  CHECK(grid.size() == 7);
  const auto curve = sweep(sc, grid);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].bler <= curve.points[i - 1].bler + curve.points[i - 1].ci95);
  }
  CHECK(curve.points.front().bler > curve.points.back().bler);
  CHECK(ebno_range(0.0, 10.0, 0.5).size() == 21);

  const std::vector<double> bad{2.0, 1.0};
  CHECK_THROWS_AS(sweep(sc, bad), ConfigError);
  CHECK_THROWS_AS(sweep(sc, std::vector<double>{}), ConfigError);
}

TEST_CASE("jamming degrades every system") {
  for (auto sc : {classical_scenario(8.0, 50000, 3), mlp_scenario(8.0, 50000, 3)}) {
    const auto clean = estimate_bler(sc);
    sc.attack = AttackKind::Jamming;
    sc.psr_db = -6.0;
    const auto jam = estimate_bler(sc);
    CHECK(jam.bler > clean.bler);
    CHECK(dominance(jam, clean) == Dominance::Greater);
  }
}

TEST_CASE("a fixed perturbation is the same vector in every trial") {
  auto sc = mlp_scenario(5.0, 1, 2);
  sc.attack = AttackKind::Perturbation;
  Rng rng(1);
  sc.perturbation = channel::awgn(14, 0.2, rng);
  for (std::uint64_t t = 0; t < 200; ++t) CHECK(trace_trial(sc, t).attack == sc.perturbation);

  sc.shift = ShiftPolicy::UniformCyclic;
  std::vector<int> seen(7, 0);
  for (std::uint64_t t = 0; t < 700; ++t) {
    const auto rec = trace_trial(sc, t);
    REQUIRE(rec.shift < 7);
    ++seen[rec.shift];
    CHECK(rec.attack == channel::cyclic_shift(sc.perturbation, rec.shift));
  }
  for (int c : seen) CHECK(c > 50);
}

TEST_CASE("scenario validation") {
  auto sc = classical_scenario(0.0, 10, 1);
  sc.shift = ShiftPolicy::UniformCyclic;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc.shift = ShiftPolicy::None;
  sc.attack = AttackKind::Jamming;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc.attack = AttackKind::Perturbation;
  sc.perturbation = Tensor::zeros(12);
  CHECK_THROWS_AS(estimate_bler(sc), ConfigError);
  sc.attack = AttackKind::None;
  sc.trials = 0;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  CHECK(parse_attack_kind("jamming") == AttackKind::Jamming);
  CHECK(parse_shift_policy("uniform_cyclic") == ShiftPolicy::UniformCyclic);
  CHECK_THROWS_AS(parse_attack_kind("laser"), ConfigError);
  CHECK_THROWS_AS(parse_shift_policy("random"), ConfigError);
}

TEST_CASE("CSV round trip and comparisons") {
  auto sc = classical_scenario(0.0, 5000, 8);
  const auto grid = ebno_range(0.0, 8.0, 2.0);
  auto clean = sweep(sc, grid);
  sc.id = "classical_jam";
  sc.attack = AttackKind::Jamming;
  sc.psr_db = -6.0;
  auto jam = sweep(sc, grid);

  std::ostringstream out;
  write_csv_header(out);
  write_csv_rows(out, clean);
  write_csv_rows(out, jam);
  CHECK(out.str().rfind("scenario_id,system,attack,shift_policy,psr_db,ebno_db,trials,errors,bler,ci95,seed,note\n", 0) == 0);
  std::istringstream in(out.str());
  const auto back = read_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].scenario_id == "classical_clean");
  CHECK(!back[0].psr_db);
  CHECK(*back[1].psr_db == -6.0);
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& orig = c == 0 ? clean : jam;
    REQUIRE(back[c].points.size() == orig.points.size());
    for (std::size_t i = 0; i < orig.points.size(); ++i) {
      CHECK(back[c].points[i].errors == orig.points[i].errors);
      CHECK(back[c].points[i].bler == orig.points[i].bler);
      CHECK(back[c].points[i].ci95 == orig.points[i].ci95);
      CHECK(back[c].points[i].ebno_db == orig.points[i].ebno_db);
    }
  }

  const std::vector<BlerCurve> curves{clean, jam};
  const std::vector<std::pair<std::string, std::string>> self{{"classical_jam", "classical_jam"}};
  const auto report = compare_report(curves, self);
  for (const auto& row : report.comparisons[0].rows) {
    CHECK(row.ratio == 1.0);
    CHECK(row.verdict == Dominance::Indistinct);
  }
  const std::vector<std::pair<std::string, std::string>> pair{{"classical_jam", "classical_clean"}};
  const auto r2 = compare_report(curves, pair);
  CHECK(r2.comparisons[0].rows[0].verdict == Dominance::Greater);
  CHECK(r2.to_text().find("classical_jam") != std::string::npos);
  CHECK(r2.to_json().find("\"ratio\"") != std::string::npos);

  const std::vector<std::pair<std::string, std::string>> unknown{{"nope", "classical_clean"}};
  try {
    compare_report(curves, unknown);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("classical_clean") != std::string::npos);
    CHECK(msg.find("classical_jam") != std::string::npos);
  }

  auto shorter = jam;
  shorter.points.pop_back();
  CHECK_THROWS_AS(compare(clean, shorter), ConfigError);

  std::istringstream bad("a,b\n");
  CHECK_THROWS_AS(read_csv(bad), ConfigError);
}
