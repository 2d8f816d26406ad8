#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "gridclear/analysis.hpp"
#include "gridclear/error.hpp"

using namespace gridclear;
using namespace gridclear::testing;

TEST_CASE("under-bidding pays under uniform pricing") {
  const auto net = two_bus_network();
  const auto gens = two_bus_generators();
  const auto d = evaluate_bid_deviation(net, gens, two_bus_zonal_regime(), PricingScheme::uniform_smp, "A5", 70.0);
  CHECK(d.truthful_mw == doctest::Approx(0.0));
  CHECK(d.deviated_mw == doctest::Approx(50.0));
  CHECK(d.truthful_price == doctest::Approx(100.0));
  CHECK(d.deviated_price == doctest::Approx(100.0));
  CHECK(d.deviated_profit == doctest::Approx(250.0));
  CHECK(d.profit_delta() == doctest::Approx(250.0));
  // A5 at 95 displaces A3 at 75 for 50 MW.
  CHECK(d.welfare_delta() == doctest::Approx(-1000.0));
}

TEST_CASE("the same deviation loses money under nodal pricing") {
  const auto net = two_bus_network();
  const auto gens = two_bus_generators();
  const auto d = evaluate_bid_deviation(net, gens, two_bus_nodal_regime(), PricingScheme::nodal, "A5", 70.0);
  CHECK(d.truthful_price == doctest::Approx(75.0));
  CHECK(d.deviated_price == doctest::Approx(70.0));
  CHECK(d.deviated_mw == doctest::Approx(50.0));
  CHECK(d.deviated_profit == doctest::Approx(-1250.0));
  CHECK(d.profit_delta() <= 0.0);
  CHECK(d.welfare_delta() == doctest::Approx(-1000.0));
}

TEST_CASE("truthful offer changes nothing") {
  const auto net = two_bus_network();
  const auto gens = two_bus_generators();
  for (auto scheme : {PricingScheme::uniform_smp, PricingScheme::nodal}) {
    const auto reg = scheme == PricingScheme::nodal ? two_bus_nodal_regime() : two_bus_zonal_regime();
    const auto d = evaluate_bid_deviation(net, gens, reg, scheme, "A3", 75.0);
    CHECK(d.mw_delta() == 0.0);
    CHECK(d.price_delta() == 0.0);
    CHECK(d.profit_delta() == 0.0);
    CHECK(d.welfare_delta() == 0.0);
  }
  CHECK_THROWS_AS(
      evaluate_bid_deviation(net, gens, two_bus_zonal_regime(), PricingScheme::uniform_smp, "nobody", 1.0), Error);
}

TEST_CASE("deviated welfare never beats truthful welfare") {
  std::mt19937_64 rng(5);
  int changed = 0;
  for (int trial = 0; trial < 30; ++trial) {
    auto rc = random_case(rng, 5);
    const ConstraintRegime reg{"Z", ClearingMode::zonal, "ALL", true, 0, 0};
    const auto& g = rc.gens[static_cast<std::size_t>(trial) % rc.gens.size()];
    try {
      const auto d = evaluate_bid_deviation(rc.net, rc.gens, reg, PricingScheme::zonal, g.id, g.ic * 0.5);
      CHECK(d.welfare_delta() <= 1e-6);
      if (std::abs(d.mw_delta()) > 1e-6) ++changed;
    } catch (const Error& e) {
      CHECK(e.code() != ErrorCode::numerical);
    }
  }
  CHECK(changed > 0);
}

TEST_CASE("percentiles and price statistics") {
  std::vector<double> s(100);
  std::iota(s.begin(), s.end(), 1.0);
  const auto st = price_stats(s);
  CHECK(st.mean == doctest::Approx(50.5));
  CHECK(st.median == doctest::Approx(50.5));
  CHECK(st.p90 == doctest::Approx(90.1));
  CHECK(st.p10 == doctest::Approx(10.9));

  const std::vector<double> flat(7, 42.0);
  const auto fs = price_stats(flat);
  CHECK(fs.median == 42.0);
  CHECK(fs.p10 == 42.0);
  CHECK(fs.p90 == 42.0);
  for (double v : fs.normalized) CHECK(v == 1.0);

  const std::vector<double> two{0.0, 2.0};
  const auto ts = price_stats(two);
  CHECK(ts.mean == 1.0);
  CHECK(ts.normalized == std::vector<double>{0.0, 2.0});

  // Permutation invariance and scale equivariance.
  std::mt19937_64 rng(9);
  auto shuffled = s;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::vector<double> scaled;
  for (double v : shuffled) scaled.push_back(3.0 * v);
  const auto sc = price_stats(scaled);
  CHECK(sc.median == doctest::Approx(3.0 * st.median));
  CHECK(sc.p90 == doctest::Approx(3.0 * st.p90));

  CHECK_THROWS_AS(price_stats(std::vector<double>{}), Error);
  CHECK_THROWS_AS(price_stats(std::vector<double>{1.0, std::nan("")}), Error);
  CHECK_THROWS_AS(price_stats(std::vector<double>{-1.0, 1.0}), Error);
  CHECK(percentile({5.0}, 0.9) == 5.0);
}

TEST_CASE("price series CSV loading") {
  const auto dir = std::filesystem::temp_directory_path() / "gridclear_analysis_test";
  std::filesystem::create_directories(dir);
  const auto good = dir / "good.csv";
  std::ofstream(good) << "timestamp,price\n# comment\n2023-01-01T00,100.5\n2023-01-01T01,99\n";
  const auto s = load_price_series_csv(good.string());
  CHECK(s.prices == std::vector<double>{100.5, 99.0});
  CHECK(s.timestamps.front() == "2023-01-01T00");

  const auto bad = dir / "bad.csv";
  std::ofstream(bad) << "timestamp,price\nx,abc\n";
  try {
    load_price_series_csv(bad.string());
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
  CHECK_THROWS_AS(load_price_series_csv((dir / "missing.csv").string()), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("redispatch zone table") {
  RedispatchRecord rec;
  rec.gen_ids = {"a1", "a2", "b1"};
  rec.gen_zone = {0, 0, 1};
  rec.zones = {"A", "B"};
  rec.delta_mw = {{-20.0, 0.0}, {5.0, -10.0}, {15.0, 10.0}};
  rec.con_mwh = {5.0, 25.0};
  rec.coff_mwh = {30.0, 0.0};
  const auto t = redispatch_summary(rec);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].zone == "A");
  CHECK(t.rows[0].constrained_off_mwh == 30.0);
  CHECK(t.rows[1].constrained_on_mwh == 25.0);
  CHECK(t.total_on_mwh == t.total_off_mwh);
}
