#include <algorithm>

#include "doctest.h"
#include "mtcd2d/metrics.hpp"
#include "support.hpp"

using namespace mtcd2d;
using testing::kCases;

namespace {

AssignmentMap with_unreachable(std::size_t n, std::size_t dead) {
  AssignmentMap a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i].device_id = static_cast<NodeId>(i);
    a[i].mode = i < dead ? Mode::Unreachable : Mode::Cellular;
  }
  return a;
}

}  // namespace

TEST_CASE("availability") {
  CHECK(availability(with_unreachable(100, 14)) == doctest::Approx(0.86));
  CHECK(availability(with_unreachable(100, 0)) == 1.0);
  CHECK_THROWS_AS(availability(AssignmentMap{}), ConfigError);
}

TEST_CASE("battery_cdf: single step and ten-year fraction") {
  const std::vector<double> same(7, 4000.0);
  const auto c = battery_cdf(same);
  REQUIRE(c.points.size() == 7);
  for (const auto& p : c.points) CHECK(p.days == 4000.0);
  CHECK(c.points.back().fraction == 1.0);
  CHECK(c.frac_meeting_10y == 1.0);

  const std::vector<double> mixed{0.0, 3649.99, 3650.0, 9000.0};
  CHECK(battery_cdf(mixed).frac_meeting_10y == 0.5);
  CHECK_THROWS_AS(battery_cdf(std::vector<double>{}), ConfigError);
}

TEST_CASE("effective lives count unreachable devices as zero") {
  auto a = with_unreachable(3, 1);
  std::vector<EnergyReport> r(3);
  for (std::size_t i = 0; i < 3; ++i) {
    r[i].device_id = static_cast<NodeId>(i);
    r[i].battery_life_days = 5000.0;
  }
  const auto lives = effective_battery_lives(r, a);
  CHECK(lives == std::vector<double>{0.0, 5000.0, 5000.0});
  r.pop_back();
  CHECK_THROWS_AS(effective_battery_lives(r, a), ContractViolation);
}

TEST_CASE("property: recount oracles, monotone and normalised CDF") {
  for (int c = 0; c < kCases; ++c) {
    Rng rng(derive_seed(606, static_cast<std::uint64_t>(c)));
    const auto n = 1 + static_cast<std::size_t>(rng.below(300));
    AssignmentMap a(n);
    std::vector<double> lives(n);
    std::size_t served = 0, meeting = 0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i].device_id = static_cast<NodeId>(i);
      a[i].mode = static_cast<Mode>(rng.below(4));
      if (a[i].mode != Mode::Unreachable) ++served;
      lives[i] = rng.below(5) == 0 ? 3650.0 : rng.uniform(0.0, 8000.0);
      if (lives[i] >= 3650.0) ++meeting;
    }
    const double av = availability(a);
    REQUIRE(av == static_cast<double>(served) / static_cast<double>(n));
    REQUIRE(av >= 0.0);
    REQUIRE(av <= 1.0);
    const auto cdf = battery_cdf(lives);
    REQUIRE(cdf.frac_meeting_10y == static_cast<double>(meeting) / static_cast<double>(n));
    REQUIRE(cdf.points.size() == n);
    REQUIRE(cdf.points.back().fraction == 1.0);
    for (std::size_t i = 1; i < n; ++i) {
      REQUIRE(cdf.points[i].days >= cdf.points[i - 1].days);
      REQUIRE(cdf.points[i].fraction >= cdf.points[i - 1].fraction);
    }
    // each point's fraction is the share of lives not above it, up to ties
    const auto k = static_cast<std::size_t>(rng.below(n));
    const auto at_most = static_cast<std::size_t>(
        std::count_if(lives.begin(), lives.end(), [&](double v) { return v <= cdf.points[k].days; }));
    REQUIRE(cdf.points[k].fraction <= static_cast<double>(at_most) / static_cast<double>(n) + 1e-12);
  }
}
