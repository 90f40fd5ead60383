#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "nomapair/scenario.hpp"

namespace nomapair {
namespace {

SystemConfig small_config(int M = 3, int N = 5, int L = 6) {
  SystemConfig c;
  c.num_near = M;
  c.num_far = N;
  c.num_antennas = L;
  return c;
}

TEST(Scenario, SameSeedIsBitIdentical) {
  const Scenario a = generate_scenario(small_config(), 7);
  const Scenario b = generate_scenario(small_config(), 7);
  EXPECT_TRUE(a == b);
  const Scenario c = generate_scenario(small_config(), 8);
  EXPECT_FALSE(a == c);
}

TEST(Scenario, Shape) {
  const Scenario s = generate_scenario(small_config(), 1);
  ASSERT_EQ(s.channels.size(), 8u);
  for (const auto& h : s.channels) EXPECT_EQ(h.size(), 6);
  EXPECT_EQ(s.noise_powers.size(), 8u);
  EXPECT_EQ(s.placements.size(), 8u);
  EXPECT_NO_THROW(s.validate());
}

TEST(Scenario, PathLossUsesKilometres) {
  // 140 + 37.6 log10(0.05)
  EXPECT_NEAR(path_loss_db(50.0), 140.0 + 37.6 * std::log10(0.05), 1e-12);
  EXPECT_NEAR(path_loss_db(50.0), 91.08, 0.01);
  EXPECT_NEAR(path_loss_db(1000.0), 140.0, 1e-12);
  EXPECT_THROW(path_loss_db(0.0), std::domain_error);
}

TEST(Scenario, NoisePower) {
  // -174 dBm/Hz over 20 MHz
  const double dbm = noise_power_dbm(SystemConfig{});
  EXPECT_NEAR(dbm, -174.0 + 10.0 * std::log10(20e6), 1e-12);
  EXPECT_NEAR(dbm_to_watt(dbm) / (1e-3 * std::pow(10.0, dbm / 10.0)), 1.0, 1e-14);
  EXPECT_NEAR(dbm_to_watt(30.0), 1.0, 1e-15);
  EXPECT_NEAR(watt_to_dbm(0.01), 10.0, 1e-12);
}

TEST(Scenario, UnitVarianceFading) {
  Rng rng(2024);
  const int L = 6, draws = 10000;
  double acc = 0.0;
  for (int k = 0; k < draws; ++k) {
    double g2 = 0.0;
    for (int l = 0; l < L; ++l) g2 += std::norm(rng.complex_normal());
    acc += g2 / L;
  }
  EXPECT_NEAR(acc / draws, 1.0, 0.05);
}

TEST(Scenario, PlacementZonesOverManySeeds) {
  const SystemConfig c = small_config();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Scenario s = generate_scenario(c, seed);
    for (int u = 0; u < s.num_users(); ++u) {
      const auto& p = s.placements[static_cast<std::size_t>(u)];
      const double r = std::hypot(p.x_m, p.y_m);
      EXPECT_NEAR(r, p.distance_m, 1e-9);
      if (u < s.M()) {
        ASSERT_EQ(p.zone, Zone::near);
        ASSERT_GE(r, c.min_bs_distance_m - 1e-9) << "seed " << seed;
        ASSERT_LE(r, c.inner_radius_m + 1e-9) << "seed " << seed;
      } else {
        ASSERT_EQ(p.zone, Zone::far);
        ASSERT_GT(r, c.inner_radius_m) << "seed " << seed;
        ASSERT_LE(r, c.cell_radius_m + 1e-9) << "seed " << seed;
      }
    }
  }
}

TEST(Scenario, AreaUniformRadius) {
  EXPECT_DOUBLE_EQ(detail::area_uniform_radius(5.0, 50.0, 0.0), 5.0);
  EXPECT_DOUBLE_EQ(detail::area_uniform_radius(5.0, 50.0, 1.0), 50.0);
  // median radius splits the annulus area in half
  EXPECT_NEAR(detail::area_uniform_radius(0.0, 2.0, 0.5), std::sqrt(2.0), 1e-15);
}

TEST(Scenario, NormalizeDividesBySigma) {
  Scenario s = generate_scenario(small_config(1, 1, 2), 3);
  s.noise_powers = {4.0, 4.0};
  s.channels[0] = CVector(2);
  s.channels[0] << std::complex<double>(2.0, 0.0), std::complex<double>(0.0, 0.0);
  const Scenario n = normalize(s);
  EXPECT_DOUBLE_EQ(n.channels[0](0).real(), 1.0);
  EXPECT_DOUBLE_EQ(n.channels[0](1).real(), 0.0);
  EXPECT_DOUBLE_EQ(n.noise_powers[0], 1.0);
  EXPECT_DOUBLE_EQ(n.pmax_w, s.pmax_w);
  EXPECT_TRUE(n.normalized);
  EXPECT_THROW(normalize(n), std::domain_error);
}

TEST(Scenario, NormalizeRejectsZeroNoise) {
  Scenario s = generate_scenario(small_config(1, 1, 1), 3);
  s.noise_powers[1] = 0.0;
  EXPECT_THROW(normalize(s), std::domain_error);
}

TEST(Scenario, FileRoundTripIsExact) {
  const Scenario s = generate_scenario(small_config(), 11);
  const auto path = std::filesystem::temp_directory_path() / "nomapair_scenario_roundtrip.json";
  save_scenario(s, path.string());
  const Scenario back = load_scenario(path.string());
  std::filesystem::remove(path);
  EXPECT_TRUE(back == s);

  const Scenario n = normalize(s);
  EXPECT_TRUE(parse_scenario(to_json(n).dump()) == n);
}

TEST(Scenario, MissingChannelsNamesTheField) {
  auto j = to_json(generate_scenario(small_config(), 1));
  j.erase("channels");
  try {
    parse_scenario(j.dump());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "channels");
    EXPECT_NE(std::string(e.what()).find("channels"), std::string::npos);
  }
}

TEST(Scenario, WrongChannelLengthIsRejected) {
  auto j = to_json(generate_scenario(small_config(), 1));
  j["channels"][2]["re"].push_back(0.0);
  j["channels"][2]["im"].push_back(0.0);
  try {
    parse_scenario(j.dump());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "channels[2]");
  }
}

TEST(Scenario, VersionMismatch) {
  auto j = to_json(generate_scenario(small_config(), 1));
  j["version"] = 2;
  try {
    parse_scenario(j.dump());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "version");
    EXPECT_NE(std::string(e.what()).find("unsupported"), std::string::npos);
  }
}

TEST(Scenario, MalformedTextReportsLine) {
  try {
    parse_scenario("{\n\"version\": 1,\n  oops\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Scenario, ConfigValidation) {
  SystemConfig c;
  c.num_far = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SystemConfig{};
  c.inner_radius_m = 200.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(generate_scenario(c, 1), std::invalid_argument);
}

}  // namespace
}  // namespace nomapair
