#include <doctest.h>

#include <cmath>

#include "uwbsim/channel.hpp"
#include "uwbsim/rng.hpp"

using namespace uwbsim;

TEST_CASE("all-zero profile is the identity and never loses") {
  ChannelProfile profile;
  RngStream rng = RngStream::derive(1, {2});
  for (int i = 0; i < 1000; ++i) {
    auto out = perturb_path(7.3, profile, rng);
    REQUIRE(out.has_value());
    CHECK(*out == 7.3);
  }
}

TEST_CASE("sample statistics match the configured noise") {
  ChannelProfile profile;
  profile.noise_sigma = 0.05;
  RngStream rng = RngStream::derive(3, {4});

  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    auto out = perturb_path(5.0, profile, rng);
    REQUIRE(out.has_value());
    sum += *out;
    sum_sq += *out * *out;
  }
  const double mean = sum / n;
  const double std_dev = std::sqrt(sum_sq / n - mean * mean);
  CHECK(std::abs(mean - 5.0) < 0.001);
  CHECK(std::abs(std_dev - 0.05) < 0.002);
}

TEST_CASE("NLOS bias is a deterministic offset") {
  ChannelProfile profile;
  profile.nlos = true;
  profile.nlos_bias = 0.4;
  RngStream rng = RngStream::derive(5, {6});
  auto out = perturb_path(5.0, profile, rng);
  REQUIRE(out.has_value());
  CHECK(*out == 5.4);
}

TEST_CASE("multipath and NLOS never shorten the expected path") {
  RngStream rng = RngStream::derive(7, {8});
  ChannelProfile profile;
  profile.noise_sigma = 0.05;
  profile.nlos = true;
  profile.nlos_bias = 0.2;
  profile.outlier_prob = 0.1;
  profile.outlier_extra = 1.5;

  const double true_distance = 4.0;
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    sum += perturb_path(true_distance, profile, rng).value();
  }
  CHECK(sum / n > true_distance);
}

TEST_CASE("perturbed path is clamped at zero") {
  ChannelProfile profile;
  profile.noise_sigma = 10.0;
  RngStream rng = RngStream::derive(9, {10});
  for (int i = 0; i < 5000; ++i) {
    CHECK(perturb_path(0.1, profile, rng).value() >= 0.0);
  }
}

TEST_CASE("loss probability one drops every packet") {
  ChannelProfile profile;
  profile.loss_prob = 1.0;
  RngStream rng = RngStream::derive(11, {12});
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(perturb_path(5.0, profile, rng).has_value());
  }
}

TEST_CASE("identical stream state replays identical perturbations") {
  ChannelProfile profile;
  profile.noise_sigma = 0.05;
  profile.outlier_prob = 0.05;
  profile.outlier_extra = 0.7;
  profile.loss_prob = 0.1;

  RngStream a = RngStream::derive(13, {14});
  RngStream b = RngStream::derive(13, {14});
  for (int i = 0; i < 1000; ++i) {
    const auto oa = perturb_path(6.0, profile, a);
    const auto ob = perturb_path(6.0, profile, b);
    CHECK(oa.has_value() == ob.has_value());
    if (oa && ob) {
      CHECK(*oa == *ob);
    }
  }
}

TEST_CASE("toggling the NLOS flag leaves the draw sequence untouched") {
  ChannelProfile los;
  los.noise_sigma = 0.05;
  los.loss_prob = 0.01;
  ChannelProfile nlos = los;
  nlos.nlos = true;
  nlos.nlos_bias = 0.4;

  RngStream a = RngStream::derive(15, {16});
  RngStream b = RngStream::derive(15, {16});
  for (int i = 0; i < 1000; ++i) {
    const auto oa = perturb_path(6.0, los, a);
    const auto ob = perturb_path(6.0, nlos, b);
    CHECK(oa.has_value() == ob.has_value());
    if (oa && ob) {
      CHECK(*ob == doctest::Approx(*oa + 0.4).epsilon(1e-12));
    }
  }
}
