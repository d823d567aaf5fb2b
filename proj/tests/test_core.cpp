#include <catch2/catch_amalgamated.hpp>

#include "fedmm/core.hpp"
#include "fedmm/rng.hpp"

using namespace fedmm;

namespace {
Vec make_vec(std::initializer_list<double> vals) {
  Vec v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("vec_axpy basics") {
  SECTION("zero scale is the identity on y") {
    const Vec r = vec_axpy(0.0, make_vec({1, 2}), make_vec({3, 4}));
    REQUIRE(r[0] == 3.0);
    REQUIRE(r[1] == 4.0);
  }
  SECTION("unit scale adds") {
    const Vec r = vec_axpy(1.0, make_vec({1, 1}), make_vec({0, 0}));
    REQUIRE(r[0] == 1.0);
    REQUIRE(r[1] == 1.0);
  }
  SECTION("hand-checked combination") {
    const Vec r = vec_axpy(-2.0, make_vec({1, -1}), make_vec({2, 2}));
    REQUIRE(r[0] == 0.0);
    REQUIRE(r[1] == 4.0);
  }
  SECTION("dimension mismatch names both dims") {
    try {
      vec_axpy(1.0, make_vec({1, 2, 3}), make_vec({1, 2}));
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      const std::string msg = e.what();
      REQUIRE(msg.find("3") != std::string::npos);
      REQUIRE(msg.find("2") != std::string::npos);
    }
  }
  SECTION("non-finite input rejected") {
    Vec bad = make_vec({1, 2});
    bad[0] = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(vec_axpy(1.0, bad, make_vec({0, 0})), NonFiniteError);
    REQUIRE_THROWS_AS(vec_axpy(std::nan(""), make_vec({1, 2}), make_vec({0, 0})), NonFiniteError);
  }
}

TEST_CASE("serial_mean is an ordered fold") {
  const std::vector<Vec> vs{make_vec({1, 2}), make_vec({3, 6})};
  const Vec m = serial_mean(vs);
  REQUIRE(m[0] == 2.0);
  REQUIRE(m[1] == 4.0);
}

TEST_CASE("RngStream derivation is definitional") {
  RngStream root(7);
  const RngStream child = root.derive(3);
  REQUIRE(child.root_seed() == 7);
  REQUIRE(child.path() == std::vector<std::int64_t>{3});

  SECTION("same (seed, path) gives identical draws") {
    RngStream a = RngStream(7).derive(3);
    RngStream b = RngStream(7).derive(3);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
  }
  SECTION("deriving twice with the same suffix is draw-for-draw identical") {
    RngStream a = child.derive(11);
    RngStream b = root.derive(3).derive(11);
    for (int i = 0; i < 100; ++i) REQUIRE(a.uniform01() == b.uniform01());
  }
}

TEST_CASE("sibling streams pass an independence smoke test") {
  RngStream root(1234);
  RngStream a = root.derive(0);
  RngStream b = root.derive(1);
  const int n = 10000;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform01(), y = b.uniform01();
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
    sab += x * y;
  }
  const double ma = sa / n, mb = sb / n;
  const double cov = sab / n - ma * mb;
  const double r = cov / std::sqrt((saa / n - ma * ma) * (sbb / n - mb * mb));
  REQUIRE(std::abs(r) < 0.05);
}

TEST_CASE("draw distributions behave") {
  RngStream s(99);
  SECTION("uniform01 stays in [0,1)") {
    for (int i = 0; i < 10000; ++i) {
      const double u = s.uniform01();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
    }
  }
  SECTION("normal has roughly unit moments") {
    double m = 0, m2 = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double x = s.normal();
      m += x;
      m2 += x * x;
    }
    m /= n;
    m2 /= n;
    REQUIRE(std::abs(m) < 0.05);
    REQUIRE(std::abs(m2 - 1.0) < 0.1);
  }
  SECTION("uniform_int respects bounds and is roughly flat") {
    std::vector<int> counts(10, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const auto k = s.uniform_int(10);
      REQUIRE(k >= 0);
      REQUIRE(k < 10);
      ++counts[static_cast<std::size_t>(k)];
    }
    for (int c : counts) REQUIRE(std::abs(c - n / 10) < 600);
  }
}

TEST_CASE("RunConfig validation") {
  RunConfig cfg;
  cfg.rounds = 0;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg.rounds = 1;
  cfg.metrics_every = 0;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg.metrics_every = 1;
  REQUIRE_NOTHROW(cfg.validate());
}
