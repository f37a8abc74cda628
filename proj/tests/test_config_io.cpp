#include "pabf/config.hpp"
#include "pabf/driver.hpp"
#include "pabf/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <random>
#include <sstream>

using namespace pabf;

namespace {

std::string message_of(const std::string &text) {
  try {
    parse_config(text, "t.conf");
  } catch (const ConfigError &e) {
    return e.what();
  }
  return "";
}

std::string read_error(const std::string &csv) {
  std::istringstream in(csv);
  try {
    read_vector_field(in, "f.csv");
  } catch (const ConfigError &e) {
    return e.what();
  }
  return "";
}

std::string field_csv(const VectorField2 &f, std::span<const double> counts = {}) {
  std::ostringstream o;
  write_vector_field(o, f, counts);
  return o.str();
}

} // namespace

TEST(Config, TrimerDefaults) {
  const RunConfig c = parse_config("system = trimer\n");
  EXPECT_EQ(c.beta, 1.0);
  EXPECT_EQ(c.n_particles, 100u);
  EXPECT_EQ(c.box_length, 15.0);
  EXPECT_EQ(c.dt, 2.5e-4);
  EXPECT_EQ(c.replicas, 100u);
  EXPECT_EQ(c.grid, Grid2(-0.2, 1.2, 50));
  EXPECT_EQ(c.potential.epsilon_prime, 0.1);
  EXPECT_EQ(c.potential.cos_theta0, 1.0 / 3.0);
  EXPECT_EQ(c.transitions_low, c.potential.d1 + 1.0);
  EXPECT_EQ(c.transitions_high, c.potential.d1 + 3.0);
}

TEST(Config, SystemSelectsDefaultsRegardlessOfPosition) {
  const RunConfig c = parse_config("run.replicas = 7\nsystem = toy_a\n");
  EXPECT_EQ(c.system, SystemKind::toy_a);
  EXPECT_TRUE(c.grid.periodic());
  EXPECT_EQ(c.replicas, 7u);
}

TEST(Config, CommentsAndBlankLines) {
  const RunConfig c = parse_config("# header\n\n  system = toy_b   # trailing\nbeta = 2.5\n\t\n");
  EXPECT_EQ(c.system, SystemKind::toy_b);
  EXPECT_EQ(c.beta, 2.5);
  EXPECT_EQ(c.toy_system().beta, 2.5);
  EXPECT_EQ(c.toy_system().kind, ToyKind::toy_b);
}

TEST(Config, UnknownKeyIsNamedWithItsLine) {
  const std::string m = message_of("system = trimer\nrun.dtt = 0.1\n");
  EXPECT_NE(m.find("unknown key 'run.dtt'"), std::string::npos) << m;
  EXPECT_NE(m.find("t.conf:2"), std::string::npos) << m;
}

TEST(Config, MalformedLines) {
  EXPECT_NE(message_of("beta 1\n").find("t.conf:1: expected 'key = value'"), std::string::npos);
  EXPECT_NE(message_of("beta = \n").find("has no value"), std::string::npos);
  EXPECT_NE(message_of("beta = 1\nbeta = 2\n").find("repeated"), std::string::npos);
  EXPECT_NE(message_of("beta = one\n").find("cannot parse 'one'"), std::string::npos);
  EXPECT_NE(message_of("run.replicas = 3.5\n").find("run.replicas"), std::string::npos);
  EXPECT_NE(message_of("system = dimer\n").find("unknown system"), std::string::npos);
  EXPECT_NE(message_of("mode = fast\n").find("unknown mode"), std::string::npos);
  EXPECT_NE(message_of("projection.weighted = maybe\n").find("true or false"), std::string::npos);
}

TEST(Config, ValidationRejectsBadValues) {
  EXPECT_THROW(parse_config("run.dt = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("beta = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("run.total_time = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("run.replicas = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("grid.n_bins = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("grid.xi_max = -0.5\n"), ConfigError);
  EXPECT_THROW(parse_config("trimer.n_particles = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("potential.omega = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("transitions.low = 5\n"), ConfigError);
  EXPECT_THROW(parse_config("projection.stride = 0\n"), ConfigError);
}

TEST(Config, SystemAndGridCombinations) {
  EXPECT_THROW(parse_config("grid.boundary = periodic\n"), ConfigError);
  EXPECT_THROW(parse_config("system = toy_a\ngrid.boundary = neumann\n"), ConfigError);
  EXPECT_THROW(parse_config("system = toy_a\ngrid.xi_max = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("system = toy_b\ngrid.boundary = periodic\n"), ConfigError);
  EXPECT_NO_THROW(parse_config("system = toy_a\ngrid.xi_min = -0.5\ngrid.xi_max = 0.5\n"));
}

TEST(Config, EchoRoundTripsForShippedConfigs) {
  for (const char *name : {"trimer_full.conf", "trimer_desk.conf", "toy_a.conf", "toy_b.conf"}) {
    const RunConfig c = load_config(std::string(PABF_CONFIG_DIR) + "/" + name);
    const std::string text = to_text(c);
    EXPECT_EQ(to_text(parse_config(text)), text) << name;
  }
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/x.conf"), ConfigError); }

TEST(Format, ShortestRoundTrip) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20000; ++k) {
    double v;
    std::uint64_t bits = rng();
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    const std::string s = format_double(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back), bits) << s;
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.5e-4), "0.00025");
}

TEST(FieldIo, VectorFieldRoundTripIsBitExact) {
  std::mt19937_64 rng(2);
  for (Boundary b : {Boundary::neumann, Boundary::periodic}) {
    const Grid2 g(-0.2, 1.2, 9, b);
    VectorField2 f = test::random_field(g, rng);
    std::vector<double> counts(g.bin_count());
    for (std::size_t k = 0; k < counts.size(); ++k) {
      counts[k] = static_cast<double>(rng() % 4);
      f.valid[k] = counts[k] > 0;
    }
    std::istringstream in(field_csv(f, counts));
    const FieldFile back = read_vector_field(in);
    EXPECT_EQ(back.field.grid, g);
    EXPECT_EQ(back.field.values, f.values);
    EXPECT_EQ(back.field.valid, f.valid);
    EXPECT_EQ(back.counts, counts);
  }
}

TEST(FieldIo, ScalarFieldRoundTripIsBitExact) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  ScalarField a(Grid2(0.0, 1.0, 7));
  for (auto &v : a.nodes) v = n(rng);
  std::ostringstream o;
  write_scalar_field(o, a);
  std::istringstream in(o.str());
  const ScalarField back = read_scalar_field(in);
  EXPECT_EQ(back.grid, a.grid);
  EXPECT_EQ(back.nodes, a.nodes);
}

TEST(FieldIo, ParseErrorsCarryLineNumbers) {
  const Grid2 g(0.0, 1.0, 2);
  const std::string good = field_csv(VectorField2(g));
  EXPECT_NE(read_error("").find("f.csv: empty file"), std::string::npos);
  EXPECT_NE(read_error("\n\n").find("empty file"), std::string::npos);
  EXPECT_NE(read_error("i,j\n").find("f.csv:1:"), std::string::npos);
  EXPECT_NE(read_error("# grid xi_min=0 xi_max=1\n").find("n_bins"), std::string::npos);
  EXPECT_NE(read_error("# grid xi_min=0 xi_max=1 n_bins=2\nx,y\n").find("f.csv:2: expected header"), std::string::npos);

  std::string bad = good;
  bad.replace(bad.find("0,1,"), 4, "0,1,x,");
  EXPECT_NE(read_error(bad).find("f.csv:4: expected 7 columns"), std::string::npos) << read_error(bad);

  std::string nan_value = good;
  nan_value.replace(nan_value.rfind(",0,0"), 4, ",0,z");
  EXPECT_NE(read_error(nan_value).find("f.csv:6: cannot parse F2"), std::string::npos) << read_error(nan_value);

  const std::string truncated = good.substr(0, good.rfind("1,1,"));
  EXPECT_NE(read_error(truncated).find("missing bin (1,1)"), std::string::npos);

  const std::string doubled = good + "0,0,0.25,0.25,1,0,0\n";
  EXPECT_NE(read_error(doubled).find("f.csv:7: bin (0,0) appears twice"), std::string::npos);

  std::string range = good;
  range.replace(range.rfind("1,1,"), 4, "2,1,");
  EXPECT_NE(read_error(range).find("out of range"), std::string::npos);
}

TEST(Schedule, DiagnosticSteps) {
  EXPECT_EQ(diagnostic_steps(0, 20), (std::vector<std::int64_t>{0}));
  EXPECT_EQ(diagnostic_steps(3, 10), (std::vector<std::int64_t>{0, 1, 2, 3}));
  const auto s = diagnostic_steps(1000, 20);
  ASSERT_EQ(s.size(), 21u);
  EXPECT_EQ(s[1], 50);
  EXPECT_EQ(s.back(), 1000);
}
