#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sthm/io/config.hpp"
#include "sthm/io/container.hpp"
#include "sthm/io/csv.hpp"

using namespace sthm;
using namespace sthm::io;

TEST(Container, IdentityLayout) {
  const std::string bytes = encode_array(std::vector<double>{1.0, 0.0, 0.0, 1.0}, {2, 2});
  const std::string head = "STHM1\ndtype=f8 shape=2,2 order=row-major endian=little\n";
  ASSERT_EQ(bytes.compare(0, head.size(), head), 0);
  ASSERT_EQ(bytes.size(), head.size() + 32);
  const unsigned char one[8] = {0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
  for (int b = 0; b < 8; ++b) {
    EXPECT_EQ(static_cast<unsigned char>(bytes[head.size() + b]), one[b]);
    EXPECT_EQ(static_cast<unsigned char>(bytes[head.size() + 8 + b]), 0);
  }
}

TEST(Container, ComplexRoundTripIsBitwise) {
  std::vector<std::complex<double>> v;
  for (int i = 0; i < 24; ++i) v.push_back({std::sin(1.1 * i) * 1e-300, std::cos(0.3 * i) * 1e300});
  v.push_back({-0.0, std::numeric_limits<double>::denorm_min()});
  const auto a = decode_array(encode_array(v, {5, 5}));
  ASSERT_EQ(a.dtype, DType::c16);
  EXPECT_EQ(a.shape, (std::vector<std::size_t>{5, 5}));
  ASSERT_EQ(a.complex.size(), v.size());
  EXPECT_EQ(std::memcmp(a.complex.data(), v.data(), v.size() * sizeof(v[0])), 0);
}

TEST(Container, RejectsBadHeadersAndValues) {
  std::string bytes = encode_array(std::vector<double>{1.0, 2.0}, {2});
  std::string bad = bytes;
  bad.replace(bad.find("f8"), 2, "f4");
  EXPECT_THROW(decode_array(bad), FormatError);
  EXPECT_THROW(decode_array("STHM2\n" + bytes.substr(6)), FormatError);
  EXPECT_THROW(decode_array(bytes.substr(0, bytes.size() - 1)), FormatError);
  EXPECT_THROW(encode_array(std::vector<double>{1.0, std::nan("")}, {2}), PoisonedOutput);
  EXPECT_THROW(encode_array(std::vector<std::complex<double>>{{1.0, INFINITY}}, {1}), PoisonedOutput);
  EXPECT_THROW(encode_array(std::vector<double>{1.0, 2.0}, {3}), ConsistencyError);
}

TEST(Csv, RoundTripsDoubles) {
  CsvTable t({"a", "b"});
  const double x = 0.1 + 0.2, y = -1.2345678901234567e-300;
  t.add({format_double(x), format_double(y)});
  const auto u = CsvTable::parse(t.str());
  EXPECT_EQ(u.number(0, "a"), x);
  EXPECT_EQ(u.number(0, "b"), y);
  EXPECT_THROW(u.column("c"), FormatError);
  EXPECT_THROW(format_double(INFINITY), PoisonedOutput);
  EXPECT_THROW(t.add({"1"}), ConsistencyError);
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config_text(R"({"K": [4, 8], "mode": "both", "rho_cut": 3.5, "grid": {"n": 128}})");
  EXPECT_EQ(c.K, (std::vector<double>{4.0, 8.0}));
  EXPECT_TRUE(c.near() && c.far());
  EXPECT_EQ(c.rho_cut, 3.5);
  EXPECT_EQ(c.grid_n, 128);
  EXPECT_EQ(c.grid_L, 8.0);
  const auto back = parse_config(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(parse_config_text("{}").rho_cut, 0.0);
}

TEST(Config, ValidationNamesTheField) {
  auto field_of = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return e.field;
    }
    return std::string("none");
  };
  EXPECT_EQ(field_of(R"({"order_m": 1})"), "order_m");
  EXPECT_EQ(field_of(R"({"K": [8, 8]})"), "K");
  EXPECT_EQ(field_of(R"({"surface_radius": 1.05})"), "surface_radius");
  EXPECT_EQ(field_of(R"({"grid": {"n": 100}})"), "grid.n");
  EXPECT_EQ(field_of(R"({"colour": 1})"), "colour");
  EXPECT_EQ(field_of(R"({"N": "many"})"), "N");
  EXPECT_EQ(field_of(R"({"mode": "sideways"})"), "mode");
  EXPECT_EQ(field_of("{"), "config");
  try {
    parse_config_text(R"({"order_m": 1})");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("assumption A"), std::string::npos);
  }
}
