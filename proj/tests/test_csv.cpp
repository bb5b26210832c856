#include "doctest.h"

#include "csv.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

TEST_CASE("values survive a write and read") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  csvio::Table t;
  t.header = {"z", "a", "b", "i"};
  t.columns.resize(4);
  for (int r = 0; r < 500; ++r)
    for (int k = 0; k < 4; ++k) t.columns[k].push_back(u(rng) * std::pow(10.0, 40 * u(rng)));
  t.columns[0].push_back(0.1);
  t.columns[1].push_back(std::numeric_limits<double>::denorm_min());
  t.columns[2].push_back(-0.0);
  t.columns[3].push_back(std::numeric_limits<double>::max());

  std::stringstream ss;
  csvio::write(ss, t);
  const std::string text = ss.str();
  CHECK(text.rfind("z,a,b,i\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);

  const auto back = csvio::read(ss);
  REQUIRE(back.header == t.header);
  REQUIRE(back.rows() == t.rows());
  for (int k = 0; k < 4; ++k)
    for (std::size_t r = 0; r < t.rows(); ++r) REQUIRE(back.columns[k][r] == t.columns[k][r]);
  CHECK(std::signbit(back.column("b").back()));
}

TEST_CASE("malformed input") {
  std::stringstream ragged("x,A\n1,2\n3\n");
  CHECK_THROWS(csvio::read(ragged));
  std::stringstream text("x,A\n1,abc\n");
  CHECK_THROWS(csvio::read(text));
  std::stringstream empty("");
  CHECK_THROWS(csvio::read(empty));
  std::stringstream crlf("x,A\r\n1,2\r\n");
  const auto t = csvio::read(crlf);
  CHECK(t.column("A").front() == 2.0);
  CHECK_THROWS(t.column("I"));
}
