#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "srd/csv.hpp"

namespace {

TEST(Csv, NumbersRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::nextafter(1.0, 2.0)}) {
    EXPECT_EQ(srd::csv::parse_number(srd::csv::number(v)), v);
  }
  EXPECT_TRUE(std::isinf(srd::csv::parse_number(srd::csv::number(std::numeric_limits<double>::infinity()))));
  EXPECT_TRUE(std::isnan(srd::csv::parse_number(srd::csv::number(std::nan("")))));
  EXPECT_THROW(srd::csv::parse_number("1.5x"), std::invalid_argument);
}

TEST(Csv, QuotedFieldsSurviveReadBack) {
  std::ostringstream os;
  {
    srd::csv::Writer w(os, {"name", "value"});
    w.row({"plain", "1"});
    w.row({"a, \"quoted\" field", "2"});
    EXPECT_THROW(w.row({"too", "many", "fields"}), std::invalid_argument);
  }
  std::istringstream is(os.str());
  const auto t = srd::csv::read(is);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][0], "a, \"quoted\" field");
  EXPECT_EQ(t.number(1, "value"), 2.0);
  EXPECT_THROW(t.column("missing"), std::out_of_range);
}

}  // namespace
