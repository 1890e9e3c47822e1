#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gower/dataset.hpp"
#include "gower/error.hpp"
#include "oracles.hpp"

using namespace gower;

namespace {

Schema smoke_age() {
  return parse_schema("smoke = binary-symmetric [levels: 0, 1]\nage = numeric\n");
}

Schema ordinal_schema() { return parse_schema("o = ordinal [levels: low < mid < high]\n"); }

}  // namespace

TEST(Schema, ParsesKindsAndLevels) {
  const Schema s = parse_schema(
      "# comment\n"
      "a = binary-asymmetric [levels: no, yes]\n"
      "b = nominal [levels: x, y, z]\n"
      "\n"
      "c = ordinal [levels: low < mid < high]\n"
      "d = numeric\n");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].kind, ColumnKind::kBinaryAsymmetric);
  EXPECT_EQ(s[0].levels, (std::vector<std::string>{"no", "yes"}));
  EXPECT_EQ(s[1].levels.size(), 3u);
  EXPECT_EQ(s[2].kind, ColumnKind::kOrdinal);
  EXPECT_EQ(s[2].levels[2], "high");
  EXPECT_EQ(s[3].kind, ColumnKind::kNumeric);
  EXPECT_EQ(parse_schema(format_schema(s)), s);
}

TEST(Schema, RejectsMalformedDeclarations) {
  EXPECT_THROW(parse_schema("a = binary-symmetric [levels: x, y, z]\n"), Error);
  EXPECT_THROW(parse_schema("a = nominal [levels: x, x]\n"), Error);
  EXPECT_THROW(parse_schema("a = nominal [levels: x, ]\n"), Error);
  EXPECT_THROW(parse_schema("a = fancy\n"), Error);
  EXPECT_THROW(parse_schema("a = nominal\n"), Error);
}

TEST(LoadTable, SmokerExample) {
  const DataTable t = load_table("smoke,age\n1,15\n1,78\n", smoke_age());
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 2u);
  for (std::size_t u = 0; u < 2; ++u)
    for (std::size_t c = 0; c < 2; ++c) EXPECT_FALSE(t.is_missing(u, c));
  EXPECT_EQ(t.value(1, 1), 78.0);
}

TEST(LoadTable, EmptyFieldAndNaAreMissing) {
  const DataTable t = load_table("smoke,age\n,20\n0,NA\n", smoke_age());
  EXPECT_TRUE(t.is_missing(0, 0));
  EXPECT_FALSE(t.is_missing(0, 1));
  EXPECT_TRUE(t.is_missing(1, 1));
}

TEST(LoadTable, AllMissingRowRejectedWithRowIndex) {
  try {
    load_table("smoke,age\n1,2\n,,\n", smoke_age());
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("all values missing"), std::string::npos);
    ASSERT_TRUE(e.row().has_value());
    EXPECT_EQ(*e.row(), 2u);
  }
  EXPECT_THROW(load_table("smoke,age\n,\n", smoke_age()), DataError);
}

TEST(LoadTable, Errors) {
  EXPECT_THROW(load_table("smoke,age\n2,15\n", smoke_age()), DataError);      // unknown label
  EXPECT_THROW(load_table("smoke,age\n1,abc\n", smoke_age()), DataError);     // bad number
  EXPECT_THROW(load_table("smoke,height\n1,15\n", smoke_age()), DataError);   // header mismatch
  EXPECT_THROW(load_table("smoke,age\n1,15,3\n", smoke_age()), DataError);    // field count
}

TEST(LoadTable, HeaderOrderFollowsSchema) {
  const DataTable t = load_table("age,smoke\n15,1\n", smoke_age());
  EXPECT_EQ(t.column_schema(0).name, "smoke");
  EXPECT_EQ(t.value(0, 0), 1.0);
  EXPECT_EQ(t.value(0, 1), 15.0);
}

TEST(LoadTable, SerializeRoundTripsValues) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const DataTable t = oracle::random_table(rng, 7, 4, 0.2);
    const DataTable back = load_table(serialize_table(t), t.schema());
    ASSERT_EQ(back.rows(), t.rows());
    for (std::size_t c = 0; c < t.cols(); ++c)
      for (std::size_t u = 0; u < t.rows(); ++u) {
        ASSERT_EQ(back.is_missing(u, c), t.is_missing(u, c));
        if (!t.is_missing(u, c)) ASSERT_EQ(back.value(u, c), t.value(u, c));
      }
  }
  // Awkward doubles survive too.
  const DataTable t(parse_schema("x = numeric\n"), {make_column({0.1, 1e-300, -123456.789e10})});
  const DataTable back = load_table(serialize_table(t), t.schema());
  for (std::size_t u = 0; u < 3; ++u) EXPECT_EQ(back.value(u, 0), t.value(u, 0));
}

TEST(ColumnRange, Examples) {
  const Schema s = parse_schema("x = numeric\n");
  EXPECT_EQ(column_range(DataTable(s, {make_column({15, 78, 100})}), 0), 85.0);
  EXPECT_EQ(column_range(DataTable(s, {make_column({5, 5, 5})}), 0), 0.0);
  EXPECT_EQ(column_range(DataTable(s, {make_column({-2, 3, oracle::kNaN, 7})}), 0), 9.0);
  EXPECT_THROW(column_range(DataTable(s, {make_column({oracle::kNaN, oracle::kNaN})}), 0), Error);
}

TEST(KrTransform, Examples) {
  const Schema s = ordinal_schema();
  const auto z = kr_transform(DataTable(s, {make_column({0, 2, 1})}), 0);
  EXPECT_EQ(z, (std::vector<double>{0.0, 1.0, 0.5}));

  const auto z2 = kr_transform(DataTable(s, {make_column({0, 0, 0, 2})}), 0);
  EXPECT_EQ(z2, (std::vector<double>{0.0, 0.0, 0.0, 1.0}));

  const Schema five = parse_schema("o = ordinal [levels: a < b < c < d < e]\n");
  const auto z3 = kr_transform(DataTable(five, {make_column({0, 1, 2, 3, 4})}), 0);
  EXPECT_EQ(z3, (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
}

TEST(KrTransform, ObservedVersusDeclaredMaximum) {
  const Schema five = parse_schema("o = ordinal [levels: a < b < c < d < e]\n");
  const DataTable t(five, {make_column({0, 1, 2})});
  EXPECT_EQ(kr_transform(t, 0), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(kr_transform(t, 0, {.declared_levels = true}),
            (std::vector<double>{0.0, 0.25, 0.5}));
}

TEST(KrTransform, SingleObservedLevelIsAnError) {
  EXPECT_THROW(kr_transform(DataTable(ordinal_schema(), {make_column({1, 1})}), 0), Error);
}

TEST(KrTransform, MissingStaysMissing) {
  const auto z = kr_transform(DataTable(ordinal_schema(), {make_column({0, oracle::kNaN, 2})}), 0);
  EXPECT_TRUE(std::isnan(z[1]));
}

TEST(PodaniRanks, Examples) {
  const Schema s = ordinal_schema();
  EXPECT_EQ(podani_ranks(DataTable(s, {make_column({0, 0, 2})}), 0),
            (std::vector<double>{1.5, 1.5, 3.0}));
  EXPECT_EQ(podani_ranks(DataTable(s, {make_column({0, 1, 2})}), 0),
            (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_EQ(podani_ranks(DataTable(s, {make_column({1, 1, 1, 1})}), 0),
            (std::vector<double>(4, 2.5)));
}

TEST(Validate, Reports) {
  const Schema s = parse_schema("x = numeric\ny = numeric\nc = nominal [levels: a, b]\n");
  const DataTable constant(s, {make_column({5, 5, 5, 5}), make_column({1, 2, 3, 4}),
                               make_column({0, 1, 0, 1})});
  const auto r1 = validate(constant);
  EXPECT_TRUE(r1.columns[0].zero_range);
  EXPECT_FALSE(r1.clean());
  EXPECT_FALSE(r1.fatal());
  ASSERT_FALSE(r1.warnings.empty());
  EXPECT_NE(r1.warnings[0].find("zero range"), std::string::npos);

  const DataTable clean(s, {make_column({1, 5, 3, 4}), make_column({1, 2, 3, 4}),
                            make_column({0, 1, 0, 1})});
  EXPECT_TRUE(validate(clean).clean());

  const DataTable quarter(s, {make_column({1, oracle::kNaN, 3, 4}), make_column({1, 2, 3, 4}),
                              make_column({0, 1, 0, 1})});
  EXPECT_DOUBLE_EQ(validate(quarter).columns[0].missing_rate, 0.25);

  const DataTable single(s, {make_column({1, 2, 3, 4}), make_column({1, 2, 3, 4}),
                             make_column({1, 1, 1, 1})});
  EXPECT_TRUE(validate(single).columns[2].single_level);

  const DataTable hole(s, {make_column({1, oracle::kNaN, 3}), make_column({1, oracle::kNaN, 3}),
                           make_column({0, oracle::kNaN, 1})});
  const auto r2 = validate(hole);
  EXPECT_TRUE(r2.fatal());
  EXPECT_EQ(r2.all_missing_rows, (std::vector<std::size_t>{2}));
}

// Properties over random tables.
TEST(DatasetProperties, KrInUnitIntervalAndOrderPreserving) {
  std::mt19937_64 rng(11);
  const Schema s = parse_schema("o = ordinal [levels: a < b < c < d < e < f]\n");
  std::uniform_int_distribution<int> lvl(0, 5);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(9);
    for (auto& x : v) x = lvl(rng);
    if (*std::min_element(v.begin(), v.end()) == *std::max_element(v.begin(), v.end())) continue;
    const auto z = kr_transform(DataTable(s, {make_column(v)}), 0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      ASSERT_GE(z[i], 0.0);
      ASSERT_LE(z[i], 1.0);
      for (std::size_t j = 0; j < v.size(); ++j)
        if (v[i] < v[j]) ASSERT_LT(z[i], z[j]);
    }
  }
}

TEST(DatasetProperties, PodaniRanksSumAndMatchOracle) {
  std::mt19937_64 rng(12);
  const Schema s = parse_schema("o = ordinal [levels: a < b < c < d]\n");
  std::uniform_int_distribution<int> lvl(0, 3);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(1 + rep % 12);
    std::vector<double> observed;
    for (auto& x : v) {
      x = unif(rng) < 0.2 ? oracle::kNaN : lvl(rng);
      if (!std::isnan(x)) observed.push_back(x);
    }
    if (observed.empty()) continue;
    const auto r = podani_ranks(DataTable(s, {make_column(v)}), 0);
    const auto expected = oracle::ranks(observed);
    double sum = 0;
    std::size_t q = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (std::isnan(v[i])) {
        ASSERT_TRUE(std::isnan(r[i]));
        continue;
      }
      ASSERT_EQ(r[i], expected[q++]);
      sum += r[i];
    }
    const double k = static_cast<double>(observed.size());
    ASSERT_EQ(sum, k * (k + 1) / 2);
  }
}
