#include "binclust/data.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace binclust;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

TEST(LoadCsv, ParsesNumericTable) {
  const auto path = write_temp("bc_numeric.csv", "a,b\n1.5,2\n-3,4.25\n0,1\n2,2\n");
  const Dataset ds = load_csv(path);
  EXPECT_EQ(ds.n(), 4);
  EXPECT_EQ(ds.cols(), 2);
  EXPECT_TRUE(ds.kinds[0].is_continuous());
  EXPECT_DOUBLE_EQ(ds.columns[0][1], -3.0);
  EXPECT_EQ(ds.names[1], "b");
}

TEST(LoadCsv, InfersBinaryColumnAsCategorical) {
  const auto path = write_temp("bc_binary.csv", "a,b\n0,0.5\n1,0.25\n0,0.1\n1,0.9\n");
  const Dataset ds = load_csv(path);
  ASSERT_TRUE(ds.kinds[0].is_categorical());
  EXPECT_EQ(ds.kinds[0].levels, 2);
  EXPECT_TRUE(ds.kinds[1].is_continuous());
}

TEST(LoadCsv, MissingValueIsAnError) {
  const auto with_na = write_temp("bc_na.csv", "a,b\n1,2\nNA,4\n");
  EXPECT_THROW(load_csv(with_na), MissingValueError);
  const auto with_empty = write_temp("bc_empty_cell.csv", "a,b\n1,2\n3,\n");
  EXPECT_THROW(load_csv(with_empty), MissingValueError);
}

TEST(LoadCsv, RejectsRaggedAndNonNumericAndEmpty) {
  EXPECT_THROW(load_csv(write_temp("bc_ragged.csv", "a,b\n1,2\n3\n")), CsvError);
  EXPECT_THROW(load_csv(write_temp("bc_token.csv", "a\n1\nfoo\n")), CsvError);
  EXPECT_THROW(load_csv(write_temp("bc_blank.csv", "")), CsvError);
  EXPECT_THROW(load_csv(write_temp("bc_headeronly.csv", "a,b\n")), CsvError);
}

TEST(LoadCsv, KindOverrideWins) {
  const auto path = write_temp("bc_override.csv", "a,b\n0,1\n1,2\n0,0\n");
  const Dataset ds = load_csv(path, parse_kind_spec("c,k3"));
  EXPECT_TRUE(ds.kinds[0].is_continuous());
  ASSERT_TRUE(ds.kinds[1].is_categorical());
  EXPECT_EQ(ds.kinds[1].levels, 3);
  EXPECT_THROW(load_csv(path, parse_kind_spec("c,k2")), std::invalid_argument);
  EXPECT_THROW(load_csv(path, parse_kind_spec("c")), std::invalid_argument);
}

TEST(LoadCsv, RoundTripPreservesValuesAndKinds) {
  const auto src = write_temp("bc_rt_src.csv",
                              "a,b,c\n0,1.25,2\n1,-0.5,1\n2,3.14159265358979,0\n1,2.5e-3,1\n");
  const Dataset ds = load_csv(src);
  const auto dst = std::filesystem::temp_directory_path() / "bc_rt_dst.csv";
  save_csv(ds, dst.string());
  const Dataset ds2 = load_csv(dst.string(), ds.kinds);
  ASSERT_EQ(ds2.n(), ds.n());
  ASSERT_EQ(ds2.cols(), ds.cols());
  for (int j = 0; j < ds.cols(); ++j) {
    EXPECT_EQ(ds2.kinds[j], ds.kinds[j]);
    for (int i = 0; i < ds.n(); ++i) EXPECT_EQ(ds2.columns[j][i], ds.columns[j][i]);
  }
}

TEST(InferKind, DependsOnlyOnValueMultiset) {
  const std::vector<double> a{3, 1, 2, 1, 3};
  std::vector<double> b = a;
  std::reverse(b.begin(), b.end());
  EXPECT_EQ(infer_kind(a), infer_kind(b));
  EXPECT_TRUE(infer_kind(a).is_categorical());
  EXPECT_EQ(infer_kind(a).levels, 4);
  EXPECT_TRUE(infer_kind({1.5, 2.0, 2.5}).is_continuous());
  EXPECT_TRUE(infer_kind({-1, 0, 1}).is_continuous());  // negatives cannot be levels
  EXPECT_TRUE(infer_kind({5, 5, 5}).is_continuous());   // single distinct value
  EXPECT_TRUE(infer_kind({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}).is_continuous());
}

TEST(ColumnSd, MatchesHandValues) {
  Dataset ds;
  ds.names = {"a", "b", "c"};
  ds.kinds = {VariableKind::continuous(), VariableKind::continuous(),
              VariableKind::continuous()};
  ds.columns = {{1, 1, 1, 1}, {0, 2, 0, 2}, {1, 2, 3, 4}};
  EXPECT_DOUBLE_EQ(column_sd(ds, 0), 0.0);
  Dataset two;
  two.names = {"x"};
  two.kinds = {VariableKind::continuous()};
  two.columns = {{0, 2}};
  EXPECT_NEAR(column_sd(two, 0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(column_sd(ds, 2), 1.2909944487358056, 1e-12);
}

TEST(ColumnSd, RejectsCategoricalAndTinyColumns) {
  Dataset ds;
  ds.names = {"a"};
  ds.kinds = {VariableKind::categorical(2)};
  ds.columns = {{0, 1, 0}};
  EXPECT_THROW(column_sd(ds, 0), std::invalid_argument);
  Dataset one;
  one.names = {"x"};
  one.kinds = {VariableKind::continuous()};
  one.columns = {{1.0}};
  EXPECT_THROW(column_sd(one, 0), std::invalid_argument);
}

TEST(Labels, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "bc_labels.csv";
  save_labels_csv({0, 2, 1, 1}, path.string());
  EXPECT_EQ(load_labels_csv(path.string()), (std::vector<int>{0, 2, 1, 1}));
}

}  // namespace
