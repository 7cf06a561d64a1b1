#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <unistd.h>

#include <gtest/gtest.h>

#include "ica/io.hpp"
#include "ica/rng.hpp"
#include "oracles.hpp"

using ica::MatrixXd;
using Eigen::Index;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("ica_io_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static void write_raw(const std::string& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }

  std::filesystem::path dir_;
};

MatrixXd awkward_matrix() {
  MatrixXd X(3, 4);
  X << 1.0, -2.5, 1e-300, std::numeric_limits<double>::denorm_min(),
      0.0, -0.0, 3.141592653589793, 1e308,
      -1e-308, 123456789.123456789, 2.2250738585072014e-308, -7.0;
  return X;
}

}  // namespace

TEST_F(IoTest, CsvRoundTripsSeventeenDigits) {
  const MatrixXd X = awkward_matrix();
  const std::string p = path("m.csv");
  ica::save_matrix_csv(X, p);
  const MatrixXd back = ica::load_matrix_csv(p);
  ASSERT_EQ(back.rows(), X.rows());
  ASSERT_EQ(back.cols(), X.cols());
  // %.17g prints a shortest-exact representation of every double, so the
  // round trip is bitwise.
  for (Index i = 0; i < X.rows(); ++i)
    for (Index j = 0; j < X.cols(); ++j) EXPECT_EQ(back(i, j), X(i, j)) << i << "," << j;
}

TEST_F(IoTest, BinaryRoundTripsBitExactly) {
  ica::Rng rng(1);
  MatrixXd X = oracle::random_matrix(5, 37, rng, 100.0);
  X(0, 0) = -0.0;
  X(1, 1) = std::numeric_limits<double>::denorm_min();
  X(2, 2) = std::numeric_limits<double>::max();
  const std::string p = path("m.icab");
  ica::save_matrix_binary(X, p);
  const MatrixXd back = ica::load_matrix_binary(p);
  ASSERT_EQ(back.rows(), 5);
  ASSERT_EQ(back.cols(), 37);
  for (Index i = 0; i < X.rows(); ++i)
    for (Index j = 0; j < X.cols(); ++j) {
      EXPECT_EQ(back(i, j), X(i, j));
      EXPECT_EQ(std::signbit(back(i, j)), std::signbit(X(i, j)));
    }
}

TEST_F(IoTest, ExtensionDispatchMatchesExplicitCalls) {
  ica::Rng rng(2);
  const MatrixXd X = oracle::random_matrix(3, 8, rng);
  const std::string csv = path("d.csv");
  const std::string bin = path("d.icab");
  ica::save_matrix(X, csv);
  ica::save_matrix(X, bin);
  EXPECT_LE((ica::load_matrix(csv) - ica::load_matrix_csv(csv)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((ica::load_matrix(bin) - ica::load_matrix_binary(bin)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(ica::save_matrix(X, path("d.txt")), ica::format_error);
  EXPECT_THROW(ica::load_matrix(path("d.txt")), ica::format_error);
}

TEST_F(IoTest, CsvRejectsRaggedRowsWithLineNumber) {
  const std::string p = path("ragged.csv");
  write_raw(p, "1,2,3\n4,5\n");
  try {
    ica::load_matrix_csv(p);
    FAIL() << "expected format_error";
  } catch (const ica::format_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST_F(IoTest, CsvRejectsNonNumericTokens) {
  const std::string p = path("token.csv");
  write_raw(p, "1,2\n3,abc\n");
  try {
    ica::load_matrix_csv(p);
    FAIL() << "expected format_error";
  } catch (const ica::format_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST_F(IoTest, CsvRejectsEmptyFile) {
  const std::string p = path("empty.csv");
  write_raw(p, "");
  EXPECT_THROW(ica::load_matrix_csv(p), ica::format_error);
}

TEST_F(IoTest, MissingFileReportsPath) {
  try {
    ica::load_matrix_csv(path("nope.csv"));
    FAIL() << "expected format_error";
  } catch (const ica::format_error& e) {
    EXPECT_NE(std::string(e.what()).find("nope.csv"), std::string::npos);
  }
  EXPECT_THROW(ica::load_matrix_binary(path("nope.icab")), ica::format_error);
}

TEST_F(IoTest, BinaryRejectsBadMagic) {
  const std::string p = path("bad.icab");
  write_raw(p, std::string("NOTIT") + std::string(16, '\0'));
  try {
    ica::load_matrix_binary(p);
    FAIL() << "expected format_error";
  } catch (const ica::format_error& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos) << e.what();
  }
}

TEST_F(IoTest, BinaryRejectsTruncation) {
  ica::Rng rng(3);
  const MatrixXd X = oracle::random_matrix(4, 10, rng);
  const std::string full = path("full.icab");
  ica::save_matrix_binary(X, full);
  std::ifstream in(full, std::ios::binary);
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  const std::string cut = path("cut.icab");
  write_raw(cut, blob.substr(0, blob.size() - 7));
  try {
    ica::load_matrix_binary(cut);
    FAIL() << "expected format_error";
  } catch (const ica::format_error& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos) << e.what();
  }

  const std::string header_only = path("hdr.icab");
  write_raw(header_only, blob.substr(0, 12));  // magic + part of N
  EXPECT_THROW(ica::load_matrix_binary(header_only), ica::format_error);
}

TEST_F(IoTest, BinaryRejectsAbsurdDimensions) {
  std::string blob(ica::kBinaryMagic, 5);
  ica::detail::put_u64_le(blob, std::uint64_t{1} << 40);  // n far over the cap
  ica::detail::put_u64_le(blob, 4);
  const std::string p = path("huge.icab");
  write_raw(p, blob);
  EXPECT_THROW(ica::load_matrix_binary(p), ica::format_error);
}

TEST_F(IoTest, ScalarCodecsAreExactAndLittleEndian) {
  std::string buf;
  ica::detail::put_u64_le(buf, 0x0102030405060708ull);
  ASSERT_EQ(buf.size(), 8u);
  EXPECT_EQ(buf[0], '\x08');
  EXPECT_EQ(buf[7], '\x01');
  EXPECT_EQ(ica::detail::get_u64_le(reinterpret_cast<const unsigned char*>(buf.data())),
            0x0102030405060708ull);

  for (double v : {0.0, -0.0, 1.5, -1e308, std::numeric_limits<double>::denorm_min()}) {
    std::string fbuf;
    ica::detail::put_f64_le(fbuf, v);
    const double back =
        ica::detail::get_f64_le(reinterpret_cast<const unsigned char*>(fbuf.data()));
    EXPECT_EQ(back, v);
    EXPECT_EQ(std::signbit(back), std::signbit(v));
  }
}
