#include <doctest.h>

#include <cstring>
#include <fstream>

#include "kmd/io.hpp"
#include "kmd/snapshots.hpp"
#include "support.hpp"

using namespace kmd;

namespace
{

LoadOptions raw_options()
{
  LoadOptions o;
  o.format = MatrixFormat::RawFloat64;
  return o;
}

LoadOptions header_transposed()
{
  LoadOptions o;
  o.header = true;
  o.transpose = true;
  return o;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream(path, std::ios::binary) << text;
}

SnapshotMatrix wrap(RealMatrix m)
{
  SnapshotMatrix x;
  x.data = std::move(m);
  return x;
}

} // namespace

TEST_CASE("load_matrix reads a minimal CSV")
{
  const auto dir = test::temp_dir("load_min");
  write_file(dir / "a.csv", "3.0,4.0\n");
  const auto x = load_matrix(dir / "a.csv");
  CHECK(x.rows() == 1);
  CHECK(x.cols() == 2);
  CHECK(x.data(0, 0) == 3.0);
  CHECK(x.data(0, 1) == 4.0);
}

TEST_CASE("load_matrix keeps the monthly SST layout")
{
  // 600 grid points x 1548 months.
  const auto dir = test::temp_dir("load_sst");
  test::Rng rng(11);
  const RealMatrix m = test::random_real(600, 1548, rng);
  write_csv(dir / "sst.csv", m);
  const auto x = load_matrix(dir / "sst.csv", {.grid = GridShape{10, 60}});
  CHECK(x.rows() == 600);
  CHECK(x.cols() == 1548);
  CHECK(x.data.col(1547) == m.col(1547));
}

TEST_CASE("raw-float64 round trip is bit-identical")
{
  const auto dir = test::temp_dir("raw");
  test::Rng rng(3);
  RealMatrix m = test::random_real(4, 5, rng);
  m(2, 3) = std::nextafter(1.0, 2.0);
  write_raw_float64(dir / "m.bin", m);
  CHECK(std::filesystem::file_size(dir / "m.bin") == 8 * 4 * 5);
  const auto x = load_matrix(dir / "m.bin", raw_options());
  REQUIRE(x.rows() == 4);
  REQUIRE(x.cols() == 5);
  CHECK(std::memcmp(x.data.data(), m.data(), sizeof(double) * 20) == 0);

  write_file(raw_header_path(dir / "m.bin"), R"({"rows": 4, "cols": 6})");
  CHECK_THROWS_AS(load_matrix(dir / "m.bin", raw_options()), InputError);
}

TEST_CASE("CSV round trip with 17 significant digits")
{
  const auto dir = test::temp_dir("csv_rt");
  test::Rng rng(5);
  for (int trial = 0; trial < 5; ++trial)
  {
    RealMatrix m = test::random_real(7, 9, rng);
    m *= std::pow(10.0, test::uniform(rng, -30, 30));
    write_csv(dir / "m.csv", m);
    const auto x = load_matrix(dir / "m.csv");
    CHECK((x.data - m).cwiseAbs().maxCoeff() <= 1e-12 * m.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("load_matrix rejects malformed input")
{
  const auto dir = test::temp_dir("load_bad");
  write_file(dir / "nonnum.csv", "1,2\n3,abc\n");
  CHECK_THROWS_AS(load_matrix(dir / "nonnum.csv"), InputError);
  write_file(dir / "single.csv", "1\n2\n3\n");
  CHECK_THROWS_AS(load_matrix(dir / "single.csv"), InputError);
  write_file(dir / "ragged.csv", "1,2\n3\n");
  CHECK_THROWS_AS(load_matrix(dir / "ragged.csv"), InputError);
  CHECK_THROWS_AS(load_matrix(dir / "missing.csv"), InputError);
}

TEST_CASE("load_matrix honours header and transpose flags")
{
  const auto dir = test::temp_dir("load_flags");
  write_file(dir / "t.csv", "a,b\n1,2\n3,4\n5,6\n");
  const auto x = load_matrix(dir / "t.csv", header_transposed());
  CHECK(x.rows() == 2);
  CHECK(x.cols() == 3);
  CHECK(x.data(1, 2) == 6.0);
}

TEST_CASE("apply_mask selects rows")
{
  RealMatrix m(4, 3);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const auto x = wrap(m);
  const auto masked = apply_mask(x, {true, false, true, false});
  REQUIRE(masked.rows() == 2);
  CHECK(masked.data.row(0) == m.row(0));
  CHECK(masked.data.row(1) == m.row(2));

  const auto same = apply_mask(x, {true, true, true, true});
  CHECK(same.data == m);

  CHECK_THROWS_AS(apply_mask(x, {true, false}), InputError);
  CHECK_THROWS_AS(apply_mask(x, {false, false, false, false}), InputError);
}

TEST_CASE("apply_mask matches a brute-force row filter")
{
  test::Rng rng(17);
  for (int trial = 0; trial < 20; ++trial)
  {
    const RealMatrix m = test::random_real(10, 3, rng);
    std::vector<bool> mask(10);
    std::bernoulli_distribution coin(0.5);
    for (auto&& b : mask)
    {
      b = coin(rng);
    }
    mask[static_cast<std::size_t>(trial % 10)] = true;

    std::vector<RealVector> expected;
    for (int i = 0; i < 10; ++i)
    {
      if (mask[static_cast<std::size_t>(i)])
      {
        expected.push_back(m.row(i).transpose());
      }
    }
    const auto masked = apply_mask(wrap(m), mask);
    REQUIRE(static_cast<std::size_t>(masked.rows()) == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
    {
      CHECK(masked.data.row(static_cast<Eigen::Index>(i)).transpose() == expected[i]);
    }
  }
}

TEST_CASE("apply_mask on an already-masked matrix")
{
  SnapshotMatrix x = wrap(RealMatrix::Random(6, 2));
  x.grid = GridShape{2, 3};
  const auto first = apply_mask(x, {true, true, false, true, false, true});
  const auto second = apply_mask(first, {true, false, false, true, false, true});
  REQUIRE(second.rows() == 3);
  CHECK(second.data.row(0) == x.data.row(0));
  CHECK(second.data.row(1) == x.data.row(3));
  CHECK(second.data.row(2) == x.data.row(5));
  CHECK_THROWS_AS(apply_mask(first, {true, true, true, true, false, true}), InputError);
}

TEST_CASE("validate accepts NaN only under the mask")
{
  SnapshotMatrix x = wrap(RealMatrix::Ones(3, 4));
  x.data(1, 2) = std::nan("");
  CHECK_THROWS_AS(x.validate(), InputError);
  const auto masked = apply_mask(x, {true, false, true});
  CHECK_NOTHROW(masked.validate());
}

TEST_CASE("stack_cycles shapes for the seasonal and annual pipelines")
{
  SnapshotMatrix x = wrap(RealMatrix::Zero(600, 1548));
  x.grid = GridShape{10, 60};

  const auto seasonal = stack_cycles(x, 3);
  CHECK(seasonal.rows() == 1800);
  CHECK(seasonal.cols() == 516);
  CHECK(seasonal.warnings.empty());
  CHECK(build_pairs(seasonal).Y.cols() == 515);
  CHECK(build_pairs(seasonal).Y.rows() == 1800);

  const auto annual = stack_cycles(x, 12);
  CHECK(annual.rows() == 7200);
  CHECK(annual.cols() == 129);
  CHECK(build_pairs(annual).Y.cols() == 128);
  CHECK_NOTHROW(annual.validate());
}

TEST_CASE("stack_cycles column layout and trailing drop")
{
  test::Rng rng(2);
  const RealMatrix m = test::random_real(3, 11, rng);
  const auto x = wrap(m);
  CHECK(stack_cycles(x, 1).data == m);

  const auto s = stack_cycles(x, 3);
  REQUIRE(s.cols() == 3);
  REQUIRE(s.rows() == 9);
  for (Eigen::Index j = 0; j < 3; ++j)
  {
    for (Eigen::Index k = 0; k < 3; ++k)
    {
      CHECK(s.data.block(k * 3, j, 3, 1) == m.col(j * 3 + k));
    }
  }
  REQUIRE(s.warnings.size() == 1);

  const auto back = unstack_cycles(s);
  CHECK(back.data == m.leftCols(9));

  CHECK_THROWS_AS(stack_cycles(x, 0), InputError);
  CHECK_THROWS_AS(stack_cycles(x, 12), InputError);
}

TEST_CASE("stack then unstack reproduces the retained columns")
{
  test::Rng rng(8);
  for (int trial = 0; trial < 25; ++trial)
  {
    const auto p = 1 + static_cast<Eigen::Index>(rng() % 6);
    const auto n = 2 + static_cast<Eigen::Index>(rng() % 30);
    const auto c = 1 + static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n));
    const RealMatrix m = test::random_real(p, n, rng);
    const auto s = stack_cycles(wrap(m), c);
    const auto kept = static_cast<Eigen::Index>(c) * (n / static_cast<Eigen::Index>(c));
    CHECK(unstack_cycles(s).data == m.leftCols(kept));
  }
}

TEST_CASE("build_pairs shifts by one column")
{
  RealMatrix m(1, 3);
  m << 1, 2, 3;
  const auto pair = build_pairs(wrap(m));
  CHECK(pair.Y == (RealMatrix(1, 2) << 1, 2).finished());
  CHECK(pair.Yplus == (RealMatrix(1, 2) << 2, 3).finished());

  const auto minimal = build_pairs(wrap(RealMatrix::Random(4, 2)));
  CHECK(minimal.Y.cols() == 1);
  CHECK(minimal.Yplus.cols() == 1);

  CHECK_THROWS_AS(build_pairs(wrap(RealMatrix::Random(4, 1))), InputError);
}

TEST_CASE("build_pairs index oracle")
{
  test::Rng rng(4);
  const RealMatrix m = test::random_real(5, 7, rng);
  const auto pair = build_pairs(wrap(m));
  for (Eigen::Index k = 0; k < 6; ++k)
  {
    for (Eigen::Index i = 0; i < 5; ++i)
    {
      CHECK(pair.Yplus(i, k) == m(i, k + 1));
      CHECK(pair.Y(i, k) == m(i, k));
    }
  }
}

TEST_CASE("subtract_mean")
{
  RealMatrix m(2, 3);
  m << 5, 5, 5, 1, 2, 3;
  const auto c = subtract_mean(wrap(m));
  CHECK(c.mean(0) == 5.0);
  CHECK(c.mean(1) == 2.0);
  CHECK(c.centered.data.row(0).isZero());
  CHECK(c.centered.data.row(1) == (Eigen::RowVector3d() << -1, 0, 1).finished());

  test::Rng rng(9);
  const RealMatrix r = test::random_real(6, 10, rng) * 50.0;
  const auto rc = subtract_mean(wrap(r));
  RealMatrix restored = rc.centered.data;
  restored.colwise() += rc.mean;
  CHECK((restored - r).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(rc.centered.data.rowwise().mean().cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("load_mask parses 0/1 values")
{
  const auto dir = test::temp_dir("mask");
  write_file(dir / "m.csv", "1,0,1\n0,1,1\n");
  const auto mask = load_mask(dir / "m.csv");
  CHECK(mask == std::vector<bool>{true, false, true, false, true, true});
  write_file(dir / "bad.csv", "1,2\n");
  CHECK_THROWS_AS(load_mask(dir / "bad.csv"), InputError);
}

TEST_CASE("format_double tokens")
{
  CHECK(io::format_double(INFINITY) == "inf");
  CHECK(io::format_double(-INFINITY) == "-inf");
  CHECK(io::format_double(std::nan("")) == "nan");
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::parse_double(" inf ") == INFINITY);
  CHECK(std::isnan(io::parse_double("nan")));
}
