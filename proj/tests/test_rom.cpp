#include <doctest.h>

#include <bit>
#include <cfloat>
#include <numeric>

#include "kmd/rom.hpp"
#include "support.hpp"

using namespace kmd;
using namespace std::complex_literals;

namespace
{

DecompositionResult raw_result(const ComplexMatrix& modes, const std::vector<Complex>& lambdas,
                               const std::vector<Complex>& b)
{
  DecompositionResult r;
  r.rank = modes.cols();
  r.modes = modes;
  r.eigenvalues = Eigen::Map<const ComplexVector>(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
  r.amplitudes = Eigen::Map<const ComplexVector>(b.data(), static_cast<Eigen::Index>(b.size()));
  for (Eigen::Index j = 0; j < r.rank; ++j)
  {
    r.original_index.push_back(static_cast<std::size_t>(j));
  }
  return r;
}

ReducedOrderModel single(Complex lambda, const ComplexVector& mode, Complex b)
{
  return make_model(raw_result(mode, {lambda}, {b}));
}

SnapshotPair pair_of(const RealMatrix& x)
{
  SnapshotMatrix s;
  s.data = x;
  return build_pairs(s);
}

} // namespace

TEST_CASE("make_model sorts by amplitude and keeps consistent stats")
{
  test::Rng rng(81);
  const ComplexMatrix modes = test::random_complex(5, 3, rng);
  const auto model = make_model(raw_result(modes, {0.9, 0.5i, std::exp(-0.1)}, {1.0, 3.0, 2.0}));
  REQUIRE(model.size() == 3);
  CHECK(model.spatial_dim == 5);
  CHECK(model.tuples[0].original_index == 1);
  CHECK(model.tuples[1].original_index == 2);
  CHECK(model.tuples[2].original_index == 0);
  for (const auto& t : model.tuples)
  {
    const auto s = mode_stats(t.eigenvalue);
    CHECK(t.magnitude == s.magnitude);
    CHECK(std::abs(t.magnitude - std::abs(t.eigenvalue)) <= 1e-12);
    CHECK((t.e_folding == s.e_folding || (std::isinf(t.e_folding) && std::isinf(s.e_folding))));
    CHECK((t.period == s.period || (std::isinf(t.period) && std::isinf(s.period))));
  }
  DecompositionResult bare = raw_result(modes, {0.9, 0.5, 0.2}, {1.0, 1.0, 1.0});
  bare.amplitudes.resize(0);
  CHECK_THROWS_AS(make_model(bare), InputError);
}

TEST_CASE("integer_power matches repeated multiplication")
{
  const Complex l = 0.97 * std::exp(0.3i);
  Complex direct = 1.0;
  for (std::size_t k = 0; k < 64; ++k)
  {
    CHECK(std::abs(integer_power(l, k) - direct) <= 1e-13);
    direct *= l;
  }
  CHECK(integer_power(0.0, 0) == Complex(1.0));
  CHECK(integer_power(2.0, 10) == Complex(1024.0));
}

TEST_CASE("reconstruct at k zero and stationary modes")
{
  test::Rng rng(82);
  const ComplexMatrix modes = test::random_complex(6, 1, rng);
  const Complex l = 0.8 * std::exp(0.5i);
  const auto model = make_model(raw_result((ComplexMatrix(6, 2) << modes, modes.conjugate()).finished(),
                                           {l, std::conj(l)}, {Complex(1, 2), Complex(1, -2)}));
  const ComplexVector expected = modes * Complex(1, 2) + modes.conjugate() * Complex(1, -2);
  CHECK((reconstruct(model, 0).values - expected.real()).norm() <= 1e-12);

  RealVector v(3);
  v << 1, -2, 5;
  const auto stationary = single(1.0, v.cast<Complex>(), 1.0);
  for (std::size_t k : {0u, 1u, 17u, 1000u})
  {
    CHECK(reconstruct(stationary, k).values == v);
  }
}

TEST_CASE("full model reconstructs exact-rank training data")
{
  test::Rng rng(83);
  const std::vector<Complex> lambdas{0.98 * std::exp(0.2i)};
  const ComplexMatrix w = test::random_complex(10, 1, rng);
  RealMatrix x = test::oscillatory_series(lambdas, w, {2.0}, 30);
  RealVector fixed = test::random_real(10, 1, rng);
  for (Eigen::Index k = 0; k < 30; ++k)
  {
    x.col(k) += std::pow(0.95, static_cast<double>(k)) * fixed;
  }
  const auto pair = pair_of(x);
  const auto model = make_model(fit_amplitudes(exact_dmd(pair), pair.Y));
  REQUIRE(model.size() == 3);
  for (std::size_t k = 0; k < 30; ++k)
  {
    const auto r = reconstruct(model, k);
    const auto col = x.col(static_cast<Eigen::Index>(k));
    CHECK((r.values - col).norm() <= 1e-8 * col.norm());
    CHECK(r.imaginary_residual <= 1e-6);
  }
}

TEST_CASE("temporal_dynamics examples")
{
  ComplexVector v = ComplexVector::Ones(2);
  const auto constant = temporal_dynamics(single(1.0, v, 5.0), 0, 4);
  CHECK(constant.values == RealMatrix::Constant(1, 4, 5.0));
  CHECK(constant.times == std::vector<std::size_t>{0, 1, 2, 3});

  const auto quarter = temporal_dynamics(single(1i, v, 1.0), 0, 4);
  RealMatrix expected(1, 4);
  expected << 1, 0, -1, 0;
  CHECK((quarter.values - expected).cwiseAbs().maxCoeff() <= 1e-15);

  CHECK_THROWS_AS(temporal_dynamics(single(1.0, v, 1.0), 3, 3), InputError);
}

TEST_CASE("collapsed damped pair follows the closed-form cosine")
{
  test::Rng rng(84);
  const Complex l = 0.9 * std::exp(1i * std::numbers::pi / 4.0);
  const Complex b(0.6, -1.1);
  const ComplexMatrix w = test::random_complex(4, 1, rng);
  const auto model = make_model(raw_result((ComplexMatrix(4, 2) << w, w.conjugate()).finished(),
                                           {std::conj(l), l}, {std::conj(b), b}));
  const auto full = temporal_dynamics(model, 0, 30);
  CHECK(full.values.rows() == 2);
  const auto collapsed = temporal_dynamics(model, 0, 30, true);
  REQUIRE(collapsed.values.rows() == 1);
  CHECK(model.tuples[collapsed.tuple_index[0]].eigenvalue.imag() > 0.0);
  for (Eigen::Index t = 0; t < 30; ++t)
  {
    const double td = static_cast<double>(t);
    const double oracle = 2.0 * std::pow(0.9, td) * std::abs(b) * std::cos(std::numbers::pi * td / 4.0 + std::arg(b));
    CHECK(std::abs(collapsed.values(0, t) - oracle) <= 1e-10);
  }
}

TEST_CASE("forecast examples")
{
  RealVector v(3);
  v << 1, 2, 3;
  const auto flat = forecast(single(1.0, v.cast<Complex>(), 1.0), 5, 10);
  CHECK(flat.values.cols() == 5);
  for (Eigen::Index k = 1; k < 5; ++k)
  {
    CHECK(flat.values.col(k) == flat.values.col(0));
  }

  const auto decay = forecast(single(0.5, v.cast<Complex>(), 1.0), 50, 0);
  for (Eigen::Index k = 1; k < 50; ++k)
  {
    const double ratio = decay.values.col(k).norm() / decay.values.col(k - 1).norm();
    CHECK(std::abs(ratio - 0.5) <= 1e-10);
  }

  CHECK_THROWS_AS(forecast(single(1.0, v.cast<Complex>(), 1.0), 0, 10), InputError);

  const auto blowup = forecast(single(10.0, v.cast<Complex>(), 1.0), 2, 400);
  CHECK_FALSE(blowup.warnings.empty());
  CHECK(blowup.values.maxCoeff() == DBL_MAX);
}

TEST_CASE("forecast matches a held-out tail")
{
  test::Rng rng(85);
  const std::vector<Complex> lambdas{0.97 * std::exp(0.4i)};
  const ComplexMatrix w = test::random_complex(8, 1, rng);
  const RealMatrix x = test::oscillatory_series(lambdas, w, {1.5}, 40);
  const RealMatrix train = x.leftCols(30);
  const auto pair = pair_of(train);
  const auto model = make_model(fit_amplitudes(exact_dmd(pair), pair.Y));
  const auto f = forecast(model, 10, 30);
  for (Eigen::Index k = 0; k < 10; ++k)
  {
    const auto truth = x.col(30 + k);
    CHECK((f.values.col(k) - truth).norm() <= 1e-6 * truth.norm());
  }
}

TEST_CASE("mode grids without a mask")
{
  GridLayout layout{{10, 60}, std::nullopt, 1};
  const auto grids = mode_grids(ComplexVector::Ones(600), layout);
  REQUIRE(grids.size() == 1);
  CHECK(grids[0].rows() == 10);
  CHECK(grids[0].cols() == 60);
  CHECK(grids[0] == RealMatrix::Ones(10, 60));
  CHECK_THROWS_AS(mode_grids(ComplexVector::Ones(599), layout), InputError);
}

TEST_CASE("mode grids with a mask match index bookkeeping")
{
  test::Rng rng(86);
  const GridShape shape{4, 7};
  std::vector<bool> mask(shape.size());
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < mask.size(); ++i)
  {
    mask[i] = rng() % 3 != 0;
    if (mask[i])
    {
      kept.push_back(i);
    }
  }
  const auto p = static_cast<Eigen::Index>(kept.size());
  const ComplexVector mode = test::random_complex(p, 1, rng);
  KoopmanTuple t;
  t.mode = mode;
  const auto grids = mode_magnitude_grid(t, GridLayout{shape, mask, 1});
  REQUIRE(grids.size() == 1);
  std::size_t next = 0;
  for (std::size_t cell = 0; cell < shape.size(); ++cell)
  {
    const auto i = static_cast<Eigen::Index>(cell / shape.n_lon);
    const auto j = static_cast<Eigen::Index>(cell % shape.n_lon);
    if (next < kept.size() && kept[next] == cell)
    {
      CHECK(grids[0](i, j) == std::abs(mode(static_cast<Eigen::Index>(next))));
      ++next;
    }
    else
    {
      CHECK(std::isnan(grids[0](i, j)));
    }
  }
}

TEST_CASE("mode grids for stacked cycles")
{
  test::Rng rng(87);
  const GridShape shape{2, 3};
  const ComplexVector mode = test::random_complex(18, 1, rng);
  const GridLayout layout{shape, std::nullopt, 3};
  const auto slots = mode_grids(mode, layout, ModeComponent::Real);
  REQUIRE(slots.size() == 3);
  for (std::size_t s = 0; s < 3; ++s)
  {
    for (Eigen::Index c = 0; c < 6; ++c)
    {
      CHECK(slots[s](c / 3, c % 3) == mode(static_cast<Eigen::Index>(s) * 6 + c).real());
    }
  }
  const auto mean = mode_grids(mode, layout, ModeComponent::Imag, true);
  REQUIRE(mean.size() == 1);
  for (Eigen::Index c = 0; c < 6; ++c)
  {
    const double avg = (mode(c).imag() + mode(6 + c).imag() + mode(12 + c).imag()) / 3.0;
    CHECK(std::abs(mean[0](c / 3, c % 3) - avg) <= 1e-15);
  }
}

TEST_CASE("top tuples by amplitude minimize the k zero error for orthogonal modes")
{
  test::Rng rng(88);
  const auto d = test::real_dictionary(12, 6, rng);
  const std::vector<Complex> b{0.3, 2.0, -1.2, 0.8, 3.1, -0.1};
  const auto model = make_model(raw_result(d.modes, d.eigenvalues, b));
  RealVector y0 = RealVector::Zero(12);
  for (Eigen::Index j = 0; j < 6; ++j)
  {
    y0 += d.modes.col(j).real() * b[static_cast<std::size_t>(j)].real();
  }
  auto error_of = [&](const std::vector<std::size_t>& picks) {
    ReducedOrderModel sub = model;
    sub.tuples.clear();
    for (const auto i : picks)
    {
      sub.tuples.push_back(model.tuples[i]);
    }
    return (reconstruct(sub, 0).values - y0).norm();
  };
  for (std::size_t m = 1; m < 6; ++m)
  {
    std::vector<std::size_t> top(m);
    std::iota(top.begin(), top.end(), 0);
    const double best = error_of(top);
    for (unsigned subset = 0; subset < 64; ++subset)
    {
      if (static_cast<std::size_t>(std::popcount(subset)) != m)
      {
        continue;
      }
      std::vector<std::size_t> picks;
      for (std::size_t i = 0; i < 6; ++i)
      {
        if (subset & (1u << i))
        {
          picks.push_back(i);
        }
      }
      CHECK(best <= error_of(picks) + 1e-12);
    }
  }
}
