#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lambdaflow/rng.hpp"
#include "lambdaflow/spectral.hpp"
#include "lambdaflow/torus.hpp"

using namespace lambdaflow;
namespace {
constexpr double kPi = std::numbers::pi;

ScalarField make_field(const TorusGrid& g, auto&& fn) {
    ScalarField f(g);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) {
        auto c = g.node_coords(i);
        std::vector<double> x(g.axes());
        for (int a = 0; a < g.axes(); ++a) x[a] = g.axis_coord(a, c[a]);
        f.v[i] = fn(x);
    }
    return f;
}
}  // namespace

TEST_CASE("grid bookkeeping") {
    auto g = TorusGrid::create(2, {8, 4, 2, 1});
    CHECK(g.total_nodes == 64);
    CHECK(g.strides == std::vector<std::ptrdiff_t>{8, 2, 1, 1});
    CHECK(g.frozen(3));
    CHECK_FALSE(g.frozen(0));
    CHECK(g.h_min_active() == doctest::Approx(1.0 / 8.0));
    CHECK(g.diameter() == doctest::Approx(1.0));  // sqrt(4)/2
    auto c = g.node_coords(63);
    CHECK(c == std::vector<int>{7, 3, 1, 0});
    CHECK_THROWS_AS(TorusGrid::create(2, {8, 4, 2}), InvalidStructureError);
    CHECK_THROWS_AS(TorusGrid::create(2, {8, 4, 0, 1}), InvalidStructureError);
}

TEST_CASE("integrate_mean: quadrature and determinism") {
    auto g = TorusGrid::create(1, {16, 8});
    ScalarField c5(g, 5.0);
    CHECK(integrate_mean(c5) == doctest::Approx(5.0));

    auto cosx = make_field(g, [](const auto& x) { return std::cos(2 * kPi * x[0]); });
    CHECK(std::abs(integrate_mean(cosx)) <= 1e-12);

    // linearity to rounding
    const CounterRng rng(1);
    ScalarField f(g), h(g);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) {
        f.v[i] = rng.normal(i, 0);
        h.v[i] = rng.normal(i, 1);
    }
    ScalarField combo(g);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) combo.v[i] = 2.0 * f.v[i] - 3.0 * h.v[i];
    CHECK(integrate_mean(combo) ==
          doctest::Approx(2.0 * integrate_mean(f) - 3.0 * integrate_mean(h)).epsilon(1e-13));
}

TEST_CASE("normalize") {
    auto g = TorusGrid::create(1, {32, 1});
    ScalarField c(g, 5.0);
    auto n0 = normalize(c);
    for (double v : n0.v) CHECK(v == 0.0);

    auto f = make_field(g, [](const auto& x) { return 3.0 + std::cos(2 * kPi * x[0]); });
    auto nf = normalize(f);
    CHECK(std::abs(integrate_mean(nf)) <= 1e-13 * (1.0 + field_sup_abs(f)));
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i)
        CHECK(nf.v[i] == doctest::Approx(std::cos(2 * kPi * (i / 32.0))).epsilon(1e-12));

    auto nn = normalize(nf);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i)
        CHECK(nn.v[i] == doctest::Approx(nf.v[i]).epsilon(1e-13));
}

TEST_CASE("complex hessian: single-mode oracle n=1") {
    auto g = TorusGrid::create(1, {32, 1});
    auto phi = make_field(g, [](const auto& x) { return std::cos(2 * kPi * x[0]); });
    auto H = complex_hessian(phi);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) {
        const double expect = -kPi * kPi * std::cos(2 * kPi * (i / 32.0));
        CHECK(H.node(i)[0].real() == doctest::Approx(expect).epsilon(1e-10));
        CHECK(H.node(i)[0].imag() == 0.0);
    }

    ScalarField constant(g, 3.0);
    auto Hc = complex_hessian(constant);
    for (const cplx& z : Hc.m) CHECK(std::abs(z) <= 1e-12);
}

TEST_CASE("complex hessian: mixed entry oracle n=2") {
    // phi = cos(2pi x1) cos(2pi y2): H_12 = i pi^2 sin(2pi x1) sin(2pi y2)
    auto g = TorusGrid::create(2, {16, 1, 1, 16});
    auto phi = make_field(
        g, [](const auto& x) { return std::cos(2 * kPi * x[0]) * std::cos(2 * kPi * x[3]); });
    auto H = complex_hessian(phi);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) {
        auto c = g.node_coords(i);
        const double sx = std::sin(2 * kPi * c[0] / 16.0);
        const double sy = std::sin(2 * kPi * c[3] / 16.0);
        const cplx expect(0.0, kPi * kPi * sx * sy);
        CHECK(std::abs(H.node(i)[0 * 2 + 1] - expect) <= 1e-10);
        CHECK(std::abs(H.node(i)[1 * 2 + 0] - std::conj(expect)) <= 1e-10);
    }
}

TEST_CASE("hermitian symmetry at every node") {
    auto g = TorusGrid::create(2, {8, 8, 8, 1});
    const CounterRng rng(4);
    ScalarField phi(g);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) phi.v[i] = rng.normal(i, 0);
    auto H = complex_hessian(phi);
    double sup = 0.0;
    for (const cplx& z : H.m) sup = std::max(sup, std::abs(z));
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) {
        const cplx* h = H.node(i);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                CHECK(std::abs(h[r * 2 + c] - std::conj(h[c * 2 + r])) <=
                      1e-12 * (1.0 + sup));
    }
}

TEST_CASE("holomorphic gradient oracles") {
    auto g = TorusGrid::create(1, {32, 32});
    auto phix = make_field(g, [](const auto& x) { return std::sin(2 * kPi * x[0]); });
    auto gx = holomorphic_gradient(phix);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) {
        auto c = g.node_coords(i);
        const double expect = kPi * std::cos(2 * kPi * c[0] / 32.0);
        CHECK(gx.node(i)[0].real() == doctest::Approx(expect).epsilon(1e-9));
        CHECK(std::abs(gx.node(i)[0].imag()) <= 1e-10);
        CHECK(gx.norm_sq.v[i] == doctest::Approx(expect * expect).epsilon(1e-9));
    }

    auto phiy = make_field(g, [](const auto& x) { return std::sin(2 * kPi * x[1]); });
    auto gy = holomorphic_gradient(phiy);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) {
        auto c = g.node_coords(i);
        const double expect = -kPi * std::cos(2 * kPi * c[1] / 32.0);
        CHECK(gy.node(i)[0].imag() == doctest::Approx(expect).epsilon(1e-9));
        CHECK(std::abs(gy.node(i)[0].real()) <= 1e-10);
    }

    ScalarField constant(g, 2.0);
    auto gc = holomorphic_gradient(constant);
    for (const cplx& z : gc.g) CHECK(std::abs(z) <= 1e-13);
}

TEST_CASE("trace identity: tr(ddbar phi) = Laplacian / 4 nodewise") {
    auto g = TorusGrid::create(2, {12, 6, 4, 1});
    const CounterRng rng(8);
    ScalarField phi(g);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) phi.v[i] = rng.normal(i, 0);

    Differentiator diff(g);
    FieldWorkspace ws = make_workspace(g);
    HermitianField H(g);
    complex_hessian(phi, diff, DerivMethod::spectral, H, ws);
    ScalarField lap(g);
    real_laplacian(phi, diff, DerivMethod::spectral, lap, ws);
    const double scale = field_sup_abs(lap) + 1.0;
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) {
        const cplx* h = H.node(i);
        const double tr = h[0].real() + h[3].real();
        CHECK(std::abs(tr - 0.25 * lap.v[i]) <= 1e-12 * scale);
    }
}

TEST_CASE("spectral vs central4: band-limited agreement and 4th-order decay") {
    auto field_on = [&](int res) {
        auto g = TorusGrid::create(1, {res, 1});
        return make_field(g, [](const auto& x) {
            return std::sin(2 * kPi * x[0]) + 0.05 * std::cos(2 * 2 * kPi * x[0]);
        });
    };
    double err16 = 0.0, err32 = 0.0;
    for (int res : {16, 32}) {
        auto phi = field_on(res);
        auto Hs = complex_hessian(phi, DerivMethod::spectral);
        auto Hc = complex_hessian(phi, DerivMethod::central4);
        double supH = 0.0, diff = 0.0;
        for (std::ptrdiff_t i = 0; i < phi.grid.total_nodes; ++i) {
            supH = std::max(supH, std::abs(Hs.node(i)[0]));
            diff = std::max(diff, std::abs(Hs.node(i)[0] - Hc.node(i)[0]));
        }
        (res == 16 ? err16 : err32) = diff / supH;
    }
    CHECK(err16 <= 1e-3);
    CHECK(err32 <= err16 / 12.0);  // ~16x at 4th order
}

TEST_CASE("frozen-axis consistency") {
    // A field constant along axis 2 (res 4) must match the res-1 grid results.
    auto gfat = TorusGrid::create(2, {8, 1, 4, 1});
    auto gthin = TorusGrid::create(2, {8, 1, 1, 1});
    auto fn = [](const auto& x) { return std::sin(2 * kPi * x[0]); };
    auto phi_fat = make_field(gfat, fn);
    auto phi_thin = make_field(gthin, fn);
    auto Hf = complex_hessian(phi_fat);
    auto Ht = complex_hessian(phi_thin);
    for (std::ptrdiff_t i = 0; i < gfat.total_nodes; ++i) {
        auto c = gfat.node_coords(i);
        const std::ptrdiff_t j = c[0];  // thin-grid node
        for (int e = 0; e < 4; ++e)
            CHECK(std::abs(Hf.node(i)[e] - Ht.node(j)[e]) <= 1e-13);
    }
}

TEST_CASE("fft path matches the naive DFT reference") {
    auto g = TorusGrid::create(2, {12, 5, 3, 1});  // mixed radix, odd lengths
    const CounterRng rng(13);
    ScalarField phi(g);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) phi.v[i] = rng.normal(i, 0);
    Differentiator diff(g);
    ScalarField fast(g), slow(g);
    for (int axis = 0; axis < g.axes(); ++axis) {
        for (bool second : {false, true}) {
            if (second)
                diff.second(phi, axis, fast);
            else
                diff.first(phi, axis, fast);
            ref::derivative_naive(phi, axis, second, slow);
            const double scale = 1.0 + field_sup_abs(slow);
            for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i)
                CHECK(std::abs(fast.v[i] - slow.v[i]) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("oscillation") {
    auto g = TorusGrid::create(1, {8, 1});
    ScalarField c(g, 4.2);
    CHECK(oscillation(c) == 0.0);
    auto f = make_field(g, [](const auto& x) { return std::cos(2 * kPi * x[0]); });
    CHECK(oscillation(f) == doctest::Approx(2.0).epsilon(1e-12));
    ScalarField shifted = f;
    for (double& v : shifted.v) v += 17.0;
    CHECK(oscillation(shifted) == doctest::Approx(oscillation(f)));
}
