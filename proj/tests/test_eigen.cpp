#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lambdaflow/eigen_herm.hpp"
#include "lambdaflow/rng.hpp"
#include "lambdaflow/torus.hpp"

using namespace lambdaflow;

namespace {

// random Hermitian with optional eigenvalue clustering
std::vector<cplx> random_hermitian(int n, const CounterRng& rng, long long s, double cluster) {
    std::vector<cplx> A(n * n, cplx(0.0));
    for (int i = 0; i < n; ++i) {
        A[i * n + i] = cplx(rng.normal(s, i) * cluster + 1.0);
        for (int j = i + 1; j < n; ++j) {
            const cplx z(cluster * rng.normal(s, 10 + i * n + j),
                         cluster * rng.normal(s, 40 + i * n + j));
            A[i * n + j] = z;
            A[j * n + i] = std::conj(z);
        }
    }
    return A;
}

double reconstruction_residual(const std::vector<cplx>& A, int n, const double* ev,
                               const cplx* V) {
    double r = 0.0;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < n; ++c) {
            cplx acc(0.0);
            for (int m = 0; m < n; ++m) acc += A[i * n + m] * V[m * n + c];
            acc -= V[i * n + c] * ev[c];
            r = std::max(r, std::abs(acc));
        }
    return r;
}

double trace_det_check(const std::vector<cplx>& A, int n, const double* ev) {
    double tr = 0.0, evs = 0.0;
    for (int i = 0; i < n; ++i) {
        tr += A[i * n + i].real();
        evs += ev[i];
    }
    return std::abs(tr - evs);
}

}  // namespace

TEST_CASE("small oracles: identity, diagonal, 2x2 analytic") {
    {
        std::vector<cplx> I = {cplx(1), cplx(0), cplx(0), cplx(1)};
        double ev[2];
        cplx V[4];
        eig2_hermitian(I.data(), ev, V);
        CHECK(ev[0] == doctest::Approx(1.0));
        CHECK(ev[1] == doctest::Approx(1.0));
    }
    {
        std::vector<cplx> D = {cplx(3), cplx(0), cplx(0), cplx(1)};
        double ev[2];
        eig2_hermitian(D.data(), ev, nullptr);
        CHECK(ev[0] == doctest::Approx(3.0));
        CHECK(ev[1] == doctest::Approx(1.0));
    }
    {
        // [[2,1],[1,2]] -> 3, 1
        std::vector<cplx> A = {cplx(2), cplx(1), cplx(1), cplx(2)};
        double ev[2];
        cplx V[4];
        eig2_hermitian(A.data(), ev, V);
        CHECK(ev[0] == doctest::Approx(3.0));
        CHECK(ev[1] == doctest::Approx(1.0));
        CHECK(reconstruction_residual(A, 2, ev, V) <= 1e-14);
    }
}

TEST_CASE("3x3 trigonometric values match jacobi") {
    const CounterRng rng(21);
    for (int s = 0; s < 300; ++s) {
        // mix of well-separated and clustered spectra
        const double cluster = (s % 3 == 0) ? 1e-7 : 1.0;
        auto A = random_hermitian(3, rng, s, cluster);
        double fast[3], slow[3];
        eig3_hermitian_values(A.data(), fast);
        jacobi_hermitian(A.data(), 3, slow, nullptr);
        double scale = 0.0;
        for (const cplx& z : A) scale = std::max(scale, std::abs(z));
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(fast[i] - slow[i]) <= 1e-11 * (1.0 + scale));
        CHECK(fast[0] >= fast[1]);
        CHECK(fast[1] >= fast[2]);
        CHECK(trace_det_check(A, 3, fast) <= 1e-12 * (1.0 + scale));
    }
}

TEST_CASE("jacobi on random hermitian up to n=8") {
    const CounterRng rng(34);
    for (int n : {2, 3, 4, 6, 8}) {
        for (int s = 0; s < 40; ++s) {
            auto A = random_hermitian(n, rng, 1000 * n + s, (s % 4 == 0) ? 1e-9 : 1.0);
            std::vector<double> ev(n);
            std::vector<cplx> V(n * n);
            jacobi_hermitian(A.data(), n, ev.data(), V.data());
            double scale = 0.0;
            for (const cplx& z : A) scale = std::max(scale, std::abs(z));
            CHECK(reconstruction_residual(A, n, ev.data(), V.data()) <= 1e-12 * (1.0 + scale));
            for (int i = 0; i + 1 < n; ++i) CHECK(ev[i] >= ev[i + 1]);
            // orthonormal columns
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    cplx dot(0.0);
                    for (int r = 0; r < n; ++r)
                        dot += std::conj(V[r * n + a]) * V[r * n + b];
                    CHECK(std::abs(dot - (a == b ? cplx(1.0) : cplx(0.0))) <= 1e-12);
                }
        }
    }
}

TEST_CASE("field-level eigen decomposition") {
    auto g = TorusGrid::create(3, {4, 3, 2, 1, 1, 1});
    HermitianField H(g);
    const CounterRng rng(55);
    for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p) {
        auto A = random_hermitian(3, rng, p, 1.0);
        for (int e = 0; e < 9; ++e) H.node(p)[e] = A[e];
    }
    H.symmetrize();
    auto E = eigen_decompose(H);
    double sup = 0.0;
    for (const cplx& z : H.m) sup = std::max(sup, std::abs(z));
    for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p) {
        const double* ev = E.values(p);
        const cplx* V = E.vectors(p);
        CHECK(ev[0] >= ev[1]);
        CHECK(ev[1] >= ev[2]);
        std::vector<cplx> A(H.node(p), H.node(p) + 9);
        CHECK(reconstruction_residual(A, 3, ev, V) <= 1e-9 * (1.0 + sup));
        // sum / product of eigenvalues vs trace / det
        CHECK(trace_det_check(A, 3, ev) <= 1e-9 * (1.0 + sup));
        // phase convention: largest component of each column is real positive
        for (int c = 0; c < 3; ++c) {
            int arg = 0;
            double best = -1.0;
            for (int r = 0; r < 3; ++r)
                if (std::abs(V[r * 3 + c]) > best + 1e-15) {
                    best = std::abs(V[r * 3 + c]);
                    arg = r;
                }
            CHECK(V[arg * 3 + c].imag() == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(V[arg * 3 + c].real() > 0.0);
        }
    }
}

TEST_CASE("eigenvalues_only matches decomposition") {
    auto g = TorusGrid::create(2, {5, 4, 1, 1});
    HermitianField H(g);
    const CounterRng rng(77);
    for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p) {
        auto A = random_hermitian(2, rng, p, 1.0);
        for (int e = 0; e < 4; ++e) H.node(p)[e] = A[e];
    }
    H.symmetrize();
    auto E = eigen_decompose(H);
    std::vector<double> vals;
    eigenvalues_only(H, vals);
    for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p)
        for (int i = 0; i < 2; ++i)
            CHECK(vals[p * 2 + i] == doctest::Approx(E.values(p)[i]).epsilon(1e-13));
}
