#include "lambdaflow/eigen_herm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "lambdaflow/errors.hpp"

namespace lambdaflow {

namespace {

constexpr int kMaxN = 8;

void sort_descending(int n, double* evals, cplx* evecs) {
    std::array<int, kMaxN> order{};
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.begin() + n,
                     [&](int a, int b) { return evals[a] > evals[b]; });
    std::array<double, kMaxN> ev{};
    std::array<cplx, kMaxN * kMaxN> vv{};
    for (int i = 0; i < n; ++i) ev[i] = evals[order[i]];
    if (evecs) {
        for (int c = 0; c < n; ++c)
            for (int r = 0; r < n; ++r) vv[r * n + c] = evecs[r * n + order[c]];
        for (int i = 0; i < n * n; ++i) evecs[i] = vv[i];
    }
    for (int i = 0; i < n; ++i) evals[i] = ev[i];
}

double off_diag_sq(const cplx* A, int n) {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) s += std::norm(A[p * n + q]);
    return s;
}

}  // namespace

void jacobi_hermitian(const cplx* A_in, int n, double* evals, cplx* evecs, int max_sweeps) {
    std::array<cplx, kMaxN * kMaxN> A{};
    for (int i = 0; i < n * n; ++i) A[i] = A_in[i];
    if (evecs) {
        for (int i = 0; i < n * n; ++i) evecs[i] = cplx(0.0);
        for (int i = 0; i < n; ++i) evecs[i * n + i] = cplx(1.0);
    }
    double scale = 0.0;
    for (int i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(A[i]));
    const double tol = 1e-26 * (1.0 + scale) * (1.0 + scale);

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (off_diag_sq(A.data(), n) <= tol) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cplx apq = A[p * n + q];
                const double mag = std::abs(apq);
                if (mag <= 1e-300) continue;
                const double app = A[p * n + p].real();
                const double aqq = A[q * n + q].real();
                const double tau = (aqq - app) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx u = apq / mag;
                const cplx su = s * u;
                const cplx suc = s * std::conj(u);
                A[p * n + p] = cplx(app - t * mag);
                A[q * n + q] = cplx(aqq + t * mag);
                A[p * n + q] = cplx(0.0);
                A[q * n + p] = cplx(0.0);
                for (int k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const cplx akp = A[k * n + p];
                    const cplx akq = A[k * n + q];
                    A[k * n + p] = c * akp - suc * akq;
                    A[k * n + q] = su * akp + c * akq;
                    A[p * n + k] = std::conj(A[k * n + p]);
                    A[q * n + k] = std::conj(A[k * n + q]);
                }
                if (evecs) {
                    for (int k = 0; k < n; ++k) {
                        const cplx vkp = evecs[k * n + p];
                        const cplx vkq = evecs[k * n + q];
                        evecs[k * n + p] = c * vkp - suc * vkq;
                        evecs[k * n + q] = su * vkp + c * vkq;
                    }
                }
            }
        }
    }
    if (sweep == max_sweeps && off_diag_sq(A.data(), n) > tol)
        throw NumericalError("Jacobi iteration did not converge in " +
                             std::to_string(max_sweeps) + " sweeps");
    for (int i = 0; i < n; ++i) evals[i] = A[i * n + i].real();
    sort_descending(n, evals, evecs);
}

void jacobi_symmetric(const double* A_in, int n, double* evals, double* evecs, int max_sweeps) {
    std::array<cplx, kMaxN * kMaxN> A{};
    std::array<cplx, kMaxN * kMaxN> V{};
    for (int i = 0; i < n * n; ++i) A[i] = cplx(A_in[i]);
    jacobi_hermitian(A.data(), n, evals, evecs ? V.data() : nullptr, max_sweeps);
    if (evecs)
        for (int i = 0; i < n * n; ++i) evecs[i] = V[i].real();
}

void eig2_hermitian(const cplx* A, double* evals, cplx* evecs) {
    const double a = A[0].real();
    const double d = A[3].real();
    const cplx b = A[1];
    const double m = 0.5 * (a + d);
    const double r = std::hypot(0.5 * (a - d), std::abs(b));
    evals[0] = m + r;
    evals[1] = m - r;
    if (!evecs) return;
    if (std::abs(b) <= 1e-300 * (1.0 + std::abs(a) + std::abs(d))) {
        const bool flip = a < d;
        evecs[0] = flip ? cplx(0.0) : cplx(1.0);
        evecs[2] = flip ? cplx(1.0) : cplx(0.0);
        evecs[1] = flip ? cplx(1.0) : cplx(0.0);
        evecs[3] = flip ? cplx(0.0) : cplx(1.0);
        return;
    }
    // (b, lambda - a) is an eigenvector; pick the dominant eigenvalue first
    // so the normalization never degenerates.
    cplx v0 = b;
    double v1 = evals[0] - a;
    double nrm = std::sqrt(std::norm(v0) + v1 * v1);
    evecs[0] = v0 / nrm;
    evecs[2] = cplx(v1 / nrm);
    // orthogonal complement
    evecs[1] = -std::conj(cplx(v1 / nrm));
    evecs[3] = std::conj(v0 / nrm);
}

void eig3_hermitian_values(const cplx* A, double* evals) {
    const double a11 = A[0].real(), a22 = A[4].real(), a33 = A[8].real();
    const cplx a12 = A[1], a13 = A[2], a23 = A[5];
    const double p1 = std::norm(a12) + std::norm(a13) + std::norm(a23);
    const double q = (a11 + a22 + a33) / 3.0;
    if (p1 == 0.0) {
        evals[0] = a11;
        evals[1] = a22;
        evals[2] = a33;
        std::sort(evals, evals + 3, std::greater<>());
        return;
    }
    const double p2 = (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) +
                      (a33 - q) * (a33 - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    // det((A - qI)/p) / 2, real for Hermitian input
    const double b11 = (a11 - q) / p, b22 = (a22 - q) / p, b33 = (a33 - q) / p;
    const cplx b12 = a12 / p, b13 = a13 / p, b23 = a23 / p;
    double detB = b11 * (b22 * b33 - std::norm(b23)) - b33 * std::norm(b12) -
                  b22 * std::norm(b13) + 2.0 * (b12 * b23 * std::conj(b13)).real();
    double r = std::clamp(detB / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double two_pi_3 = 2.0943951023931954923;
    evals[0] = q + 2.0 * p * std::cos(phi);
    evals[2] = q + 2.0 * p * std::cos(phi + two_pi_3);
    evals[1] = 3.0 * q - evals[0] - evals[2];

    // Newton polish on the characteristic polynomial; skipped near multiple
    // roots where p' degenerates.
    const double c2 = a11 + a22 + a33;
    const double c1 = (a11 * a22 - std::norm(a12)) + (a11 * a33 - std::norm(a13)) +
                      (a22 * a33 - std::norm(a23));
    const double c0 = a11 * (a22 * a33 - std::norm(a23)) - a33 * std::norm(a12) -
                      a22 * std::norm(a13) + 2.0 * (a12 * a23 * std::conj(a13)).real();
    const double s = 1.0 + std::abs(a11) + std::abs(a22) + std::abs(a33) + std::sqrt(p1);
    for (int i = 0; i < 3; ++i) {
        for (int it = 0; it < 2; ++it) {
            const double x = evals[i];
            const double pd = (3.0 * x - 2.0 * c2) * x + c1;
            if (std::abs(pd) < 1e-3 * s * s) break;
            const double pv = ((x - c2) * x + c1) * x - c0;
            evals[i] = x - pv / pd;
        }
    }
    std::sort(evals, evals + 3, std::greater<>());
}

void hermitian_eigenvalues(const cplx* A, int n, double* evals) {
    switch (n) {
        case 1:
            evals[0] = A[0].real();
            return;
        case 2:
            eig2_hermitian(A, evals, nullptr);
            return;
        case 3:
            eig3_hermitian_values(A, evals);
            return;
        default:
            jacobi_hermitian(A, n, evals, nullptr);
    }
}

}  // namespace lambdaflow
