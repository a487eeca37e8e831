#include "lambdaflow/cone.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "lambdaflow/eigen_herm.hpp"
#include "lambdaflow/parallel.hpp"
#include "lambdaflow/rng.hpp"

namespace lambdaflow {

namespace {
constexpr int kMaxLam = 70;  // binomial(8, 4)

long long binomial(int n, int k) {
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}
}  // namespace

void LambdaStructure::lambda_map(std::span<const double> lam, std::span<double> out) const {
    if (static_cast<int>(lam.size()) != n)
        throw InvalidStructureError("lambda_map: expected a vector of length n=" +
                                    std::to_string(n) + ", got " + std::to_string(lam.size()));
    for (int j = 0; j < N; ++j) {
        double s = 0.0;
        for (int m = 0; m < K; ++m) s += lam[sets_flat[j * K + m] - 1];
        out[j] = s;
    }
}

std::vector<double> LambdaStructure::lambda_map(std::span<const double> lam) const {
    std::vector<double> out(N);
    lambda_map(lam, out);
    return out;
}

LambdaStructure index_sets(int n, int K) {
    if (n < 1 || n > 8 || K < 1 || K > n)
        throw InvalidStructureError("index_sets: need 1 <= K <= n <= 8, got n=" +
                                    std::to_string(n) + ", K=" + std::to_string(K));
    LambdaStructure ls;
    ls.n = n;
    ls.K = K;
    ls.N = static_cast<int>(binomial(n, K));
    std::vector<int> tuple(K);
    std::iota(tuple.begin(), tuple.end(), 1);
    while (true) {
        ls.index_sets.push_back(tuple);
        ls.sets_flat.insert(ls.sets_flat.end(), tuple.begin(), tuple.end());
        int i = K - 1;
        while (i >= 0 && tuple[i] == n - (K - 1 - i)) --i;
        if (i < 0) break;
        ++tuple[i];
        for (int j = i + 1; j < K; ++j) tuple[j] = tuple[j - 1] + 1;
    }
    return ls;
}

void elementary_symmetric(std::span<const double> x, int k, std::span<double> out) {
    // e_j(x_1..x_m) = e_j(x_1..x_{m-1}) + x_m e_{j-1}(x_1..x_{m-1})
    for (int j = 0; j < k; ++j) out[j] = 0.0;
    for (double xm : x) {
        for (int j = std::min<int>(k, static_cast<int>(x.size())) - 1; j >= 1; --j)
            out[j] += xm * out[j - 1];
        out[0] += xm;
    }
}

GardingResult garding_membership(std::span<const double> Lam, int k) {
    GardingResult r;
    r.margins.resize(k);
    elementary_symmetric(Lam, k, r.margins);
    r.inside = true;
    for (double m : r.margins) r.inside = r.inside && (m > 0.0);
    return r;
}

std::string OperatorSpec::family_name() const {
    return family == OperatorFamily::sigma_k_root ? "sigma_k_root" : "linear_weights";
}

double OperatorSpec::boundary_sup() const {
    if (family == OperatorFamily::sigma_k_root) return 0.0;
    // For linear f on Gamma_1: sup over {sigma_1 = 0} is 0 only when all
    // weights coincide, otherwise the linear form is unbounded there.
    const double w0 = weights.empty() ? 0.0 : weights[0];
    for (double w : weights)
        if (w != w0) return std::numeric_limits<double>::infinity();
    return 0.0;
}

OperatorSpec make_sigma_k_operator(int n, int K, int k) {
    OperatorSpec spec;
    spec.family = OperatorFamily::sigma_k_root;
    spec.structure = index_sets(n, K);
    if (k < 1 || k > spec.structure.N)
        throw InvalidStructureError("sigma_k operator: need 1 <= k <= N");
    spec.k = k;
    return spec;
}

OperatorSpec make_linear_operator(int n, int K, std::vector<double> weights) {
    OperatorSpec spec;
    spec.family = OperatorFamily::linear_weights;
    spec.structure = index_sets(n, K);
    if (static_cast<int>(weights.size()) != spec.structure.N)
        throw InvalidStructureError("linear operator: need N weights");
    for (double w : weights)
        if (w < 0.0) throw InvalidStructureError("linear operator: weights must be >= 0");
    spec.weights = std::move(weights);
    spec.k = 1;
    return spec;
}

bool f_eval_fast(const OperatorSpec& spec, std::span<const double> Lam, double& f_out,
                 double& margin_out, std::span<double> scratch) {
    const int k = spec.cone_order();
    elementary_symmetric(Lam, k, scratch.first(k));
    margin_out = scratch[0];
    for (int j = 1; j < k; ++j) margin_out = std::min(margin_out, scratch[j]);
    if (spec.family == OperatorFamily::linear_weights) {
        double s = 0.0;
        for (std::size_t i = 0; i < Lam.size(); ++i) s += spec.weights[i] * Lam[i];
        f_out = s;
        return true;
    }
    if (spec.k == 1) {
        f_out = scratch[0];
        return true;
    }
    if (margin_out <= 0.0) return false;
    f_out = std::pow(scratch[spec.k - 1], 1.0 / spec.k);
    return true;
}

double f_eval(const OperatorSpec& spec, std::span<const double> Lam) {
    std::array<double, kMaxLam> scratch{};
    double f = 0.0, margin = 0.0;
    if (!f_eval_fast(spec, Lam, f, margin, scratch)) {
        int bad = 0;
        for (int j = 0; j < spec.cone_order(); ++j)
            if (scratch[j] <= 0.0) {
                bad = j + 1;
                break;
            }
        throw InadmissiblePointError("f_eval: point outside Garding cone, sigma_" +
                                         std::to_string(bad) + " = " +
                                         std::to_string(scratch[bad - 1]),
                                     bad, scratch[bad - 1]);
    }
    return f;
}

void f_grad(const OperatorSpec& spec, std::span<const double> Lam, std::span<double> out) {
    const int N = static_cast<int>(Lam.size());
    if (spec.family == OperatorFamily::linear_weights) {
        for (int i = 0; i < N; ++i) out[i] = spec.weights[i];
        return;
    }
    if (spec.k == 1) {
        for (int i = 0; i < N; ++i) out[i] = 1.0;
        return;
    }
    std::array<double, kMaxLam> sig{};
    elementary_symmetric(Lam, spec.k, sig);
    double margin = sig[0];
    double scale = 0.0;
    for (int j = 1; j < spec.k; ++j) margin = std::min(margin, sig[j]);
    for (double v : Lam) scale = std::max(scale, std::abs(v));
    // sigma_k^{1/k-1} blows up on the cone boundary; refuse points too close.
    if (margin <= 1e-12 * std::pow(1.0 + scale, spec.k))
        throw InadmissiblePointError(
            "f_grad: point on or too close to the cone boundary (margin " +
                std::to_string(margin) + ")",
            0, margin);
    const double fk = std::pow(sig[spec.k - 1], 1.0 / spec.k);
    const double pref = fk / (spec.k * sig[spec.k - 1]);  // (1/k) sigma_k^{1/k - 1}
    std::array<double, kMaxLam> omit{};
    std::array<double, kMaxLam> rest{};
    for (int i = 0; i < N; ++i) {
        int m = 0;
        for (int j = 0; j < N; ++j)
            if (j != i) rest[m++] = Lam[j];
        elementary_symmetric(std::span<const double>(rest.data(), N - 1), spec.k - 1, omit);
        out[i] = pref * (spec.k == 1 ? 1.0 : omit[spec.k - 2]);
    }
}

std::vector<double> f_grad(const OperatorSpec& spec, std::span<const double> Lam) {
    std::vector<double> out(Lam.size());
    f_grad(spec, Lam, out);
    return out;
}

void eigen_gradient_weights(std::span<const double> grad, const LambdaStructure& ls,
                            std::span<double> mu_out) {
    if (static_cast<int>(grad.size()) != ls.N)
        throw InvalidStructureError("eigen_gradient_weights: gradient length must be N");
    for (int p = 0; p < ls.n; ++p) mu_out[p] = 0.0;
    for (int j = 0; j < ls.N; ++j)
        for (int m = 0; m < ls.K; ++m) mu_out[ls.sets_flat[j * ls.K + m] - 1] += grad[j];
}

std::vector<double> eigen_gradient_weights(std::span<const double> grad,
                                           const LambdaStructure& ls) {
    std::vector<double> mu(ls.n);
    eigen_gradient_weights(grad, ls, mu);
    return mu;
}

int rank_for_sigma_k(int N, int k) { return N - k + 1; }

RankCondition rank_condition_s02(const LambdaStructure& ls, int k) {
    RankCondition rc;
    rc.required_rank = static_cast<double>(ls.N) * (ls.n - ls.K) / ls.n + 1.0;
    rc.actual_rank = rank_for_sigma_k(ls.N, k);
    rc.ok = rc.actual_rank >= rc.required_rank;
    return rc;
}

// ---------------------------------------------------------------------------
// Sampling machinery for check_structure / lemma3.
// ---------------------------------------------------------------------------

namespace {

// Componentwise |N(0,1)| + 0.1, which already lies in the positive orthant
// and hence in every Garding cone; the rejection loop guards the general case.
void draw_interior(const CounterRng& rng, long long counter, int N, int k, double* Lam,
                   long long& rejects) {
    for (int attempt = 0;; ++attempt) {
        for (int i = 0; i < N; ++i)
            Lam[i] = std::abs(rng.normal(counter * 4096 + attempt, i)) + 0.1;
        std::array<double, kMaxLam> sig{};
        elementary_symmetric(std::span<const double>(Lam, N), k, sig);
        bool inside = true;
        for (int j = 0; j < k; ++j) inside = inside && sig[j] > 0.0;
        if (inside) return;
        if (++rejects > 1000 + 1000 * counter)
            throw SamplerStarvationError("cone sampler rejection rate above 99.9%");
    }
}

// Push one coordinate toward the first sigma_j = 0 locus. Each sigma_j is
// affine in a single coordinate, so the binding root is exact.
void push_to_boundary(int N, int k, double* Lam, int coord, double theta) {
    std::array<double, kMaxLam> rest{};
    std::array<double, kMaxLam> sig_omit{};
    int m = 0;
    for (int j = 0; j < N; ++j)
        if (j != coord) rest[m++] = Lam[j];
    elementary_symmetric(std::span<const double>(rest.data(), N - 1), k, sig_omit);
    double root = -std::numeric_limits<double>::infinity();
    for (int j = 1; j <= k; ++j) {
        // sigma_j(Lam) = x * sigma_{j-1}(rest) + sigma_j(rest), x = Lam[coord]
        const double slope = (j == 1) ? 1.0 : sig_omit[j - 2];
        const double offset = (j <= N - 1) ? sig_omit[j - 1] : 0.0;
        if (slope > 0.0) root = std::max(root, -offset / slope);
    }
    if (std::isfinite(root) && root < Lam[coord])
        Lam[coord] = root + theta * (Lam[coord] - root);
}

// Distance proxy to the cone boundary: min_j sigma_j / ||grad sigma_j||_inf.
double boundary_distance_proxy(std::span<const double> Lam, int k) {
    const int N = static_cast<int>(Lam.size());
    std::array<double, kMaxLam> sig{};
    elementary_symmetric(Lam, k, sig);
    std::array<double, kMaxLam> rest{};
    std::array<double, kMaxLam> omit{};
    double dist = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= k; ++j) {
        double gmax = 0.0;
        for (int i = 0; i < N; ++i) {
            int m = 0;
            for (int l = 0; l < N; ++l)
                if (l != i) rest[m++] = Lam[l];
            elementary_symmetric(std::span<const double>(rest.data(), N - 1), j, omit);
            const double gi = (j == 1) ? 1.0 : std::abs(omit[j - 2]);
            gmax = std::max(gmax, gi);
        }
        if (gmax > 0.0) dist = std::min(dist, sig[j - 1] / gmax);
    }
    return dist;
}

struct FdHessianResult {
    std::array<double, kMaxLam * kMaxLam> H{};
    bool ok = false;
};

// 8th-order central stencils; the step is tied to the boundary distance so
// the truncation term stays controlled where derivatives of sigma_k^{1/k}
// grow. All stencil points are verified to stay inside the cone.
FdHessianResult fd_hessian(const OperatorSpec& spec, std::span<const double> Lam) {
    static constexpr double w1[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    static constexpr double w2[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0,
                                     -1.0 / 560.0};
    const int N = static_cast<int>(Lam.size());
    const int k = spec.cone_order();
    FdHessianResult res;
    std::array<double, kMaxLam> x{};
    std::array<double, kMaxLam> scratch{};
    for (int i = 0; i < N; ++i) x[i] = Lam[i];
    double scale = 0.0;
    for (int i = 0; i < N; ++i) scale = std::max(scale, std::abs(x[i]));
    double dist = boundary_distance_proxy(Lam, k);
    if (!std::isfinite(dist)) dist = 1.0 + scale;
    dist = std::min(dist, 1.0 + scale);

    auto eval = [&](double* pt, double& out) -> bool {
        double margin = 0.0;
        return f_eval_fast(spec, std::span<const double>(pt, N), out, margin, scratch);
    };

    for (double delta = 0.02 * dist; delta > 1e-12 * (1.0 + scale); delta *= 0.5) {
        bool feasible = true;
        const double f0 = f_eval(spec, Lam);
        for (int i = 0; i < N && feasible; ++i) {
            double d2 = w2[0] * f0;
            for (int a = 1; a <= 4 && feasible; ++a) {
                for (double sgn : {1.0, -1.0}) {
                    x[i] = Lam[i] + sgn * a * delta;
                    double fv = 0.0;
                    if (!eval(x.data(), fv)) {
                        feasible = false;
                        break;
                    }
                    d2 += w2[a] * fv;
                }
                x[i] = Lam[i];
            }
            res.H[i * N + i] = d2 / (delta * delta);
        }
        for (int i = 0; i < N && feasible; ++i) {
            for (int j = i + 1; j < N && feasible; ++j) {
                double acc = 0.0;
                for (int a = 1; a <= 4 && feasible; ++a) {
                    for (int b = 1; b <= 4 && feasible; ++b) {
                        double quad = 0.0;
                        for (double sa : {1.0, -1.0}) {
                            for (double sb : {1.0, -1.0}) {
                                x[i] = Lam[i] + sa * a * delta;
                                x[j] = Lam[j] + sb * b * delta;
                                double fv = 0.0;
                                if (!eval(x.data(), fv)) {
                                    feasible = false;
                                    break;
                                }
                                quad += sa * sb * fv;
                            }
                            if (!feasible) break;
                        }
                        acc += w1[a - 1] * w1[b - 1] * quad;
                    }
                }
                x[i] = Lam[i];
                x[j] = Lam[j];
                res.H[i * N + j] = res.H[j * N + i] = acc / (delta * delta);
            }
        }
        if (feasible) {
            res.ok = true;
            return res;
        }
    }
    return res;
}

}  // namespace

StructureReport check_structure(const OperatorSpec& spec, double psi_inf, double psi_sup,
                                long long n_samples, long long seed) {
    if (n_samples < 1) throw InvalidStructureError("check_structure: n_samples >= 1 required");
    const int N = spec.structure.N;
    const int k = spec.cone_order();
    const CounterRng rng(static_cast<std::uint64_t>(seed));

    StructureReport rep;
    rep.seed = seed;
    rep.samples_used = n_samples;
    rep.min_grad_component = std::numeric_limits<double>::infinity();
    rep.max_hessian_eigenvalue = -std::numeric_limits<double>::infinity();
    rep.euler_defect = 0.0;

    std::vector<double> min_grad(n_samples), max_eig(n_samples), defect(n_samples),
        c0_ratio(n_samples);
    std::vector<char> failed(n_samples, 0);

    for_each_index(n_samples, [&](std::ptrdiff_t s) {
      try {
        std::array<double, kMaxLam> Lam{};
        std::array<double, kMaxLam> grad{};
        long long rejects = 0;
        draw_interior(rng, s, N, k, Lam.data(), rejects);

        f_grad(spec, std::span<const double>(Lam.data(), N), std::span<double>(grad.data(), N));
        double mg = grad[0];
        double dot = 0.0, gsum = 0.0;
        for (int i = 0; i < N; ++i) {
            mg = std::min(mg, grad[i]);
            dot += grad[i] * Lam[i];
            gsum += grad[i];
        }
        const double f = f_eval(spec, std::span<const double>(Lam.data(), N));
        min_grad[s] = mg;
        defect[s] = std::abs(dot - f);
        c0_ratio[s] = gsum > 0.0 ? dot / gsum : 0.0;

        // Hessian at the sphere-normalized point; by degree-1 homogeneity
        // Hess f(Lam) = Hess f(Lam/|Lam|) / |Lam|.
        double nrm = 0.0;
        for (int i = 0; i < N; ++i) nrm += Lam[i] * Lam[i];
        nrm = std::sqrt(nrm);
        std::array<double, kMaxLam> hat{};
        for (int i = 0; i < N; ++i) hat[i] = Lam[i] / nrm;
        auto fd = fd_hessian(spec, std::span<const double>(hat.data(), N));
        if (fd.ok) {
            std::array<double, kMaxLam> evals{};
            jacobi_symmetric(fd.H.data(), N, evals.data());
            max_eig[s] = evals[0] / nrm;
        } else {
            max_eig[s] = std::numeric_limits<double>::quiet_NaN();
        }
      } catch (...) {
        failed[s] = 1;
      }
    });

    long long nfail = 0;
    double worst_c0 = std::numeric_limits<double>::infinity();
    for (long long s = 0; s < n_samples; ++s) {
        if (failed[s]) {
            ++nfail;
            continue;
        }
        rep.min_grad_component = std::min(rep.min_grad_component, min_grad[s]);
        rep.euler_defect = std::max(rep.euler_defect, defect[s]);
        if (!std::isnan(max_eig[s]))
            rep.max_hessian_eigenvalue = std::max(rep.max_hessian_eigenvalue, max_eig[s]);
        worst_c0 = std::min(worst_c0, c0_ratio[s]);
    }
    if (nfail == n_samples)
        throw SamplerStarvationError("check_structure: no sample could be evaluated");
    // Euler: sum f_i Lam_i = f >= 0 in the cone, so (S0.1) holds with C_0 = 0
    // unless a sample shows otherwise.
    rep.C0_estimate = std::max(0.0, -worst_c0);

    // (P5) along sampled rays, t in {1, 10, 100, 1000}.
    rep.p5_ray_limit_ok = true;
    for (int r = 0; r < 16; ++r) {
        std::array<double, kMaxLam> Lam{};
        std::array<double, kMaxLam> scaled{};
        long long rejects = 0;
        draw_interior(rng, 1000000 + r, N, k, Lam.data(), rejects);
        double prev = f_eval(spec, std::span<const double>(Lam.data(), N));
        for (double t : {10.0, 100.0, 1000.0}) {
            for (int i = 0; i < N; ++i) scaled[i] = t * Lam[i];
            const double ft = f_eval(spec, std::span<const double>(scaled.data(), N));
            if (!(ft >= 5.0 * prev) && prev > 0.0) rep.p5_ray_limit_ok = false;
            prev = ft;
        }
    }

    rep.p4_margin = psi_inf - spec.boundary_sup();
    if (!std::isfinite(rep.p4_margin)) rep.p4_margin = -std::numeric_limits<double>::max();
    // (S0.3) certificate at a large finite ray parameter; f(t*1) is monotone
    // in t by (P2), so the limit dominates this value.
    std::array<double, kMaxLam> ones{};
    for (int i = 0; i < N; ++i) ones[i] = 1000.0;
    rep.c0_s03_estimate = f_eval(spec, std::span<const double>(ones.data(), N)) - psi_sup;
    return rep;
}

double lemma3_empirical_c0(const OperatorSpec& spec, double sigma, long long n_samples,
                           long long seed, long long* skipped_out) {
    if (sigma <= 0.0) throw InvalidStructureError("lemma3: sigma must be positive");
    if (n_samples < 1) throw InvalidStructureError("lemma3: n_samples >= 1 required");
    const int N = spec.structure.N;
    const int k = spec.cone_order();
    // For linear f the level set is a hyperplane whose normal has one nonzero
    // component per positive weight.
    const int r = spec.family == OperatorFamily::sigma_k_root
                      ? rank_for_sigma_k(N, spec.k)
                      : static_cast<int>(std::count_if(spec.weights.begin(), spec.weights.end(),
                                                       [](double w) { return w > 0.0; }));
    const int count = N - r + 1;  // number of smallest gradient components kept
    const CounterRng rng(static_cast<std::uint64_t>(seed) ^ 0x5bd1e995u);

    std::vector<double> ratio(n_samples, std::numeric_limits<double>::infinity());
    std::vector<char> skipped(n_samples, 0);

    for_each_index(n_samples, [&](std::ptrdiff_t s) {
      try {
        std::array<double, kMaxLam> Lam{};
        std::array<double, kMaxLam> grad{};
        long long rejects = 0;
        draw_interior(rng, s, N, k, Lam.data(), rejects);
        // Second half of the stream: boundary-weighted pass.
        if (s % 2 == 1) {
            const double theta = std::pow(10.0, -4.0 * rng.uniform(s, 101));
            push_to_boundary(N, k, Lam.data(), static_cast<int>(s) % N, theta);
        }
        // Scale onto the level set {f = sigma}; the gradient of a degree-1
        // homogeneous function is degree-0, so the ratio is scale-invariant.
        double f = 0.0, margin = 0.0;
        std::array<double, kMaxLam> scratch{};
        if (!f_eval_fast(spec, std::span<const double>(Lam.data(), N), f, margin, scratch) ||
            f <= 0.0) {
            skipped[s] = 1;
            return;
        }
        for (int i = 0; i < N; ++i) Lam[i] *= sigma / f;
        try {
            f_grad(spec, std::span<const double>(Lam.data(), N),
                   std::span<double>(grad.data(), N));
        } catch (const InadmissiblePointError&) {
            skipped[s] = 1;
            return;
        }
        std::sort(grad.begin(), grad.begin() + N);  // ascending
        double small = 0.0, total = 0.0;
        for (int i = 0; i < N; ++i) {
            if (i < count) small += grad[i];
            total += grad[i];
        }
        ratio[s] = total > 0.0 ? small / total : std::numeric_limits<double>::infinity();
      } catch (...) {
        skipped[s] = 1;
      }
    });

    long long nskip = 0;
    double c0 = std::numeric_limits<double>::infinity();
    for (long long s = 0; s < n_samples; ++s) {
        if (skipped[s]) {
            ++nskip;
            continue;
        }
        c0 = std::min(c0, ratio[s]);
    }
    if (skipped_out) *skipped_out = nskip;
    if (nskip == n_samples)
        throw SamplerStarvationError("lemma3: all samples were inadmissible");
    return c0;
}

}  // namespace lambdaflow
