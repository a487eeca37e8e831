#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lambdaflow/errors.hpp"

namespace lambdaflow {

/// Combinatorics of the partial-sum eigenvalue map: all strictly increasing
/// K-tuples from {1..n} in lexicographic order, N = binomial(n, K) of them.
struct LambdaStructure {
    int n = 0;
    int K = 0;
    int N = 0;
    std::vector<std::vector<int>> index_sets;  // 1-based entries, lex order
    std::vector<int> sets_flat;                // flattened, stride K

    /// Component j of the map: sum of lam over index_sets[j]. Linear in lam.
    void lambda_map(std::span<const double> lam, std::span<double> out) const;
    std::vector<double> lambda_map(std::span<const double> lam) const;
};

LambdaStructure index_sets(int n, int K);

/// e_1..e_k of x by the e_j(x_1..x_m) = e_j(x_1..x_{m-1}) + x_m e_{j-1} recurrence.
/// out must have size k.
void elementary_symmetric(std::span<const double> x, int k, std::span<double> out);

struct GardingResult {
    bool inside = false;
    std::vector<double> margins;  // sigma_1..sigma_k
};

/// Membership in the Garding cone {sigma_j > 0, 1 <= j <= k}. Total function.
GardingResult garding_membership(std::span<const double> Lam, int k);

enum class OperatorFamily { sigma_k_root, linear_weights };

/// A symmetric function f on Lambda-space: sigma_k(Lam)^{1/k} on the Garding
/// cone, or sum a_i Lam_i with a_i >= 0. Both are degree-1 homogeneous.
struct OperatorSpec {
    OperatorFamily family = OperatorFamily::sigma_k_root;
    int k = 1;                    // sigma_k_root only
    std::vector<double> weights;  // linear_weights only, size N
    LambdaStructure structure;

    int cone_order() const { return family == OperatorFamily::sigma_k_root ? k : 1; }
    /// Linear operators (sigma_1, linear weights) extend smoothly to all of
    /// R^N; only k >= 2 roots genuinely need the cone.
    bool requires_cone() const { return family == OperatorFamily::sigma_k_root && k >= 2; }
    std::string family_name() const;

    /// sup of f over the cone boundary (0 for sigma_k roots; 0 for uniform
    /// linear weights, +inf otherwise).
    double boundary_sup() const;
};

OperatorSpec make_sigma_k_operator(int n, int K, int k);
OperatorSpec make_linear_operator(int n, int K, std::vector<double> weights);

double f_eval(const OperatorSpec& spec, std::span<const double> Lam);
void f_grad(const OperatorSpec& spec, std::span<const double> Lam, std::span<double> out);
std::vector<double> f_grad(const OperatorSpec& spec, std::span<const double> Lam);

/// No-throw fast path for hot loops: returns false (and leaves f unset) when
/// the point is outside the cone; margin_out receives min_j sigma_j for
/// j <= cone_order regardless.
bool f_eval_fast(const OperatorSpec& spec, std::span<const double> Lam, double& f_out,
                 double& margin_out, std::span<double> scratch);

/// mu_p = sum of grad over the index sets containing p; sum_p mu_p = K * sum grad.
void eigen_gradient_weights(std::span<const double> grad, const LambdaStructure& ls,
                            std::span<double> mu_out);
std::vector<double> eigen_gradient_weights(std::span<const double> grad,
                                           const LambdaStructure& ls);

/// Lin-Trudinger rank of the tangent cone at infinity for f = sigma_k^{1/k}.
int rank_for_sigma_k(int N, int k);

struct RankCondition {
    bool ok = false;
    double required_rank = 0.0;  // N(n-K)/n + 1, compared over the reals
    int actual_rank = 0;         // N - k + 1
};

RankCondition rank_condition_s02(const LambdaStructure& ls, int k);

struct StructureReport {
    double min_grad_component = 0.0;
    double max_hessian_eigenvalue = 0.0;
    double euler_defect = 0.0;
    double C0_estimate = 0.0;
    double c0_s03_estimate = 0.0;
    double p4_margin = 0.0;
    bool p5_ray_limit_ok = false;
    long long samples_used = 0;
    long long seed = 0;
};

/// Sampled certification of (P2)-(P5), (S0.1), (S0.3) for an operator, given
/// pointwise bounds (inf, sup) on psi. Pure function of (spec, seed, count).
StructureReport check_structure(const OperatorSpec& spec, double psi_inf, double psi_sup,
                                long long n_samples, long long seed);

/// Empirical constant of the Lemma-3 inequality: minimum over level-set
/// samples of (sum of the k smallest gradient components) / (sum of all),
/// with k = N - rank + 1. Positive return certifies the inequality.
double lemma3_empirical_c0(const OperatorSpec& spec, double sigma, long long n_samples,
                           long long seed, long long* skipped = nullptr);

}  // namespace lambdaflow
