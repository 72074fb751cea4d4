#pragma once

// Structure parameters of Oeljeklaus-Toma type algebras and of the more
// general semidirect products h x_lambda I, and builders that turn them into
// bracket tables.

#include <optional>
#include <set>
#include <vector>

#include "otflow/dense.hpp"
#include "otflow/errors.hpp"
#include "otflow/lie_core.hpp"
#include "otflow/scalar.hpp"

namespace otflow {

using RealMatrix = std::vector<std::vector<double>>;

/// b entries within this distance of {0, -1} count as admissible.
inline constexpr double kAdmissibilityTol = 1e-9;

struct OTParams {
    int r = 0;
    int s = 0;
    RealMatrix b;  // r x s
    RealMatrix c;  // r x s

    /// lambda_{ki} = (i/4) b_{ki} - c_{ki} / 2, with k in [0, r), i in [0, s).
    template <class T = cx>
    T lambda(int k, int i) const {
        using Tr = ScalarTraits<T>;
        const T quarter_i = Tr::from_double(0.0, 0.25);
        return quarter_i * Tr::from_double(b[k][i]) - Tr::from_double(c[k][i]) * Tr::from_double(0.5);
    }

    friend bool operator==(const OTParams&, const OTParams&) = default;
};

/// Throws StructuralError on ragged or mis-sized tables.
void check_shape(const OTParams& p);

/// Largest |sum_i b_{ki} + 1| over rows k, together with the worst row.
std::pair<double, int> row_sum_defect(const OTParams& p);

/// Throws AdmissibilityError naming the first row whose sum is not -1.
void require_row_sums(const OTParams& p, double tol = kAdmissibilityTol);

/// r = s, b in {0,-1}, one -1 per row and per column (any column order).
bool is_pluriclosed_admissible(const OTParams& p, double tol = kAdmissibilityTol);

/// Admissible parameters with columns reordered so that b_{kk} = -1.
/// permutation[k] is the original column now sitting at position k.
struct AdmissibleParams {
    OTParams params;
    std::vector<int> permutation;
};

/// Reorders the gamma columns into normal form; throws AdmissibilityError
/// when the pattern is not admissible.
AdmissibleParams normalize_admissible(const OTParams& p, double tol = kAdmissibilityTol);

/// True when b is already diagonal -1 (within tol).
bool is_normal_form(const OTParams& p, double tol = kAdmissibilityTol);

/// {p : c_{jp} = 0 for all j != p}, 0-based. Requires normal-form admissible params.
std::vector<int> admissible_off_diagonal_indices(const OTParams& p, double tol = kAdmissibilityTol);

/// Brackets
///   [Z_k, conj Z_k] = -(i/2)(Z_k + conj Z_k),
///   [Z_k, W_i] = -lambda_{ki} W_i,
///   [Z_k, conj W_i] = conj(lambda_{ki}) conj W_i,
/// plus their conjugates; everything else vanishes.
template <class T = cx>
StructureConstants<T> build_ot_algebra(const OTParams& p, double tol = kAdmissibilityTol) {
    check_shape(p);
    require_row_sums(p, tol);
    using Tr = ScalarTraits<T>;
    BracketBuilder<T> bb(p.r, p.s, /*ot_type=*/true);
    const auto& sc = bb.peek();
    const T minus_half_i = Tr::from_double(0.0, -0.5);
    for (int k = 0; k < p.r; ++k) {
        bb.add(sc.z(k), sc.zbar(k), sc.z(k), minus_half_i);
        bb.add(sc.z(k), sc.zbar(k), sc.zbar(k), minus_half_i);
        for (int i = 0; i < p.s; ++i) {
            const T lam = p.lambda<T>(k, i);
            bb.add_with_conjugate(sc.z(k), sc.w(i), sc.w(i), -lam);
            bb.add_with_conjugate(sc.z(k), sc.wbar(i), sc.wbar(i), Tr::conj(lam));
        }
    }
    return std::move(bb).build();
}

/// Semidirect data h x_lambda I. lambda[i][a] = lambda_a(Z_i) is the
/// eigenvalue of Z_i on conj W_a; lambda_prime[i][a] the eigenvalue on W_a.
struct SemidirectParams {
    int r = 0;
    int s = 0;
    std::vector<std::vector<cx>> lambda;
    std::optional<std::vector<std::vector<cx>>> lambda_prime;

    friend bool operator==(const SemidirectParams&, const SemidirectParams&) = default;
};

struct ConditionFlags {
    bool i = false;    // h is r copies of the filiform algebra
    bool ii = false;   // I abelian with its own complex structure
    bool iii = false;  // lambda(h^{1,0}) commutes with J on I
    bool iv = false;   // conj W_a are eigenvectors of lambda(Z_i)
    bool v = false;    // sum_a Im lambda_a(Z_i) independent of i
    bool vi = false;   // W_a eigenvectors with sum_a Im lambda'_a(Z_i) independent of i
    bool lambda_prime_supplied = false;
    bool jacobi = false;
    double v_spread = 0.0;   // max - min over i of sum_a Im lambda_a(Z_i)
    double vi_spread = 0.0;
    double v_constant = 0.0;   // the common value when v holds
    double vi_constant = 0.0;
};

struct SemidirectAlgebra {
    StructureConstants<cx> algebra;
    ConditionFlags flags;
    /// Eigenvalues of Z_i on W_a actually used (supplied or forced by Jacobi).
    std::vector<std::vector<cx>> w_action;
};

/// Builds h x_lambda I. When lambda_prime is absent the W action is the one
/// forced by Jacobi for a diagonal action, lambda'_a(Z_i) = -conj(lambda_a(Z_i)).
SemidirectAlgebra build_semidirect(const SemidirectParams& p, double tol = kDefaultTol);

/// Semidirect data of an OT algebra: lambda_a(Z_i) = conj(lambda_{ia}),
/// lambda'_a(Z_i) = -lambda_{ia}.
SemidirectParams semidirect_from_ot(const OTParams& p);

}  // namespace otflow
