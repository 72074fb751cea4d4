#pragma once

// Random instance generators and small reference computations shared by the tests.

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <vector>

#include "otflow/exterior.hpp"
#include "otflow/hermitian_curvature.hpp"
#include "otflow/lie_core.hpp"
#include "otflow/ot_model.hpp"

namespace test_support {

using namespace otflow;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// b in normal form (diagonal -1) and random c; zero_off_columns lists
/// columns whose off-diagonal c entries are forced to zero.
inline OTParams admissible_params(std::mt19937_64& rng, int s, const std::vector<int>& zero_off_columns = {}) {
    OTParams p;
    p.r = p.s = s;
    p.b.assign(s, std::vector<double>(s, 0.0));
    p.c.assign(s, std::vector<double>(s, 0.0));
    for (int k = 0; k < s; ++k) {
        p.b[k][k] = -1.0;
        for (int i = 0; i < s; ++i) p.c[k][i] = uniform(rng, -1.5, 1.5);
    }
    for (int col : zero_off_columns)
        for (int j = 0; j < s; ++j)
            if (j != col) p.c[j][col] = 0.0;
    return p;
}

/// Random OT parameters with real rows of b summing to -1.
inline OTParams general_params(std::mt19937_64& rng, int r, int s) {
    OTParams p;
    p.r = r;
    p.s = s;
    p.b.assign(r, std::vector<double>(s, 0.0));
    p.c.assign(r, std::vector<double>(s, 0.0));
    for (int k = 0; k < r; ++k) {
        double sum = 0.0;
        for (int i = 0; i + 1 < s; ++i) {
            p.b[k][i] = uniform(rng, -1.0, 0.5);
            sum += p.b[k][i];
        }
        p.b[k][s - 1] = -1.0 - sum;
        for (int i = 0; i < s; ++i) p.c[k][i] = uniform(rng, -1.0, 1.0);
    }
    return p;
}

/// Random Hermitian positive-definite matrix M M* + shift Id.
inline CMatrix random_pd(std::mt19937_64& rng, int n, double shift = 0.5) {
    CMatrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cx(uniform(rng, -1, 1), uniform(rng, -1, 1));
    CMatrix g = m * m.adjoint();
    for (int i = 0; i < n; ++i) g(i, i) += shift;
    return g;
}

/// Normal-form metric with mixed entries at mixed_at and |C|^2 < AB.
inline NormalFormMetric random_normal_form(std::mt19937_64& rng, int s, const std::vector<int>& mixed_at) {
    NormalFormMetric m;
    for (int i = 0; i < s; ++i) {
        m.A.push_back(uniform(rng, 0.3, 2.5));
        m.B.push_back(uniform(rng, 0.3, 2.5));
    }
    for (int p : mixed_at) {
        const double bound = std::sqrt(m.A[p] * m.B[p]);
        const double rad = uniform(rng, 0.05, 0.9) * bound;
        const double ang = uniform(rng, 0.0, 2.0 * M_PI);
        m.C.push_back({p, std::polar(rad, ang)});
    }
    return m;
}

inline FrameVector<cx> random_vector(std::mt19937_64& rng, int dim) {
    FrameVector<cx> v(static_cast<std::size_t>(dim));
    for (auto& z : v) z = cx(uniform(rng, -1, 1), uniform(rng, -1, 1));
    return v;
}

inline double max_abs(const FrameVector<cx>& v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

/// Value of a k-form on k frame vectors via the determinant convention
/// (e^{i1} ^ ... ^ e^{ik})(v_1, ..., v_k) = det[e^{ij}(v_l)].
inline cx evaluate_form(const Form<cx>& f, const std::vector<FrameVector<cx>>& vs) {
    cx total = 0.0;
    const int k = static_cast<int>(vs.size());
    for (const auto& [m, coeff] : f.terms()) {
        std::vector<int> idx;
        for (Monomial r = m; r; r &= r - 1) idx.push_back(std::countr_zero(r));
        if (static_cast<int>(idx.size()) != k) continue;
        // Leibniz expansion of the k x k determinant.
        std::vector<int> perm(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) perm[i] = i;
        cx det = 0.0;
        do {
            int inv = 0;
            for (int a = 0; a < k; ++a)
                for (int b = a + 1; b < k; ++b)
                    if (perm[a] > perm[b]) ++inv;
            cx prod = (inv % 2) ? -1.0 : 1.0;
            for (int a = 0; a < k; ++a) prod *= vs[perm[a]][idx[a]];
            det += prod;
        } while (std::next_permutation(perm.begin(), perm.end()));
        total += coeff * det;
    }
    return total;
}

}  // namespace test_support
