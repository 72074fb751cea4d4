#include "otflow/ot_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace otflow {

void check_shape(const OTParams& p) {
    if (p.r < 1 || p.s < 1) throw StructuralError("OT parameters need r >= 1 and s >= 1");
    auto check = [&](const RealMatrix& m, const char* name) {
        if (static_cast<int>(m.size()) != p.r) {
            std::ostringstream msg;
            msg << name << " has " << m.size() << " rows, expected r = " << p.r;
            throw StructuralError(msg.str());
        }
        for (const auto& row : m)
            if (static_cast<int>(row.size()) != p.s) {
                std::ostringstream msg;
                msg << name << " row has " << row.size() << " entries, expected s = " << p.s;
                throw StructuralError(msg.str());
            }
    };
    check(p.b, "b");
    check(p.c, "c");
}

std::pair<double, int> row_sum_defect(const OTParams& p) {
    double worst = 0.0;
    int row = -1;
    for (int k = 0; k < p.r; ++k) {
        double sum = 0.0;
        for (double v : p.b[k]) sum += v;
        const double defect = std::abs(sum + 1.0);
        if (defect > worst) {
            worst = defect;
            row = k;
        }
    }
    return {worst, row};
}

void require_row_sums(const OTParams& p, double tol) {
    check_shape(p);
    const auto [defect, row] = row_sum_defect(p);
    if (defect > tol) {
        double sum = 0.0;
        for (double v : p.b[row]) sum += v;
        std::ostringstream msg;
        msg << "row " << row + 1 << " of b sums to " << sum << ", expected -1";
        throw AdmissibilityError(msg.str());
    }
}

namespace {

// Column index holding the -1 in each row, or nullopt if the row is not a
// {0,-1} indicator with exactly one -1.
std::optional<std::vector<int>> minus_one_columns(const OTParams& p, double tol) {
    if (p.r != p.s) return std::nullopt;
    std::vector<int> cols(static_cast<std::size_t>(p.r), -1);
    std::vector<bool> used(static_cast<std::size_t>(p.s), false);
    for (int k = 0; k < p.r; ++k) {
        for (int i = 0; i < p.s; ++i) {
            const double v = p.b[k][i];
            if (std::abs(v + 1.0) <= tol) {
                if (cols[k] >= 0 || used[i]) return std::nullopt;
                cols[k] = i;
                used[i] = true;
            } else if (std::abs(v) > tol) {
                return std::nullopt;
            }
        }
        if (cols[k] < 0) return std::nullopt;
    }
    return cols;
}

}  // namespace

bool is_pluriclosed_admissible(const OTParams& p, double tol) {
    check_shape(p);
    return minus_one_columns(p, tol).has_value();
}

bool is_normal_form(const OTParams& p, double tol) {
    const auto cols = minus_one_columns(p, tol);
    if (!cols) return false;
    for (int k = 0; k < p.r; ++k)
        if ((*cols)[k] != k) return false;
    return true;
}

AdmissibleParams normalize_admissible(const OTParams& p, double tol) {
    check_shape(p);
    if (p.r != p.s) {
        std::ostringstream msg;
        msg << "pluriclosed admissibility needs r = s, got r = " << p.r << ", s = " << p.s;
        throw AdmissibilityError(msg.str());
    }
    const auto cols = minus_one_columns(p, tol);
    if (!cols) throw AdmissibilityError("b is not a {0,-1} pattern with one -1 per row and column");
    AdmissibleParams out;
    out.permutation = *cols;
    out.params.r = p.r;
    out.params.s = p.s;
    out.params.b.assign(static_cast<std::size_t>(p.r), std::vector<double>(static_cast<std::size_t>(p.s), 0.0));
    out.params.c = out.params.b;
    for (int k = 0; k < p.r; ++k)
        for (int col = 0; col < p.s; ++col) {
            const int src = out.permutation[col];
            out.params.b[k][col] = p.b[k][src];
            out.params.c[k][col] = p.c[k][src];
        }
    // snap b onto the exact pattern
    for (int k = 0; k < p.r; ++k)
        for (int col = 0; col < p.s; ++col) out.params.b[k][col] = (k == col) ? -1.0 : 0.0;
    return out;
}

std::vector<int> admissible_off_diagonal_indices(const OTParams& p, double tol) {
    if (!is_normal_form(p, kAdmissibilityTol))
        throw AdmissibilityError("admissible_off_diagonal_indices needs admissible parameters in normal form");
    std::vector<int> out;
    for (int col = 0; col < p.s; ++col) {
        bool ok = true;
        for (int j = 0; j < p.r && ok; ++j)
            if (j != col && std::abs(p.c[j][col]) > tol) ok = false;
        if (ok) out.push_back(col);
    }
    return out;
}

namespace {

// max - min of sum_a Im table[i][a] over i
std::pair<double, double> im_row_sum_spread(const std::vector<std::vector<cx>>& table) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : table) {
        double s = 0.0;
        for (const cx& v : row) s += v.imag();
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return {hi - lo, lo};
}

void check_table(const std::vector<std::vector<cx>>& t, int r, int s, const char* name) {
    if (static_cast<int>(t.size()) != r) {
        std::ostringstream msg;
        msg << name << " has " << t.size() << " rows, expected r = " << r;
        throw StructuralError(msg.str());
    }
    for (const auto& row : t)
        if (static_cast<int>(row.size()) != s) {
            std::ostringstream msg;
            msg << name << " row has " << row.size() << " entries, expected s = " << s;
            throw StructuralError(msg.str());
        }
}

}  // namespace

SemidirectAlgebra build_semidirect(const SemidirectParams& p, double tol) {
    if (p.r < 1 || p.s < 0) throw StructuralError("semidirect data needs r >= 1 and s >= 0");
    check_table(p.lambda, p.r, p.s, "lambda");
    if (p.lambda_prime) check_table(*p.lambda_prime, p.r, p.s, "lambda_prime");

    SemidirectAlgebra out;
    out.w_action.assign(static_cast<std::size_t>(p.r), std::vector<cx>(static_cast<std::size_t>(p.s)));
    for (int i = 0; i < p.r; ++i)
        for (int a = 0; a < p.s; ++a)
            out.w_action[i][a] = p.lambda_prime ? (*p.lambda_prime)[i][a] : -std::conj(p.lambda[i][a]);

    BracketBuilder<cx> bb(p.r, p.s, /*ot_type=*/true);
    const auto& sc = bb.peek();
    for (int k = 0; k < p.r; ++k) {
        bb.add(sc.z(k), sc.zbar(k), sc.z(k), cx(0.0, -0.5));
        bb.add(sc.z(k), sc.zbar(k), sc.zbar(k), cx(0.0, -0.5));
        for (int a = 0; a < p.s; ++a) {
            bb.add_with_conjugate(sc.z(k), sc.wbar(a), sc.wbar(a), p.lambda[k][a]);
            bb.add_with_conjugate(sc.z(k), sc.w(a), sc.w(a), out.w_action[k][a]);
        }
    }
    out.algebra = std::move(bb).build();

    ConditionFlags& f = out.flags;
    f.i = f.ii = f.iii = f.iv = true;  // by construction of the bracket table
    f.lambda_prime_supplied = p.lambda_prime.has_value();
    const auto [vs, vc] = im_row_sum_spread(p.lambda);
    f.v_spread = vs;
    f.v = vs <= tol;
    f.v_constant = f.v ? vc : 0.0;
    const auto [ws, wc] = im_row_sum_spread(out.w_action);
    f.vi_spread = ws;
    f.vi = ws <= tol;
    f.vi_constant = f.vi ? wc : 0.0;
    f.jacobi = validate_algebra(out.algebra, tol).passed();
    return out;
}

SemidirectParams semidirect_from_ot(const OTParams& p) {
    check_shape(p);
    SemidirectParams out;
    out.r = p.r;
    out.s = p.s;
    out.lambda.assign(static_cast<std::size_t>(p.r), std::vector<cx>(static_cast<std::size_t>(p.s)));
    std::vector<std::vector<cx>> prime = out.lambda;
    for (int i = 0; i < p.r; ++i)
        for (int a = 0; a < p.s; ++a) {
            out.lambda[i][a] = std::conj(p.lambda(i, a));
            prime[i][a] = -p.lambda(i, a);
        }
    out.lambda_prime = std::move(prime);
    return out;
}

}  // namespace otflow
