#pragma once

// Derivation algebras and algebraic solitons
//   rho^{1,1} = c omega + (1/2)(omega(D., .) + omega(., D.)),
// with D a derivation commuting with J.
//
// Endomorphisms of the full frame act on columns: D e_j = sum_i D(i, j) e_i.
// A real J-commuting map is determined by its (1,0) block E, with the (0,1)
// block equal to conj(E). For such D the soliton equation in the (1,1)
// coefficients K reads K = i (c G + (E^T G + G conj E) / 2).

#include <optional>
#include <string>
#include <vector>

#include "otflow/dense.hpp"
#include "otflow/hermitian_curvature.hpp"
#include "otflow/lie_core.hpp"
#include "otflow/ot_model.hpp"

namespace otflow {

/// Max over frame pairs of |D[x,y] - [Dx,y] - [x,Dy]|.
double derivation_defect(const StructureConstants<cx>& sc, const CMatrix& d);

/// Expands a (1,0) block E into diag(E, conj E).
CMatrix j_commuting_map(const CMatrix& e);

struct DerivationBasis {
    bool commute_with_J = true;
    /// Real basis of the derivation space as full dim x dim maps.
    std::vector<CMatrix> maps;
    /// (1,0) blocks of the maps when commute_with_J is set.
    std::vector<CMatrix> blocks;
    /// Smallest discarded singular value and largest kept one, for diagnostics.
    double null_threshold = 0.0;

    int real_dimension() const { return static_cast<int>(maps.size()); }
};

/// Real null space of the derivation identity over all frame pairs, computed
/// by SVD. With commute_with_J the unknowns are the 2 n^2 real parameters of
/// E; otherwise all 4 n^2 real parameters of a real endomorphism.
DerivationBasis derivation_space(const StructureConstants<cx>& sc, bool commute_with_J, double tol = 1e-9);

/// True when every element of the basis kills h and maps each W_i into C W_i.
bool kills_h_and_preserves_w_lines(const StructureConstants<cx>& sc, const DerivationBasis& basis, double tol = 1e-9);

struct SolitonCertificate {
    double c = 0.0;
    /// (1,0) block of D.
    CMatrix D_block;
    double residual = 0.0;
    double derivation_defect = 0.0;
    bool expanding() const { return c < 0.0; }
};

struct SolitonFit {
    SolitonCertificate best;
    double tol = 0.0;
    bool accepted = false;
};

/// Default acceptance rule: residual <= 1e-8 (1 + max |rho|).
double soliton_tolerance(const CMatrix& k, double base = 1e-8);

/// Least-squares fit of (c, D) over the J-commuting derivation space.
SolitonFit fit_algebraic_soliton(const StructureConstants<cx>& sc, const CMetric& g, const CMatrix& k,
                                 const DerivationBasis& basis, double base_tol = 1e-8);
SolitonFit fit_algebraic_soliton(const StructureConstants<cx>& sc, const CMetric& g, const CMatrix& k,
                                 double base_tol = 1e-8);

/// The certificate when the fit is accepted, nothing otherwise.
std::optional<SolitonCertificate> detect_algebraic_soliton(const StructureConstants<cx>& sc, const CMetric& g,
                                                           const CMatrix& k, double base_tol = 1e-8);

/// h-block equal to A Id and no h-I mixed entries; the I-block is free.
bool classify_chern_ricci_soliton(const OTParams& p, const CMetric& g, double tol = kDefaultTol);

/// Pluriclosed metric on admissible data with diagonal h and I blocks, no mixed
/// entries and all A_i equal. Parameters may come with permuted columns.
bool classify_pluriclosed_soliton(const OTParams& p, const CMetric& g, double tol = kDefaultTol);

struct LauretReport {
    /// P = 0: the equivalence does not apply.
    bool degenerate = false;
    std::vector<double> eigenvalues;
    /// The common nonzero eigenvalue when there is exactly one.
    std::optional<double> c;
    /// P - c I is a derivation for some real c (least squares over Der).
    bool criterion2 = false;
    double criterion2_c = 0.0;
    double criterion2_residual = 0.0;
    /// spectrum in {0, c}, ker P an abelian ideal, its g-orthogonal complement a subalgebra.
    bool spectrum_ok = false;
    bool kernel_abelian_ideal = false;
    bool complement_subalgebra = false;
    bool criterion3 = false;
    /// detect_algebraic_soliton on the same form.
    bool criterion1 = false;
    std::optional<SolitonCertificate> certificate;
    bool agree = false;

    std::string describe() const;
};

LauretReport theorem_lauret_equivalence_check(const StructureConstants<cx>& sc, const CMetric& g, const CMatrix& k,
                                              double tol = 1e-8);

}  // namespace otflow
