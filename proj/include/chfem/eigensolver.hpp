#pragma once
// Neumann Laplace eigenpairs A v = rho M v on zero-mean fields.

#include "chfem/sparse.hpp"

#include <vector>

namespace chfem {

struct EigenPair {
    double rho = 0.0;
    std::vector<double> v;  // M-normalized, M-orthogonal to the constants
};

struct EigenOptions {
    int block = 3;          // block width; multiplicities up to this are resolved
    int max_basis = 0;      // 0: automatic
    int max_restarts = 40;
    double tol = 1e-11;     // residual tolerance relative to max(1, rho) |Mv|
    unsigned long seed = 12345;
};

/// `count` smallest nonzero eigenvalues in ascending order.
///
/// Equal eigenvalues are returned as a canonical basis of their eigenspace.
/// Without `tiebreak` the basis comes from Gram-Schmidt (M-inner product) with
/// rows pivoted by decreasing norm, which depends only on the eigenspace. With
/// `tiebreak` the eigenspace is rotated to diagonalize it, ordered by
/// ascending tiebreak value (the directional stiffness gives axis modes).
/// Every vector is signed so its first entry above 1e-6 max|v| is positive.
std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& a, const SparseMatrix& m, int count,
                                           const SparseMatrix* tiebreak = nullptr,
                                           const EigenOptions& opt = {});

/// Dense generalized solver with the same output conventions.
std::vector<EigenPair> dense_eigenpairs(const SparseMatrix& a, const SparseMatrix& m, int count,
                                        const SparseMatrix* tiebreak = nullptr);

/// amplitude * s / max|s| with s = sum combo[k] pairs[k].v; zero if s vanishes.
std::vector<double> mode_initial_data(const std::vector<EigenPair>& pairs, const std::vector<double>& combo,
                                      double amplitude);

/// max_k |A v_k - rho_k M v_k| / |M v_k|
double eigen_residual(const SparseMatrix& a, const SparseMatrix& m, const EigenPair& p);

} // namespace chfem
