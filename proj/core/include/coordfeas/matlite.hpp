#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace coordfeas {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Relative singular-value cutoff shared by the rank/solve/null-space helpers.
inline constexpr double kDefaultRankTol = 1e-10;

// Numerical rank: the number of singular values exceeding
// tol * (largest singular value, or 1 when the matrix is zero or empty).
int rank_of(const Mat& a, double tol = kDefaultRankTol);

// Minimum-norm solution of a * x = b. Returns nullopt when no solution exists,
// i.e. when rank([a | b]) exceeds rank(a) or the candidate fails the residual
// bound ||a * x - b||_inf <= tol * (1 + ||b||_inf).
std::optional<Vec> solve_particular(const Mat& a, const Vec& b,
                                    double tol = kDefaultRankTol);

// Orthonormal basis of the null space of a. The basis is canonical: it depends
// only on the subspace, not on factorization internals. Vectors are produced by
// Gram-Schmidt over the null-projector columns in coordinate order, so each has
// a positive entry on its pivot coordinate and vectors are ordered by pivot.
std::vector<Vec> null_basis(const Mat& a, double tol = kDefaultRankTol);

}  // namespace coordfeas
