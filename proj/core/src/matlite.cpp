#include "coordfeas/matlite.hpp"

#include <Eigen/SVD>
#include <cassert>
#include <cmath>

namespace coordfeas {

namespace {

double svd_threshold(const Eigen::JacobiSVD<Mat>& svd, double tol) {
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  return tol * (smax > 0.0 ? smax : 1.0);
}

int rank_from(const Eigen::JacobiSVD<Mat>& svd, double tol) {
  const double thresh = svd_threshold(svd, tol);
  int rank = 0;
  const auto& sv = svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh) ++rank;
  }
  return rank;
}

// Pivots with less subspace presence than this are skipped during
// canonicalization; the coordinate trace argument guarantees enough columns
// remain for the small systems this library works with.
constexpr double kPivotCutoff = 1e-6;

}  // namespace

int rank_of(const Mat& a, double tol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  return rank_from(svd, tol);
}

std::optional<Vec> solve_particular(const Mat& a, const Vec& b, double tol) {
  assert(b.size() == a.rows());
  const int n = static_cast<int>(a.cols());
  if (a.rows() == 0) return Vec::Zero(n);
  if (n == 0) {
    if (b.lpNorm<Eigen::Infinity>() <= tol) return Vec(0);
    return std::nullopt;
  }

  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double thresh = svd_threshold(svd, tol);
  const auto& sv = svd.singularValues();
  Vec x = Vec::Zero(n);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh) {
      x += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(b) / sv(i));
    }
  }

  Mat ab(a.rows(), n + 1);
  ab << a, b;
  if (rank_of(ab, tol) > rank_from(svd, tol)) return std::nullopt;
  const double scale = 1.0 + b.lpNorm<Eigen::Infinity>();
  if ((a * x - b).lpNorm<Eigen::Infinity>() > tol * scale) return std::nullopt;
  return x;
}

std::vector<Vec> null_basis(const Mat& a, double tol) {
  const int n = static_cast<int>(a.cols());
  if (n == 0) return {};

  int rank = 0;
  Mat v_null;
  if (a.rows() == 0) {
    v_null = Mat::Identity(n, n);
  } else {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
    rank = rank_from(svd, tol);
    v_null = svd.matrixV().rightCols(n - rank);
  }
  const int kappa = n - rank;
  if (kappa == 0) return {};

  // Canonical form: Gram-Schmidt over the null-projector columns in coordinate
  // order. The projector depends only on the subspace, so the output does too;
  // each vector carries a positive entry on its pivot coordinate.
  const Mat proj = v_null * v_null.transpose();
  std::vector<Vec> basis;
  basis.reserve(kappa);
  for (int k = 0; k < n && static_cast<int>(basis.size()) < kappa; ++k) {
    Vec v = proj.col(k);
    for (const Vec& q : basis) v -= q * q.dot(v);
    for (const Vec& q : basis) v -= q * q.dot(v);
    const double norm = v.norm();
    if (norm > kPivotCutoff) basis.push_back(v / norm);
  }
  if (static_cast<int>(basis.size()) == kappa) return basis;

  // Pathologically skewed subspace: fall back to sign-fixed factor columns.
  basis.clear();
  for (int c = 0; c < kappa; ++c) {
    Vec v = v_null.col(c);
    int lead = 0;
    for (int i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(lead))) lead = i;
    }
    if (v(lead) < 0) v = -v;
    basis.push_back(v);
  }
  return basis;
}

}  // namespace coordfeas
