#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

namespace cds {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Orthonormal basis (columns) of the column span of M, rank decided at relative tolerance tol.
inline Mat orthonormal_basis(const Mat& M, double tol = 1e-10) {
  if (M.cols() == 0) return Mat(M.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  int r = 0;
  while (r < s.size() && s(r) > tol * std::max(1.0, smax)) ++r;
  return svd.matrixU().leftCols(r);
}

inline int numerical_rank(const Mat& M, double tol = 1e-10) { return static_cast<int>(orthonormal_basis(M, tol).cols()); }

// Orthonormal basis of ker M.
inline Mat null_space(const Mat& M, double tol = 1e-10) {
  const int n = static_cast<int>(M.cols());
  if (M.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  int r = 0;
  while (r < s.size() && s(r) > tol * std::max(1.0, smax)) ++r;
  return svd.matrixV().rightCols(n - r);
}

// Sines of the principal angles between the column spans of A and B, ascending,
// one per column of the orthonormalized A.
inline std::vector<double> principal_sines(const Mat& A, const Mat& B) {
  Mat QA = orthonormal_basis(A), QB = orthonormal_basis(B);
  Mat R = QA - QB * (QB.transpose() * QA);
  std::vector<double> out;
  if (R.cols() == 0) return out;
  Eigen::JacobiSVD<Mat> svd(R);
  for (int i = 0; i < svd.singularValues().size(); ++i) out.push_back(svd.singularValues()(i));
  std::sort(out.begin(), out.end());
  return out;
}

// Dimension of span(A) intersect span(B): principal angles below the threshold.
inline int intersection_dim(const Mat& A, const Mat& B, double threshold = 1e-8) {
  auto s = principal_sines(A, B);
  return static_cast<int>(std::count_if(s.begin(), s.end(), [&](double v) { return v < threshold; }));
}

// Largest principal-angle sine between equal-dimension subspaces; 1 if dimensions differ.
inline double subspace_distance(const Mat& A, const Mat& B) {
  Mat QA = orthonormal_basis(A), QB = orthonormal_basis(B);
  if (QA.cols() != QB.cols()) return 1.0;
  auto s = principal_sines(QA, QB);
  return s.empty() ? 0.0 : s.back();
}

// Distance of v from span(A).
inline double distance_to_span(const Mat& A, const Vec& v) {
  Mat Q = orthonormal_basis(A);
  return (v - Q * (Q.transpose() * v)).norm();
}

inline Mat to_mat(const std::vector<double>& rowmajor, int rows, int cols) {
  Mat M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = rowmajor[i * cols + j];
  return M;
}

inline Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size())); }

// Gauss-Jordan inverse over any field of scalars (duals included); aborts on a zero pivot.
template <class S>
bool invert(std::vector<S>& a, int n) {
  std::vector<S> inv(n * n, S(0.0));
  for (int i = 0; i < n; ++i) inv[i * n + i] = S(1.0);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(value(a[r * n + c])) > std::abs(value(a[piv * n + c]))) piv = r;
    if (std::abs(value(a[piv * n + c])) < 1e-300) return false;
    if (piv != c)
      for (int j = 0; j < n; ++j) {
        std::swap(a[piv * n + j], a[c * n + j]);
        std::swap(inv[piv * n + j], inv[c * n + j]);
      }
    S p = a[c * n + c];
    for (int j = 0; j < n; ++j) {
      a[c * n + j] = a[c * n + j] / p;
      inv[c * n + j] = inv[c * n + j] / p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      S f = a[r * n + c];
      for (int j = 0; j < n; ++j) {
        a[r * n + j] = a[r * n + j] - f * a[c * n + j];
        inv[r * n + j] = inv[r * n + j] - f * inv[c * n + j];
      }
    }
  }
  a = inv;
  return true;
}

}  // namespace cds
