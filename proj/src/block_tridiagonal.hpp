#ifndef NULLCTL_SRC_BLOCK_TRIDIAGONAL_HPP
#define NULLCTL_SRC_BLOCK_TRIDIAGONAL_HPP

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace nullctl::detail {

/// Block tridiagonal matrix with 2x2 blocks, factored by block Thomas
/// elimination. Vectors are interleaved: entries 2j, 2j+1 belong to block j.
class BlockTridiagonal2 {
 public:
  using Block = Eigen::Matrix2d;

  explicit BlockTridiagonal2(int blocks)
      : lower_(blocks, Block::Zero()), diag_(blocks, Block::Zero()), upper_(blocks, Block::Zero()) {}

  int blocks() const { return static_cast<int>(diag_.size()); }
  Block& lower(int j) { return lower_[j]; }  // (j, j-1)
  Block& diag(int j) { return diag_[j]; }
  Block& upper(int j) { return upper_[j]; }  // (j, j+1)

  /// Returns false when a pivot block is singular.
  bool factor() {
    const int nb = blocks();
    pivot_inv_.assign(nb, Block::Zero());
    mult_.assign(nb, Block::Zero());
    Block pivot = diag_[0];
    for (int j = 0;; ++j) {
      const double det = pivot.determinant();
      if (!(std::abs(det) > 1e-300)) return false;
      pivot_inv_[j] = pivot.inverse();
      if (j + 1 == nb) break;
      mult_[j + 1] = lower_[j + 1] * pivot_inv_[j];
      pivot = diag_[j + 1] - mult_[j + 1] * upper_[j];
    }
    return true;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    const int nb = blocks();
    Eigen::VectorXd x = rhs;
    for (int j = 1; j < nb; ++j) x.segment<2>(2 * j) -= mult_[j] * x.segment<2>(2 * j - 2);
    x.segment<2>(2 * nb - 2) = pivot_inv_[nb - 1] * x.segment<2>(2 * nb - 2);
    for (int j = nb - 2; j >= 0; --j) {
      const Eigen::Vector2d r = x.segment<2>(2 * j) - upper_[j] * x.segment<2>(2 * j + 2);
      x.segment<2>(2 * j) = pivot_inv_[j] * r;
    }
    return x;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    const int nb = blocks();
    Eigen::VectorXd y(2 * nb);
    for (int j = 0; j < nb; ++j) {
      Eigen::Vector2d acc = diag_[j] * x.segment<2>(2 * j);
      if (j > 0) acc += lower_[j] * x.segment<2>(2 * j - 2);
      if (j + 1 < nb) acc += upper_[j] * x.segment<2>(2 * j + 2);
      y.segment<2>(2 * j) = acc;
    }
    return y;
  }

 private:
  std::vector<Block> lower_, diag_, upper_;
  std::vector<Block> pivot_inv_, mult_;
};

}  // namespace nullctl::detail

#endif  // NULLCTL_SRC_BLOCK_TRIDIAGONAL_HPP
