// Block-sparse Jacobian storage shared by the primal solve and (transposed)
// dual solve: 4x4 dense blocks on a diagonal + edge-neighbor pattern.
#pragma once

#include <vector>

#include "goalfv/euler.hpp"
#include "goalfv/mesh.hpp"

namespace goalfv {

class BlockSystem {
 public:
  BlockSystem() = default;

  /// Zero blocks on the symmetric pattern {diagonal} + {edge-adjacent pairs}.
  static BlockSystem from_mesh(const MeshHierarchy& mesh);

  /// Zero blocks on an explicit pattern; the diagonal entry is added to every
  /// row and the pattern is symmetrized.
  static BlockSystem from_pattern(int n, const std::vector<std::vector<int>>& cols);

  int rows() const { return n_; }
  int block_index(int i, int j) const;  // -1 if not in the pattern
  Mat4& block(int i, int j);
  const Mat4& block(int i, int j) const;
  Mat4& block_at(int slot) { return blocks_[slot]; }
  const Mat4& block_at(int slot) const { return blocks_[slot]; }
  int row_begin(int i) const { return row_offset_[i]; }
  int row_end(int i) const { return row_offset_[i + 1]; }
  int col_of(int slot) const { return col_[slot]; }

  std::vector<State4> rhs;

  /// y = A x, rows in parallel.
  void matvec(const std::vector<State4>& x, std::vector<State4>& y) const;

  /// Block (i,j) of the result equals the transpose of block (j,i).
  /// The transposed system carries this system's rhs unchanged.
  BlockSystem transposed() const;

  void add_diagonal_shift(double shift);
  void clear_values();

 private:
  int n_ = 0;
  std::vector<int> row_offset_;
  std::vector<int> col_;
  std::vector<Mat4> blocks_;
};

Mat4 mat4_mul(const Mat4& a, const Mat4& b);

/// LU factorization with partial pivoting of a 4x4 block.
struct Lu4 {
  Mat4 lu{};
  std::array<int, 4> piv{};
};
Lu4 lu4_factor(const Mat4& m);
State4 lu4_solve(const Lu4& f, State4 b);

}  // namespace goalfv
