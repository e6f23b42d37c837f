#include "goalfv/block_system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace goalfv {

BlockSystem BlockSystem::from_mesh(const MeshHierarchy& mesh) {
  const int n = mesh.active_count();
  std::vector<std::vector<int>> cols(n);
  for (const auto& e : mesh.edges()) {
    if (e.right < 0) continue;
    const int li = mesh.active_index_of(e.left);
    const int ri = mesh.active_index_of(e.right);
    cols[li].push_back(ri);
    cols[ri].push_back(li);
  }
  return from_pattern(n, cols);
}

BlockSystem BlockSystem::from_pattern(int n, const std::vector<std::vector<int>>& cols_in) {
  BlockSystem s;
  s.n_ = n;
  std::vector<std::vector<int>> cols(n);
  for (int i = 0; i < n; ++i) {
    cols[i].push_back(i);
    for (int j : cols_in[i]) {
      cols[i].push_back(j);
      cols[j].push_back(i);
    }
  }
  s.row_offset_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& c = cols[i];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    s.row_offset_[i + 1] = s.row_offset_[i] + static_cast<int>(c.size());
  }
  s.col_.resize(s.row_offset_[n]);
  for (int i = 0; i < n; ++i)
    std::copy(cols[i].begin(), cols[i].end(), s.col_.begin() + s.row_offset_[i]);
  s.blocks_.assign(s.col_.size(), mat4_zero());
  s.rhs.assign(n, State4{});
  return s;
}

int BlockSystem::block_index(int i, int j) const {
  const auto first = col_.begin() + row_offset_[i];
  const auto last = col_.begin() + row_offset_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return -1;
  return static_cast<int>(it - col_.begin());
}

Mat4& BlockSystem::block(int i, int j) {
  const int s = block_index(i, j);
  if (s < 0) throw std::out_of_range("block (" + std::to_string(i) + "," + std::to_string(j) + ") is not in the sparsity pattern");
  return blocks_[s];
}

const Mat4& BlockSystem::block(int i, int j) const {
  const int s = block_index(i, j);
  if (s < 0) throw std::out_of_range("block (" + std::to_string(i) + "," + std::to_string(j) + ") is not in the sparsity pattern");
  return blocks_[s];
}

void BlockSystem::matvec(const std::vector<State4>& x, std::vector<State4>& y) const {
  y.assign(n_, State4{});
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_; ++i) {
    State4 acc{};
    for (int s = row_offset_[i]; s < row_offset_[i + 1]; ++s)
      acc += mat4_apply(blocks_[s], x[col_[s]]);
    y[i] = acc;
  }
}

BlockSystem BlockSystem::transposed() const {
  BlockSystem t;
  t.n_ = n_;
  t.row_offset_ = row_offset_;  // pattern is symmetric
  t.col_ = col_;
  t.blocks_.assign(blocks_.size(), mat4_zero());
  t.rhs = rhs;
  for (int i = 0; i < n_; ++i) {
    for (int s = row_offset_[i]; s < row_offset_[i + 1]; ++s) {
      const int j = col_[s];
      const int ts = t.block_index(j, i);
      t.blocks_[ts] = mat4_transpose(blocks_[s]);
    }
  }
  return t;
}

void BlockSystem::add_diagonal_shift(double shift) {
  for (int i = 0; i < n_; ++i) {
    Mat4& d = blocks_[block_index(i, i)];
    for (int k = 0; k < 4; ++k) at(d, k, k) += shift;
  }
}

void BlockSystem::clear_values() {
  std::fill(blocks_.begin(), blocks_.end(), mat4_zero());
  std::fill(rhs.begin(), rhs.end(), State4{});
}

Mat4 mat4_mul(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      const double aik = at(a, i, k);
      for (int j = 0; j < 4; ++j) at(c, i, j) += aik * at(b, k, j);
    }
  return c;
}

Lu4 lu4_factor(const Mat4& m) {
  Lu4 f;
  f.lu = m;
  for (int k = 0; k < 4; ++k) {
    int p = k;
    for (int r = k + 1; r < 4; ++r)
      if (std::abs(at(f.lu, r, k)) > std::abs(at(f.lu, p, k))) p = r;
    f.piv[k] = p;
    if (p != k)
      for (int c = 0; c < 4; ++c) std::swap(at(f.lu, k, c), at(f.lu, p, c));
    const double d = at(f.lu, k, k);
    if (d == 0.0) throw std::runtime_error("singular 4x4 block");
    for (int r = k + 1; r < 4; ++r) {
      const double l = at(f.lu, r, k) / d;
      at(f.lu, r, k) = l;
      for (int c = k + 1; c < 4; ++c) at(f.lu, r, c) -= l * at(f.lu, k, c);
    }
  }
  return f;
}

State4 lu4_solve(const Lu4& f, State4 b) {
  for (int k = 0; k < 4; ++k)
    if (f.piv[k] != k) std::swap(b[k], b[f.piv[k]]);
  for (int k = 1; k < 4; ++k)
    for (int c = 0; c < k; ++c) b[k] -= at(f.lu, k, c) * b[c];
  for (int k = 3; k >= 0; --k) {
    for (int c = k + 1; c < 4; ++c) b[k] -= at(f.lu, k, c) * b[c];
    b[k] /= at(f.lu, k, k);
  }
  return b;
}

}  // namespace goalfv
