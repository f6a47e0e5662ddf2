// SPDX-License-Identifier: MIT
#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

namespace alfeld {

/// A subsimplex of the abstract d-simplex {0,...,d} or of its barycentric
/// split {0,...,d,c}. The barycenter label c is stored as d+1.
class IndexSet {
public:
  IndexSet() = default;
  IndexSet(int d, std::vector<int> labels);

  int ambient_dim() const { return d_; }
  int size() const { return static_cast<int>(labels_.size()); }
  int dim() const { return size() - 1; }
  int c() const { return d_ + 1; }
  const std::vector<int>& labels() const { return labels_; }
  int operator[](int m) const { return labels_[m]; }
  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }

  bool has_c() const { return !labels_.empty() && labels_.back() == d_ + 1; }
  bool contains(int label) const;
  bool subset_of(const IndexSet& other) const;
  /// f(0), the smallest label.
  int anchor() const { return labels_.front(); }

  std::string str() const;

  bool operator==(const IndexSet&) const = default;
  auto operator<=>(const IndexSet&) const = default;

private:
  int d_ = 0;
  std::vector<int> labels_;
};

/// Delta_l(T): all (l+1)-subsets of {0..d}, lexicographic.
std::vector<IndexSet> subsimplices(int d, int l);

/// Delta_l(T^R): all (l+1)-subsets of {0..d,c} contained in some T_i.
std::vector<IndexSet> split_subsimplices(int d, int l);

/// Interior members of Delta_l(T^R), i.e. those containing c.
std::vector<IndexSet> interior_split_subsimplices(int d, int l);

/// f* with f and f* partitioning {0..d}.
IndexSet complement_star(const IndexSet& f);

/// f^c with f and f^c partitioning {0..d,c}.
IndexSet complement_c(const IndexSet& f);

/// T_i = {i}^c.
IndexSet split_cell(int d, int i);

/// F_ij = {i,j}^c = T_i ∩ T_j.
IndexSet interior_face(int d, int i, int j);

struct SplitIncidence {
  struct Entry {
    IndexSet f;
    int i;
    bool in_cell;  // f ⊆ T_i
    bool in_face;  // f ⊆ F_i
  };
  std::vector<Entry> entries;
  /// (i, j, F_ij) for i < j, lexicographic.
  std::vector<std::pair<std::pair<int, int>, IndexSet>> interior_faces;
};

SplitIncidence split_incidence(int d);

/// Lexicographic position of the pair (i,j), i<j, among pairs of {0..d}.
int pair_index(int d, int i, int j);

long long binomial(int n, int k);
double factorial(int n);

} // namespace alfeld
