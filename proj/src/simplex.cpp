// SPDX-License-Identifier: MIT
#include "alfeld/simplex.hpp"

#include "alfeld/errors.hpp"

#include <algorithm>

namespace alfeld {

IndexSet::IndexSet(int d, std::vector<int> labels) : d_(d), labels_(std::move(labels))
{
  if (d < 1)
    throw DomainError("IndexSet: ambient dimension must be >= 1");
  std::sort(labels_.begin(), labels_.end());
  if (labels_.empty() || static_cast<int>(labels_.size()) > d + 2)
    throw DomainError("IndexSet: cardinality must lie in [1, d+2]");
  if (std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end())
    throw DomainError("IndexSet: repeated label");
  if (labels_.front() < 0 || labels_.back() > d + 1)
    throw DomainError("IndexSet: label out of range");
}

bool IndexSet::contains(int label) const
{
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

bool IndexSet::subset_of(const IndexSet& other) const
{
  return std::includes(other.labels_.begin(), other.labels_.end(), labels_.begin(), labels_.end());
}

std::string IndexSet::str() const
{
  std::string s = "{";
  for (std::size_t m = 0; m < labels_.size(); ++m) {
    if (m)
      s += ",";
    s += labels_[m] == d_ + 1 ? std::string("c") : std::to_string(labels_[m]);
  }
  return s + "}";
}

namespace {

void combinations(int n, int r, std::vector<std::vector<int>>& out)
{
  std::vector<int> cur(r);
  for (int m = 0; m < r; ++m)
    cur[m] = m;
  if (r > n)
    return;
  while (true) {
    out.push_back(cur);
    int m = r - 1;
    while (m >= 0 && cur[m] == n - r + m)
      --m;
    if (m < 0)
      break;
    ++cur[m];
    for (int q = m + 1; q < r; ++q)
      cur[q] = cur[q - 1] + 1;
  }
}

} // namespace

std::vector<IndexSet> subsimplices(int d, int l)
{
  if (d < 1 || l < 0 || l > d)
    throw DomainError("subsimplices: require 0 <= l <= d");
  std::vector<std::vector<int>> combos;
  combinations(d + 1, l + 1, combos);
  std::vector<IndexSet> out;
  out.reserve(combos.size());
  for (auto& c : combos)
    out.emplace_back(d, c);
  return out;
}

std::vector<IndexSet> split_subsimplices(int d, int l)
{
  if (d < 1 || l < 0 || l > d)
    throw DomainError("split_subsimplices: require 0 <= l <= d");
  std::vector<std::vector<int>> combos;
  combinations(d + 2, l + 1, combos);
  std::vector<IndexSet> out;
  for (auto& c : combos) {
    // T itself (all of 0..d) is not a simplex of the split complex.
    if (l == d && c.back() != d + 1)
      continue;
    out.emplace_back(d, c);
  }
  return out;
}

std::vector<IndexSet> interior_split_subsimplices(int d, int l)
{
  std::vector<IndexSet> out;
  for (auto& f : split_subsimplices(d, l))
    if (f.has_c())
      out.push_back(f);
  return out;
}

IndexSet complement_star(const IndexSet& f)
{
  const int d = f.ambient_dim();
  if (f.has_c())
    throw DomainError("complement_star: f must not contain c");
  if (f.size() > d)
    throw DomainError("complement_star: f must have dimension <= d-1");
  std::vector<int> out;
  for (int i = 0; i <= d; ++i)
    if (!f.contains(i))
      out.push_back(i);
  return IndexSet(d, out);
}

IndexSet complement_c(const IndexSet& f)
{
  const int d = f.ambient_dim();
  std::vector<int> out;
  for (int i = 0; i <= d + 1; ++i)
    if (!f.contains(i))
      out.push_back(i);
  if (out.empty())
    throw DomainError("complement_c: complement is empty");
  return IndexSet(d, out);
}

IndexSet split_cell(int d, int i)
{
  if (i < 0 || i > d)
    throw DomainError("split_cell: i out of range");
  return complement_c(IndexSet(d, {i}));
}

IndexSet interior_face(int d, int i, int j)
{
  if (i == j || i < 0 || j < 0 || i > d || j > d)
    throw DomainError("interior_face: need distinct i, j in {0..d}");
  return complement_c(IndexSet(d, {i, j}));
}

SplitIncidence split_incidence(int d)
{
  if (d < 1)
    throw DomainError("split_incidence: d >= 1");
  SplitIncidence inc;
  for (int l = 0; l <= d - 1; ++l)
    for (auto& f : subsimplices(d, l))
      for (int i : complement_star(f)) {
        inc.entries.push_back(
            {f, i, f.subset_of(split_cell(d, i)), f.subset_of(complement_star(IndexSet(d, {i})))});
      }
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j)
      inc.interior_faces.push_back({{i, j}, interior_face(d, i, j)});
  return inc;
}

int pair_index(int d, int i, int j)
{
  if (i > j)
    std::swap(i, j);
  int idx = 0;
  for (int a = 0; a < i; ++a)
    idx += d - a;
  return idx + (j - i - 1);
}

long long binomial(int n, int k)
{
  if (k < 0 || n < 0 || k > n)
    return 0;
  long long r = 1;
  for (int m = 1; m <= k; ++m)
    r = r * (n - k + m) / m;
  return r;
}

double factorial(int n)
{
  double r = 1;
  for (int m = 2; m <= n; ++m)
    r *= m;
  return r;
}

} // namespace alfeld
