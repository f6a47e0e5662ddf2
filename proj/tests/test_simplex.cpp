#include "alfeld/errors.hpp"
#include "alfeld/simplex.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace alfeld;

TEST(Binomial, SmallValues)
{
  EXPECT_EQ(binomial(5, 2), 10);
  EXPECT_EQ(binomial(7, 0), 1);
  EXPECT_EQ(binomial(7, 7), 1);
  EXPECT_EQ(binomial(3, 5), 0);
  EXPECT_DOUBLE_EQ(factorial(4), 24.0);
}

TEST(Binomial, PascalRule)
{
  for (int n = 1; n < 20; ++n)
    for (int k = 1; k < n; ++k)
      EXPECT_EQ(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
}

TEST(IndexSet, RejectsBadLabels)
{
  EXPECT_THROW(IndexSet(2, {0, 4}), DomainError);
  EXPECT_THROW(IndexSet(2, {-1}), DomainError);
}

TEST(IndexSet, SubsetAndContains)
{
  const IndexSet f(3, {0, 2});
  const IndexSet g(3, {0, 1, 2, 4});
  EXPECT_TRUE(f.subset_of(g));
  EXPECT_FALSE(g.subset_of(f));
  EXPECT_TRUE(g.has_c());
  EXPECT_FALSE(f.has_c());
  EXPECT_TRUE(g.contains(4));
  EXPECT_EQ(f.dim(), 1);
  EXPECT_EQ(f.anchor(), 0);
}

TEST(Subsimplices, CountsOnT)
{
  for (int d = 2; d <= 3; ++d)
    for (int l = 0; l <= d; ++l)
      EXPECT_EQ(static_cast<long long>(subsimplices(d, l).size()), binomial(d + 1, l + 1));
}

TEST(Subsimplices, CountsOnSplit)
{
  // faces of T (l < d) plus cones over (l-1)-faces of T with apex c
  for (int d = 2; d <= 3; ++d)
    for (int l = 0; l <= d; ++l) {
      const long long onT = l < d ? binomial(d + 1, l + 1) : 0;
      EXPECT_EQ(static_cast<long long>(split_subsimplices(d, l).size()), onT + binomial(d + 1, l));
      EXPECT_EQ(static_cast<long long>(interior_split_subsimplices(d, l).size()), binomial(d + 1, l));
    }
}

TEST(Subsimplices, SplitCellsAndInteriorFaces)
{
  const int d = 3;
  for (int i = 0; i <= d; ++i) {
    const IndexSet Ti = split_cell(d, i);
    EXPECT_EQ(Ti.size(), d + 1);
    EXPECT_FALSE(Ti.contains(i));
    EXPECT_TRUE(Ti.has_c());
  }
  std::set<int> idx;
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j) {
      const IndexSet F = interior_face(d, i, j);
      EXPECT_TRUE(F.subset_of(split_cell(d, i)));
      EXPECT_TRUE(F.subset_of(split_cell(d, j)));
      idx.insert(pair_index(d, i, j));
    }
  EXPECT_EQ(idx.size(), 6u);
  EXPECT_EQ(*idx.begin(), 0);
  EXPECT_EQ(*idx.rbegin(), 5);
  EXPECT_THROW(interior_face(d, 1, 1), DomainError);
}

TEST(Complements, StarAndC)
{
  const IndexSet f(2, {1});
  EXPECT_EQ(complement_star(f), IndexSet(2, {0, 2}));
  EXPECT_EQ(complement_c(f), IndexSet(2, {0, 2, 3}));
  EXPECT_THROW(complement_star(IndexSet(2, {0, 3})), DomainError);
}

TEST(Incidence, InteriorFacesListed)
{
  for (int d = 2; d <= 3; ++d) {
    const SplitIncidence inc = split_incidence(d);
    EXPECT_EQ(static_cast<long long>(inc.interior_faces.size()), binomial(d + 1, 2));
    for (const auto& e : inc.entries)
      if (e.in_face)
        EXPECT_TRUE(e.in_cell);
  }
}
