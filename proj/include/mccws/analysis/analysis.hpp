#pragma once

// Inspection of learned embeddings: a 2-D PCA of the criterion table and
// cosine nearest neighbours in the bigram table.

#include <array>
#include <span>
#include <cstddef>
#include <string>
#include <vector>

#include "mccws/model/model.hpp"
#include "mccws/numeric/tensor.hpp"

namespace mccws {

struct PcaResult {
  std::vector<std::array<double, 2>> points;  // one per input row
  std::array<double, 2> variances{};          // eigenvalues of the centered scatter matrix
};

// Mean-centers the rows and projects them on the top two principal axes,
// using the M x M Gram matrix or the d x d scatter matrix, whichever is
// smaller. Each axis is signed so its first nonzero entry is positive.
// Throws std::invalid_argument for fewer than two rows.
PcaResult pca_2d(const Tensor& rows);

struct CriterionPoint {
  std::string criterion;
  double x = 0;
  double y = 0;
};

std::vector<CriterionPoint> analyze_criteria(const Model& model);

double cosine_similarity(std::span<const Scalar> a, std::span<const Scalar> b);

struct Neighbor {
  std::size_t index = 0;
  double similarity = 0;
};

// Top-k rows of `table` by cosine similarity to row `query`, excluding the
// query and every row below `first_candidate`. Ties keep the lower index.
std::vector<Neighbor> nearest_rows(const Tensor& table, std::size_t query, std::size_t k,
                                   std::size_t first_candidate = 0);

struct BigramNeighbor {
  std::string bigram;  // the two characters, concatenated
  double similarity = 0;
};

// `query` holds two characters, optionally separated by a space.
// Throws std::invalid_argument when the bigram is not in the vocabulary.
std::vector<BigramNeighbor> nearest_bigrams(const Model& model, const std::string& query, std::size_t k);

}  // namespace mccws
