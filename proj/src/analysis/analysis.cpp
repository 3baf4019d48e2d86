#include "mccws/analysis/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mccws/corpus/text.hpp"
#include "mccws/corpus/vocab.hpp"

namespace mccws {

namespace {

constexpr double kZero = 1e-12;

void fix_sign(Eigen::VectorXd& axis) {
  for (Eigen::Index i = 0; i < axis.size(); ++i) {
    if (std::abs(axis[i]) > kZero) {
      if (axis[i] < 0) axis = -axis;
      return;
    }
  }
}

}  // namespace

PcaResult pca_2d(const Tensor& rows) {
  const auto m = static_cast<Eigen::Index>(rows.rows());
  const auto d = static_cast<Eigen::Index>(rows.cols());
  if (m < 2) throw std::invalid_argument("PCA needs at least two rows, got " + std::to_string(m));

  Eigen::MatrixXd x(m, d);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < d; ++c) x(r, c) = rows.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  x.rowwise() -= x.colwise().mean();

  const bool gram = m <= d;
  const Eigen::MatrixXd scatter = gram ? Eigen::MatrixXd(x * x.transpose()) : Eigen::MatrixXd(x.transpose() * x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scatter);
  if (solver.info() != Eigen::Success) throw std::runtime_error("PCA eigen-decomposition failed");

  PcaResult result;
  result.points.assign(static_cast<std::size_t>(m), {0.0, 0.0});
  const Eigen::Index n = scatter.rows();
  for (int k = 0; k < 2 && k < n; ++k) {
    // Eigenvalues come in increasing order.
    const double lambda = std::max(0.0, solver.eigenvalues()[n - 1 - k]);
    result.variances[static_cast<std::size_t>(k)] = lambda;
    if (lambda <= kZero) continue;
    Eigen::VectorXd axis = gram ? Eigen::VectorXd(x.transpose() * solver.eigenvectors().col(n - 1 - k) / std::sqrt(lambda))
                                : Eigen::VectorXd(solver.eigenvectors().col(n - 1 - k));
    fix_sign(axis);
    const Eigen::VectorXd scores = x * axis;
    for (Eigen::Index r = 0; r < m; ++r) result.points[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] = scores[r];
  }
  return result;
}

std::vector<CriterionPoint> analyze_criteria(const Model& model) {
  const auto pca = pca_2d(model.parameter("embedding.criterion").value);
  std::vector<CriterionPoint> out;
  for (std::size_t i = 0; i < pca.points.size(); ++i)
    out.push_back({model.vocab().criteria[i], pca.points[i][0], pca.points[i][1]});
  return out;
}

double cosine_similarity(std::span<const Scalar> a, std::span<const Scalar> b) {
  if (a.size() != b.size()) throw DimensionError("cosine_similarity: vectors differ in length");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<Neighbor> nearest_rows(const Tensor& table, std::size_t query, std::size_t k,
                                   std::size_t first_candidate) {
  const std::size_t n = table.rows(), d = table.cols();
  if (query >= n) throw std::out_of_range("nearest_rows: query row out of range");
  const auto data = table.data();
  const auto row = [&](std::size_t r) { return data.subspan(r * d, d); };
  std::vector<Neighbor> all;
  for (std::size_t r = first_candidate; r < n; ++r)
    if (r != query) all.push_back({r, cosine_similarity(row(query), row(r))});
  const auto take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      return a.similarity != b.similarity ? a.similarity > b.similarity : a.index < b.index;
                    });
  all.resize(take);
  return all;
}

std::vector<BigramNeighbor> nearest_bigrams(const Model& model, const std::string& query, std::size_t k) {
  std::vector<std::string> tokens;
  for (auto& t : split_chars(normalize_width(query)))
    if (t != " ") tokens.push_back(std::move(t));
  if (tokens.size() != 2) throw std::invalid_argument("bigram query '" + query + "' must hold exactly two characters");
  const auto& bigrams = model.vocab().bigrams;
  const auto idx = bigrams.find(bigram_symbol(tokens[0], tokens[1]));
  if (!idx) throw std::invalid_argument("unknown bigram '" + query + "'");
  std::vector<BigramNeighbor> out;
  for (const auto& nb : nearest_rows(model.parameter("embedding.bigram").value, static_cast<std::size_t>(*idx), k,
                                     kReservedSymbols.size())) {
    std::string symbol = bigrams.symbol(static_cast<std::int64_t>(nb.index));
    symbol.erase(std::remove(symbol.begin(), symbol.end(), ' '), symbol.end());
    out.push_back({symbol, nb.similarity});
  }
  return out;
}

}  // namespace mccws
