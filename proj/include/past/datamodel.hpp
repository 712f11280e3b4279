#pragma once

#include "past/common.hpp"
#include "past/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace past {

/// One labeled observation: standard covariate x, helper covariate w, response y.
struct LabeledTriple {
  Vector x;
  Vector w;
  double y = 0.0;
};

/// An observation whose response is missing.
struct UnlabeledPair {
  Vector x;
  Vector w;
};

/// Labeled triples plus unlabeled pairs with uniform covariate dimensions.
/// Immutable after construction.
class HybridDataset {
 public:
  /// Throws InvalidArgument when `labeled` is empty, a response is not
  /// finite, or covariate dimensions disagree anywhere.
  HybridDataset(std::vector<LabeledTriple> labeled, std::vector<UnlabeledPair> unlabeled);

  const std::vector<LabeledTriple>& labeled() const noexcept { return labeled_; }
  const std::vector<UnlabeledPair>& unlabeled() const noexcept { return unlabeled_; }

  std::size_t n() const noexcept { return labeled_.size() + unlabeled_.size(); }
  std::size_t n_labeled() const noexcept { return labeled_.size(); }
  std::size_t n_unlabeled() const noexcept { return unlabeled_.size(); }
  Index dim_x() const noexcept { return labeled_.front().x.size(); }
  Index dim_w() const noexcept { return labeled_.front().w.size(); }

  /// Rows of x over labeled then unlabeled observations.
  Matrix x_matrix() const;
  /// Rows of (x, w) concatenated, labeled first.
  Matrix xw_matrix() const;

 private:
  std::vector<LabeledTriple> labeled_;
  std::vector<UnlabeledPair> unlabeled_;
};

enum class Provenance : std::uint8_t { TrueLabel, PseudoLabel };

/// Training set for the final fit: covariates and (pseudo-)responses over all n rows.
struct PseudoLabeledDataset {
  Matrix x;
  Vector y;
  std::vector<Provenance> provenance;

  std::size_t size() const noexcept { return static_cast<std::size_t>(y.size()); }
};

/// Number of rows that keep their labels: round-half-up of fraction * n.
std::size_t labeled_count(std::size_t n, double labeled_fraction);

/// Keeps labels on a uniformly random subset of round(fraction * n) rows.
/// Labeled and unlabeled parts preserve the input order of their rows.
HybridDataset split_dataset(std::span<const LabeledTriple> full, double labeled_fraction, Rng& rng);

/// Same as split_dataset with an explicit labeled count.
HybridDataset split_dataset_count(std::span<const LabeledTriple> full, std::size_t n_labeled, Rng& rng);

/// Rows of (x, y) for a list of triples.
Matrix x_matrix(std::span<const LabeledTriple> rows);
Vector y_vector(std::span<const LabeledTriple> rows);

/// Concatenation (x, w).
Vector concat(const Vector& x, const Vector& w);

// CSV format: header `x_0..x_{dx-1},w_0..w_{dw-1},y`; an empty y cell marks an
// unlabeled row.
void write_dataset_csv(std::ostream& out, const HybridDataset& data);
HybridDataset read_dataset_csv(std::istream& in);

}  // namespace past
