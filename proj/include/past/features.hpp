#pragma once

#include "past/common.hpp"

#include <cstdint>
#include <vector>

namespace past {

enum class FeatureKind { Identity, PolynomialInteractions };

/// Maps a covariate vector to regression features.
///
/// PolynomialInteractions(k) on d inputs produces every monomial of total
/// degree <= k in graded lexicographic order, starting with the constant 1,
/// so output_dim = C(d + k, k). Within a degree, monomials are listed as
/// non-decreasing index tuples in lexicographic order: for d = 2, k = 2 the
/// order is 1, x0, x1, x0^2, x0 x1, x1^2.
///
/// `passthrough` extra inputs following the first input_dim entries are
/// appended unchanged after the expanded block. The auxiliary fit of the
/// partially linear ensembles uses this to regress on (Psi(x), w).
class FeatureMap {
 public:
  FeatureMap() = default;
  static FeatureMap identity(Index input_dim, Index passthrough = 0);
  static FeatureMap polynomial(Index input_dim, int degree, Index passthrough = 0);

  FeatureKind kind() const noexcept { return kind_; }
  int degree() const noexcept { return degree_; }
  Index input_dim() const noexcept { return input_dim_; }
  Index passthrough() const noexcept { return passthrough_; }
  Index output_dim() const noexcept;
  /// Index of the constant feature, or -1 when the map has none.
  Index intercept_index() const noexcept { return kind_ == FeatureKind::PolynomialInteractions ? 0 : -1; }

  /// Same expansion with a different passthrough width.
  FeatureMap with_passthrough(Index passthrough) const;

  /// Expects input_dim + passthrough entries.
  Vector expand(const Vector& x) const;
  /// Row-wise expansion.
  Matrix expand_rows(const Matrix& x) const;

  /// Monomials as lists of input indices (empty list = constant).
  const std::vector<std::vector<std::uint8_t>>& monomials() const noexcept { return monomials_; }

 private:
  FeatureKind kind_ = FeatureKind::Identity;
  int degree_ = 1;
  Index input_dim_ = 0;
  Index passthrough_ = 0;
  std::vector<std::vector<std::uint8_t>> monomials_;
};

/// Binomial coefficient C(n, k).
std::uint64_t binomial(unsigned n, unsigned k);

}  // namespace past
