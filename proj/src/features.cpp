#include "past/features.hpp"

#include <string>

namespace past {

std::uint64_t binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace {

// Appends every non-decreasing index tuple of length `degree` over [0, d),
// in lexicographic order.
void enumerate_degree(unsigned d, int degree, std::vector<std::uint8_t>& prefix,
                      std::vector<std::vector<std::uint8_t>>& out) {
  if (static_cast<int>(prefix.size()) == degree) {
    out.push_back(prefix);
    return;
  }
  const unsigned start = prefix.empty() ? 0u : prefix.back();
  for (unsigned j = start; j < d; ++j) {
    prefix.push_back(static_cast<std::uint8_t>(j));
    enumerate_degree(d, degree, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

FeatureMap FeatureMap::identity(Index input_dim, Index passthrough) {
  if (input_dim < 0 || passthrough < 0) throw InvalidArgument("FeatureMap: negative dimension");
  FeatureMap m;
  m.kind_ = FeatureKind::Identity;
  m.degree_ = 1;
  m.input_dim_ = input_dim;
  m.passthrough_ = passthrough;
  return m;
}

FeatureMap FeatureMap::polynomial(Index input_dim, int degree, Index passthrough) {
  if (input_dim < 0 || passthrough < 0) throw InvalidArgument("FeatureMap: negative dimension");
  if (degree < 0) throw InvalidArgument("FeatureMap: negative degree");
  if (input_dim > 255) throw InvalidArgument("FeatureMap: polynomial expansion supports at most 255 inputs");
  FeatureMap m;
  m.kind_ = FeatureKind::PolynomialInteractions;
  m.degree_ = degree;
  m.input_dim_ = input_dim;
  m.passthrough_ = passthrough;
  std::vector<std::uint8_t> prefix;
  for (int g = 0; g <= degree; ++g) enumerate_degree(static_cast<unsigned>(input_dim), g, prefix, m.monomials_);
  return m;
}

Index FeatureMap::output_dim() const noexcept {
  const Index expanded = kind_ == FeatureKind::Identity ? input_dim_ : static_cast<Index>(monomials_.size());
  return expanded + passthrough_;
}

FeatureMap FeatureMap::with_passthrough(Index passthrough) const {
  return kind_ == FeatureKind::Identity ? identity(input_dim_, passthrough)
                                        : polynomial(input_dim_, degree_, passthrough);
}

Vector FeatureMap::expand(const Vector& x) const {
  if (x.size() != input_dim_ + passthrough_)
    throw InvalidArgument("FeatureMap: expected input of length " + std::to_string(input_dim_ + passthrough_) +
                          ", got " + std::to_string(x.size()));
  Vector out(output_dim());
  Index k = 0;
  if (kind_ == FeatureKind::Identity) {
    for (Index j = 0; j < input_dim_; ++j) out(k++) = x(j);
  } else {
    for (const auto& mono : monomials_) {
      double v = 1.0;
      for (std::uint8_t j : mono) v *= x(j);
      out(k++) = v;
    }
  }
  for (Index j = 0; j < passthrough_; ++j) out(k++) = x(input_dim_ + j);
  return out;
}

Matrix FeatureMap::expand_rows(const Matrix& x) const {
  Matrix out(x.rows(), output_dim());
  for (Index i = 0; i < x.rows(); ++i) out.row(i) = expand(x.row(i).transpose()).transpose();
  return out;
}

}  // namespace past
