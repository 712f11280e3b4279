#include "past/datamodel.hpp"

#include "past/csv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace past {

HybridDataset::HybridDataset(std::vector<LabeledTriple> labeled, std::vector<UnlabeledPair> unlabeled)
    : labeled_(std::move(labeled)), unlabeled_(std::move(unlabeled)) {
  if (labeled_.empty()) throw InvalidArgument("HybridDataset: at least one labeled row is required");
  const Index dx = labeled_.front().x.size();
  const Index dw = labeled_.front().w.size();
  for (const auto& t : labeled_) {
    if (t.x.size() != dx || t.w.size() != dw)
      throw InvalidArgument("HybridDataset: covariate dimensions differ across labeled rows");
    if (!std::isfinite(t.y)) throw InvalidArgument("HybridDataset: response is not finite");
  }
  for (const auto& p : unlabeled_) {
    if (p.x.size() != dx || p.w.size() != dw)
      throw InvalidArgument("HybridDataset: unlabeled covariate dimensions differ from labeled rows");
  }
}

Matrix HybridDataset::x_matrix() const {
  Matrix m(static_cast<Index>(n()), dim_x());
  Index r = 0;
  for (const auto& t : labeled_) m.row(r++) = t.x.transpose();
  for (const auto& p : unlabeled_) m.row(r++) = p.x.transpose();
  return m;
}

Matrix HybridDataset::xw_matrix() const {
  Matrix m(static_cast<Index>(n()), dim_x() + dim_w());
  Index r = 0;
  for (const auto& t : labeled_) m.row(r++) = concat(t.x, t.w).transpose();
  for (const auto& p : unlabeled_) m.row(r++) = concat(p.x, p.w).transpose();
  return m;
}

std::size_t labeled_count(std::size_t n, double labeled_fraction) {
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0))
    throw InvalidArgument("labeled_fraction must lie in (0, 1]");
  return static_cast<std::size_t>(std::floor(labeled_fraction * static_cast<double>(n) + 0.5));
}

HybridDataset split_dataset(std::span<const LabeledTriple> full, double labeled_fraction, Rng& rng) {
  if (full.empty()) throw InvalidArgument("split_dataset: empty input");
  return split_dataset_count(full, labeled_count(full.size(), labeled_fraction), rng);
}

HybridDataset split_dataset_count(std::span<const LabeledTriple> full, std::size_t n_labeled, Rng& rng) {
  if (full.empty()) throw InvalidArgument("split_dataset: empty input");
  if (n_labeled == 0 || n_labeled > full.size())
    throw InvalidArgument("split_dataset: labeled count must lie in [1, n]");

  // Partial Fisher-Yates: the first n_labeled slots are a uniform sample
  // without replacement.
  std::vector<std::size_t> idx(full.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n_labeled; ++i) {
    const std::size_t span = full.size() - i;
    const std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(span));
    std::swap(idx[i], idx[std::min(j, full.size() - 1)]);
  }
  std::vector<bool> keep(full.size(), false);
  for (std::size_t i = 0; i < n_labeled; ++i) keep[idx[i]] = true;

  std::vector<LabeledTriple> labeled;
  std::vector<UnlabeledPair> unlabeled;
  labeled.reserve(n_labeled);
  unlabeled.reserve(full.size() - n_labeled);
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (keep[i])
      labeled.push_back(full[i]);
    else
      unlabeled.push_back({full[i].x, full[i].w});
  }
  return HybridDataset(std::move(labeled), std::move(unlabeled));
}

Matrix x_matrix(std::span<const LabeledTriple> rows) {
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), rows.front().x.size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Index>(i)) = rows[i].x.transpose();
  return m;
}

Vector y_vector(std::span<const LabeledTriple> rows) {
  Vector y(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Index>(i)) = rows[i].y;
  return y;
}

Vector concat(const Vector& x, const Vector& w) {
  Vector out(x.size() + w.size());
  out << x, w;
  return out;
}

void write_dataset_csv(std::ostream& out, const HybridDataset& data) {
  const Index dx = data.dim_x();
  const Index dw = data.dim_w();
  std::vector<std::string> header;
  for (Index j = 0; j < dx; ++j) header.push_back("x_" + std::to_string(j));
  for (Index j = 0; j < dw; ++j) header.push_back("w_" + std::to_string(j));
  header.emplace_back("y");
  csv::write_row(out, header);

  auto emit = [&](const Vector& x, const Vector& w, const double* y) {
    std::vector<std::string> cells;
    cells.reserve(static_cast<std::size_t>(dx + dw + 1));
    for (Index j = 0; j < dx; ++j) cells.push_back(csv::format_double(x(j)));
    for (Index j = 0; j < dw; ++j) cells.push_back(csv::format_double(w(j)));
    cells.push_back(y ? csv::format_double(*y) : std::string());
    csv::write_row(out, cells);
  };
  for (const auto& t : data.labeled()) emit(t.x, t.w, &t.y);
  for (const auto& p : data.unlabeled()) emit(p.x, p.w, nullptr);
}

HybridDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("dataset csv: missing header row");
  const auto header = csv::split_row(line);
  Index dx = 0;
  Index dw = 0;
  bool seen_y = false;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string& h = header[j];
    const std::string expect_x = "x_" + std::to_string(dx);
    const std::string expect_w = "w_" + std::to_string(dw);
    if (!seen_y && dw == 0 && h == expect_x) {
      ++dx;
    } else if (!seen_y && h == expect_w) {
      ++dw;
    } else if (!seen_y && h == "y" && j + 1 == header.size()) {
      seen_y = true;
    } else {
      throw InvalidArgument("dataset csv: unexpected header cell '" + h + "'");
    }
  }
  if (!seen_y) throw InvalidArgument("dataset csv: header must end with 'y'");

  std::vector<LabeledTriple> labeled;
  std::vector<UnlabeledPair> unlabeled;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = csv::split_row(line);
    if (cells.size() != static_cast<std::size_t>(dx + dw + 1))
      throw InvalidArgument("dataset csv: wrong cell count on line " + std::to_string(line_no));
    Vector x(dx), w(dw);
    for (Index j = 0; j < dx; ++j) x(j) = csv::parse_double(cells[static_cast<std::size_t>(j)]);
    for (Index j = 0; j < dw; ++j) w(j) = csv::parse_double(cells[static_cast<std::size_t>(dx + j)]);
    const std::string& ycell = cells.back();
    if (ycell.empty())
      unlabeled.push_back({std::move(x), std::move(w)});
    else
      labeled.push_back({std::move(x), std::move(w), csv::parse_double(ycell)});
  }
  return HybridDataset(std::move(labeled), std::move(unlabeled));
}

}  // namespace past
