#include "siv/dataset.hpp"

#include "siv/error.hpp"

#include <algorithm>
#include <cmath>

namespace siv {

void Dataset::add_column(const std::string& name, std::vector<double> values) {
  if (has_column(name)) {
    throw Error(ErrorKind::InvalidInput, "duplicate column name '" + name + "'");
  }
  if (!names_.empty() && values.size() != n_rows_) {
    throw Error(ErrorKind::InvalidInput, "column '" + name + "' has " +
                                             std::to_string(values.size()) + " rows, expected " +
                                             std::to_string(n_rows_));
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::InvalidInput, "column '" + name + "' holds a non-finite value");
    }
  }
  if (names_.empty()) n_rows_ = values.size();
  names_.push_back(name);
  data_.push_back(std::move(values));
}

void Dataset::add_column(const std::string& name, const Vec& values) {
  add_column(name, std::vector<double>(values.data(), values.data() + values.size()));
}

bool Dataset::has_column(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t Dataset::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw Error(ErrorKind::InvalidInput, "unknown column '" + name + "'");
  }
  return static_cast<std::size_t>(it - names_.begin());
}

const std::vector<double>& Dataset::column(const std::string& name) const {
  return data_[index_of(name)];
}

Vec Dataset::column_vec(const std::string& name) const {
  const auto& c = column(name);
  return Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size()));
}

Mat Dataset::columns_mat(const std::vector<std::string>& names) const {
  Mat out(static_cast<Eigen::Index>(n_rows_), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = column_vec(names[j]);
  return out;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
  Dataset out;
  for (std::size_t j = 0; j < names_.size(); ++j) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (std::size_t r : rows) v.push_back(data_[j].at(r));
    out.names_.push_back(names_[j]);
    out.data_.push_back(std::move(v));
  }
  out.n_rows_ = rows.size();
  return out;
}

}  // namespace siv
