// Named numeric columns of equal length.
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace siv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Dataset {
 public:
  Dataset() = default;

  // Appends a column. Throws InvalidInput on a duplicate name, a length
  // mismatch, or a non-finite value.
  void add_column(const std::string& name, std::vector<double> values);
  void add_column(const std::string& name, const Vec& values);

  bool has_column(const std::string& name) const;
  const std::vector<double>& column(const std::string& name) const;
  Vec column_vec(const std::string& name) const;
  // Columns side by side in the given order; an empty list gives n x 0.
  Mat columns_mat(const std::vector<std::string>& names) const;

  const std::vector<std::string>& names() const { return names_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return names_.size(); }

  // New dataset holding the given rows (repeats allowed) of every column.
  Dataset select_rows(const std::vector<std::size_t>& rows) const;

 private:
  std::size_t index_of(const std::string& name) const;

  std::vector<std::string> names_;
  std::vector<std::vector<double>> data_;
  std::size_t n_rows_ = 0;
};

}  // namespace siv
