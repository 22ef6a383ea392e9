#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bubbles/io.hpp"
#include "bubbles/kernel.hpp"

namespace bubbles {

/// User kernel from a table of densities: each distinct state x_i carries a
/// piecewise-linear density in y through the listed (y, k) nodes. Between
/// tabulated states the law is the linear mixture of the two neighbouring rows
/// (mass and mean stay exact); outside the tabulated range the edge row is
/// rescaled, K(x, dy) = K(x_e, d(y x_e / x)).
class TabulatedKernel final : public MarkovKernel {
 public:
  struct Row {
    double x = 0.0;
    std::vector<double> y;
    std::vector<double> k;
  };

  /// Rows must each integrate to mass 1 and mean x within `tolerance` (relative for the mean).
  TabulatedKernel(std::vector<Row> rows, double tolerance = 1e-6);

  static TabulatedKernel from_table(const CsvTable& table, double tolerance = 1e-6);
  static TabulatedKernel from_csv(const std::filesystem::path& path, double tolerance = 1e-6);

  KernelKind kind() const override { return KernelKind::UserDefined; }
  std::string name() const override { return "user-defined"; }
  std::vector<Atom> atoms(double) const override { return {}; }
  double density(double x, double y) const override;
  Support support(double x) const override;
  std::vector<double> breakpoints(double x) const override;
  double density_moment(double x, double lo, double hi, int power) const override;

  const std::vector<Row>& rows() const { return rows_; }

 private:
  struct Component {
    const Row* row;
    double weight;
    double scale;  // y = scale * y_row
  };
  std::vector<Component> components(double x) const;

  std::vector<Row> rows_;
};

}  // namespace bubbles
