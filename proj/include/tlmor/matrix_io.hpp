#pragma once

#include "tlmor/system.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tlmor::io {

/// Decimal rendering with 17 significant digits (round-trips doubles exactly).
std::string format_double(double x);

/// Writes `MATRIX <name> <rows> <cols>` followed by one line per row.
void write_matrix(std::ostream& os, const std::string& name, const Matrix& M);

/// A text file made of a header line and a sequence of named MATRIX blocks.
struct MatrixBundle {
  std::vector<std::string> header;  // whitespace-separated tokens of line 1
  std::vector<std::pair<std::string, Matrix>> matrices;

  const Matrix& get(const std::string& name) const;
  bool has(const std::string& name) const;
};

MatrixBundle read_bundle(std::istream& is);
void write_bundle(std::ostream& os, const MatrixBundle& bundle);

/// `STOCHLIN n m p q` then A, B, C, N1..Nq, K.
void write_system(std::ostream& os, const StochasticLinearSystem& sys);
StochasticLinearSystem read_system(std::istream& is);

void write_system_file(const std::string& path, const StochasticLinearSystem& sys);
StochasticLinearSystem read_system_file(const std::string& path);

/// Comma-separated output with a header row, LF line endings and doubles
/// rendered by format_double.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& columns);
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(Index x) { return cell(static_cast<long long>(x)); }
  void end_row();

 private:
  std::ostream& os_;
  size_t columns_;
  size_t filled_ = 0;
};

}  // namespace tlmor::io
