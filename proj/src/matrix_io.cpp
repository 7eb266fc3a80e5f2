#include "tlmor/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tlmor::io {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

void write_matrix(std::ostream& os, const std::string& name, const Matrix& M) {
  os << "MATRIX " << name << ' ' << M.rows() << ' ' << M.cols() << '\n';
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(M(i, j));
    }
    os << '\n';
  }
}

const Matrix& MatrixBundle::get(const std::string& name) const {
  for (const auto& [key, M] : matrices)
    if (key == name) return M;
  throw Error("matrix file: missing MATRIX block '" + name + "'");
}

bool MatrixBundle::has(const std::string& name) const {
  for (const auto& entry : matrices)
    if (entry.first == name) return true;
  return false;
}

MatrixBundle read_bundle(std::istream& is) {
  MatrixBundle b;
  std::string line;
  if (!std::getline(is, line)) throw Error("matrix file: empty input");
  {
    std::istringstream hs(line);
    std::string tok;
    while (hs >> tok) b.header.push_back(tok);
  }
  std::string keyword;
  while (is >> keyword) {
    if (keyword != "MATRIX") throw Error("matrix file: expected MATRIX, found '" + keyword + "'");
    std::string name;
    long long rows = -1, cols = -1;
    if (!(is >> name >> rows >> cols) || rows < 0 || cols < 0)
      throw Error("matrix file: malformed MATRIX line");
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) {
        std::string tok;
        if (!(is >> tok)) throw Error("matrix file: truncated data in block '" + name + "'");
        try {
          size_t used = 0;
          M(i, j) = std::stod(tok, &used);
          if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
          throw Error("matrix file: bad number '" + tok + "' in block '" + name + "'");
        }
      }
    b.matrices.emplace_back(name, std::move(M));
  }
  return b;
}

void write_bundle(std::ostream& os, const MatrixBundle& bundle) {
  for (size_t i = 0; i < bundle.header.size(); ++i) os << (i ? " " : "") << bundle.header[i];
  os << '\n';
  for (const auto& [name, M] : bundle.matrices) write_matrix(os, name, M);
}

void write_system(std::ostream& os, const StochasticLinearSystem& sys) {
  os << "STOCHLIN " << sys.n() << ' ' << sys.m() << ' ' << sys.p() << ' ' << sys.q() << '\n';
  write_matrix(os, "A", sys.A);
  write_matrix(os, "B", sys.B);
  write_matrix(os, "C", sys.C);
  for (Index i = 0; i < sys.q(); ++i) write_matrix(os, "N" + std::to_string(i + 1), sys.N[static_cast<size_t>(i)]);
  write_matrix(os, "K", sys.K);
}

StochasticLinearSystem read_system(std::istream& is) {
  MatrixBundle b = read_bundle(is);
  if (b.header.size() != 5 || b.header[0] != "STOCHLIN")
    throw Error("system file: header must be 'STOCHLIN n m p q'");
  long long dims[4];
  for (int i = 0; i < 4; ++i) {
    try {
      dims[i] = std::stoll(b.header[static_cast<size_t>(i + 1)]);
    } catch (const std::exception&) {
      throw Error("system file: bad dimension in header");
    }
  }
  StochasticLinearSystem sys;
  sys.A = b.get("A");
  sys.B = b.get("B");
  sys.C = b.get("C");
  for (long long i = 0; i < dims[3]; ++i) sys.N.push_back(b.get("N" + std::to_string(i + 1)));
  sys.K = b.get("K");
  if (sys.n() != dims[0] || sys.m() != dims[1] || sys.p() != dims[2])
    throw DimensionError("system file: header dimensions disagree with matrices");
  sys.validate();
  return sys;
}

void write_system_file(const std::string& path, const StochasticLinearSystem& sys) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_system(os, sys);
}

StochasticLinearSystem read_system_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_system(is);
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& columns)
    : os_(os), columns_(columns.size()) {
  for (size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
  os_ << '\n';
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (filled_ == columns_) throw Error("csv: too many cells in row");
  os_ << (filled_++ ? "," : "") << s;
  return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_double(x)); }

CsvWriter& CsvWriter::cell(long long x) { return cell(std::to_string(x)); }

void CsvWriter::end_row() {
  if (filled_ != columns_) throw Error("csv: incomplete row");
  os_ << '\n';
  filled_ = 0;
}

}  // namespace tlmor::io
