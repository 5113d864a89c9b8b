#pragma once

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hscalc/matrix.hpp"

namespace hscalc {

/// Matrix text format: first line "d", then d rows of d entries "re,im"
/// whitespace-separated. 17 significant digits round-trips doubles exactly.
inline void write_matrix(std::ostream& os, const ComplexMatrix& m) {
  os << m.dim() << "\n";
  os << std::setprecision(17);
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = 0; j < m.dim(); ++j) {
      if (j) os << " ";
      os << m(i, j).real() << "," << m(i, j).imag();
    }
    os << "\n";
  }
}

inline ComplexMatrix read_matrix(std::istream& is) {
  int d = 0;
  if (!(is >> d) || d < 1) fail(errc::io_failure, "matrix header: expected positive dimension");
  ComplexMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      std::string tok;
      if (!(is >> tok)) fail(errc::io_failure, "matrix body: unexpected end of input");
      auto comma = tok.find(',');
      if (comma == std::string::npos) fail(errc::io_failure, "matrix entry: expected re,im");
      try {
        m(i, j) = cplx(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
      } catch (const std::exception&) {
        fail(errc::io_failure, "matrix entry: cannot parse '" + tok + "'");
      }
    }
  return m;
}

inline void write_matrix_file(const std::string& path, const ComplexMatrix& m) {
  std::ofstream os(path);
  if (!os) fail(errc::io_failure, "cannot open for writing: " + path);
  write_matrix(os, m);
}

inline ComplexMatrix read_matrix_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(errc::io_failure, "cannot open for reading: " + path);
  return read_matrix(is);
}

}  // namespace hscalc
