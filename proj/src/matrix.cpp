#include "cmm/matrix.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <locale>
#include <numeric>
#include <random>
#include <sstream>

namespace cmm {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw parse_error(std::string(what) + ": non-finite value");
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw dim_error("dense matrix: data length != rows*cols");
  require_finite(data_, "dense matrix");
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

std::size_t DenseMatrix::nnz() const {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), [](double v) { return v != 0.0; }));
}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, Layout layout,
                           std::vector<std::size_t> offsets, std::vector<std::size_t> indices,
                           std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      layout_(layout),
      offsets_(std::move(offsets)),
      indices_(std::move(indices)),
      values_(std::move(values)) {
  const std::size_t nlines = lines();
  const std::size_t span = layout_ == Layout::ColumnMajor ? rows_ : cols_;
  if (offsets_.size() != nlines + 1 || offsets_.front() != 0 || offsets_.back() != values_.size() ||
      indices_.size() != values_.size())
    throw dim_error("sparse matrix: inconsistent compressed storage");
  for (std::size_t k = 0; k < nlines; ++k) {
    if (offsets_[k] > offsets_[k + 1]) throw dim_error("sparse matrix: offsets not monotone");
    for (std::size_t p = offsets_[k]; p < offsets_[k + 1]; ++p) {
      if (indices_[p] >= span) throw dim_error("sparse matrix: index out of range");
      if (p > offsets_[k] && indices_[p] <= indices_[p - 1])
        throw dim_error("sparse matrix: indices not strictly increasing");
      if (values_[p] == 0.0) throw dim_error("sparse matrix: stored zero");
    }
  }
  require_finite(values_, "sparse matrix");
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, Layout layout,
                                         std::span<const std::size_t> rows_idx,
                                         std::span<const std::size_t> cols_idx,
                                         std::span<const double> values) {
  if (rows_idx.size() != cols_idx.size() || rows_idx.size() != values.size())
    throw dim_error("triplets: length mismatch");
  struct Entry {
    std::size_t line, idx;
    double value;
  };
  std::vector<Entry> entries;
  entries.reserve(values.size());
  for (std::size_t p = 0; p < values.size(); ++p) {
    if (rows_idx[p] >= rows || cols_idx[p] >= cols) throw dim_error("triplets: index out of range");
    const bool col_major = layout == Layout::ColumnMajor;
    entries.push_back({col_major ? cols_idx[p] : rows_idx[p],
                       col_major ? rows_idx[p] : cols_idx[p], values[p]});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.line != b.line ? a.line < b.line : a.idx < b.idx;
  });

  const std::size_t nlines = layout == Layout::ColumnMajor ? cols : rows;
  std::vector<std::size_t> offsets(nlines + 1, 0);
  std::vector<std::size_t> indices;
  std::vector<double> vals;
  indices.reserve(entries.size());
  vals.reserve(entries.size());
  for (std::size_t p = 0; p < entries.size();) {
    std::size_t q = p;
    double sum = 0.0;
    while (q < entries.size() && entries[q].line == entries[p].line &&
           entries[q].idx == entries[p].idx)
      sum += entries[q++].value;
    if (sum != 0.0) {
      indices.push_back(entries[p].idx);
      vals.push_back(sum);
      ++offsets[entries[p].line + 1];
    }
    p = q;
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return SparseMatrix(rows, cols, layout, std::move(offsets), std::move(indices),
                      std::move(vals));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& m, Layout layout) {
  std::vector<std::size_t> ri, ci;
  std::vector<double> v;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) {
        ri.push_back(i);
        ci.push_back(j);
        v.push_back(m(i, j));
      }
  return from_triplets(m.rows(), m.cols(), layout, ri, ci, v);
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix out(rows_, cols_);
  const bool col_major = layout_ == Layout::ColumnMajor;
  for (std::size_t k = 0; k < lines(); ++k) {
    auto idx = line_indices(k);
    auto val = line_values(k);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      if (col_major)
        out(idx[p], k) = val[p];
      else
        out(k, idx[p]) = val[p];
    }
  }
  return out;
}

SparseMatrix to_layout(const SparseMatrix& m, Layout layout) {
  if (layout == m.layout()) return m;
  std::vector<std::size_t> ri, ci;
  std::vector<double> v;
  ri.reserve(m.nnz());
  ci.reserve(m.nnz());
  v.reserve(m.nnz());
  const bool col_major = m.layout() == Layout::ColumnMajor;
  for (std::size_t k = 0; k < m.lines(); ++k) {
    auto idx = m.line_indices(k);
    auto val = m.line_values(k);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      ri.push_back(col_major ? idx[p] : k);
      ci.push_back(col_major ? k : idx[p]);
      v.push_back(val[p]);
    }
  }
  return SparseMatrix::from_triplets(m.rows(), m.cols(), layout, ri, ci, v);
}

namespace {

struct MmHeader {
  bool coordinate = true;
  bool symmetric = false;
};

[[noreturn]] void fail_at(const std::string& path, std::size_t line_no, const std::string& msg) {
  throw parse_error(path + ":" + std::to_string(line_no) + ": " + msg);
}

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

SparseMatrix load_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail_at(path, 1, "empty file");
  ++line_no;

  std::istringstream banner(line);
  banner.imbue(std::locale::classic());
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") fail_at(path, line_no, "missing %%MatrixMarket banner");
  object = lowercase(object);
  format = lowercase(format);
  field = lowercase(field);
  symmetry = lowercase(symmetry);
  if (object != "matrix") fail_at(path, line_no, "unsupported object '" + object + "'");
  MmHeader hdr;
  if (format == "coordinate")
    hdr.coordinate = true;
  else if (format == "array")
    hdr.coordinate = false;
  else
    fail_at(path, line_no, "unsupported format '" + format + "'");
  if (field != "real" && field != "integer")
    fail_at(path, line_no, "non-real field '" + field + "'");
  if (symmetry == "general")
    hdr.symmetric = false;
  else if (symmetry == "symmetric")
    hdr.symmetric = true;
  else
    fail_at(path, line_no, "unsupported symmetry '" + symmetry + "'");

  // Skip comments and blank lines up to the size line.
  std::string size_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    size_line = line;
    break;
  }
  if (size_line.empty()) fail_at(path, line_no, "missing size line");

  std::istringstream size_in(size_line);
  size_in.imbue(std::locale::classic());
  long long rows = -1, cols = -1, nnz = -1;
  if (hdr.coordinate) {
    if (!(size_in >> rows >> cols >> nnz)) fail_at(path, line_no, "bad coordinate size line");
  } else {
    if (!(size_in >> rows >> cols)) fail_at(path, line_no, "bad array size line");
  }
  if (rows <= 0 || cols <= 0 || (hdr.coordinate && nnz < 0))
    fail_at(path, line_no, "non-positive dimensions");
  constexpr long long kDimCap = 1LL << 31;
  if (rows > kDimCap || cols > kDimCap ||
      static_cast<unsigned long long>(rows) * static_cast<unsigned long long>(cols) >
          (1ULL << 62))
    fail_at(path, line_no, "dimension overflow");

  std::vector<std::size_t> ri, ci;
  std::vector<double> vals;

  if (hdr.coordinate) {
    ri.reserve(static_cast<std::size_t>(nnz));
    ci.reserve(static_cast<std::size_t>(nnz));
    vals.reserve(static_cast<std::size_t>(nnz));
    long long seen = 0;
    while (seen < nnz) {
      if (!std::getline(in, line)) fail_at(path, line_no + 1, "unexpected end of file");
      ++line_no;
      if (!line.empty() && line[0] == '%') continue;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream entry(line);
      entry.imbue(std::locale::classic());
      long long i = 0, j = 0;
      double v = 0.0;
      if (!(entry >> i >> j >> v)) fail_at(path, line_no, "bad coordinate entry");
      if (i < 1 || i > rows || j < 1 || j > cols) fail_at(path, line_no, "index out of range");
      if (!std::isfinite(v)) fail_at(path, line_no, "non-finite value");
      ++seen;
      if (v == 0.0) continue;
      const auto r0 = static_cast<std::size_t>(i - 1);
      const auto c0 = static_cast<std::size_t>(j - 1);
      ri.push_back(r0);
      ci.push_back(c0);
      vals.push_back(v);
      if (hdr.symmetric && r0 != c0) {
        ri.push_back(c0);
        ci.push_back(r0);
        vals.push_back(v);
      }
    }
  } else {
    // Array format lists values in column-major order; symmetric files list
    // the lower triangle only.
    const auto r = static_cast<std::size_t>(rows);
    const auto c = static_cast<std::size_t>(cols);
    if (hdr.symmetric && r != c) fail_at(path, line_no, "symmetric array must be square");
    std::size_t col = 0, row = hdr.symmetric ? 0 : 0;
    std::size_t expected = hdr.symmetric ? r * (r + 1) / 2 : r * c;
    std::size_t seen = 0;
    row = 0;
    while (seen < expected) {
      if (!std::getline(in, line)) fail_at(path, line_no + 1, "unexpected end of file");
      ++line_no;
      if (!line.empty() && line[0] == '%') continue;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream entry(line);
      entry.imbue(std::locale::classic());
      double v;
      while (entry >> v) {
        if (!std::isfinite(v)) fail_at(path, line_no, "non-finite value");
        if (v != 0.0) {
          ri.push_back(row);
          ci.push_back(col);
          vals.push_back(v);
          if (hdr.symmetric && row != col) {
            ri.push_back(col);
            ci.push_back(row);
            vals.push_back(v);
          }
        }
        ++seen;
        ++row;
        if (hdr.symmetric) {
          if (row == r) {
            ++col;
            row = col;
          }
        } else if (row == r) {
          row = 0;
          ++col;
        }
        if (seen == expected) break;
      }
    }
  }

  return SparseMatrix::from_triplets(static_cast<std::size_t>(rows),
                                     static_cast<std::size_t>(cols), Layout::ColumnMajor, ri, ci,
                                     vals);
}

void save_matrix_market(const std::string& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out.imbue(std::locale::classic());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nnz() << "\n";
  out.precision(17);
  const bool col_major = m.layout() == Layout::ColumnMajor;
  for (std::size_t k = 0; k < m.lines(); ++k) {
    auto idx = m.line_indices(k);
    auto val = m.line_values(k);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      const std::size_t i = col_major ? idx[p] : k;
      const std::size_t j = col_major ? k : idx[p];
      out << (i + 1) << " " << (j + 1) << " " << val[p] << "\n";
    }
  }
  if (!out) throw io_error("write failed: " + path);
}

void save_matrix_market(const std::string& path, const DenseMatrix& m) {
  save_matrix_market(path, SparseMatrix::from_dense(m));
}

DiagonalScaling random_diagonal(std::size_t len, std::uint64_t seed) {
  if (len < 1) throw dim_error("random_diagonal: len must be >= 1");
  std::mt19937_64 rng(seed);
  DiagonalScaling d;
  d.entries.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    std::uint64_t v;
    do {
      v = rng() >> 33;  // 31 uniform bits
    } while (v == 0);
    d.entries.push_back(static_cast<double>(v));
  }
  return d;
}

DenseMatrix apply_diagonal_left(const DiagonalScaling& d, const DenseMatrix& m) {
  if (d.length() != m.rows()) throw dim_error("diagonal length != rows");
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = d.entries[i] * m(i, j);
  return out;
}

DenseMatrix apply_diagonal_right(const DenseMatrix& m, const DiagonalScaling& d) {
  if (d.length() != m.cols()) throw dim_error("diagonal length != cols");
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j) * d.entries[j];
  return out;
}

SparseMatrix apply_diagonal_left(const DiagonalScaling& d, const SparseMatrix& m) {
  if (d.length() != m.rows()) throw dim_error("diagonal length != rows");
  std::vector<std::size_t> offsets(m.offsets().begin(), m.offsets().end());
  std::vector<std::size_t> indices(m.indices().begin(), m.indices().end());
  std::vector<double> values(m.values().begin(), m.values().end());
  const bool col_major = m.layout() == Layout::ColumnMajor;
  for (std::size_t k = 0; k < m.lines(); ++k)
    for (std::size_t p = offsets[k]; p < offsets[k + 1]; ++p)
      values[p] *= d.entries[col_major ? indices[p] : k];
  return SparseMatrix(m.rows(), m.cols(), m.layout(), std::move(offsets), std::move(indices),
                      std::move(values));
}

SparseMatrix apply_diagonal_right(const SparseMatrix& m, const DiagonalScaling& d) {
  if (d.length() != m.cols()) throw dim_error("diagonal length != cols");
  std::vector<std::size_t> offsets(m.offsets().begin(), m.offsets().end());
  std::vector<std::size_t> indices(m.indices().begin(), m.indices().end());
  std::vector<double> values(m.values().begin(), m.values().end());
  const bool col_major = m.layout() == Layout::ColumnMajor;
  for (std::size_t k = 0; k < m.lines(); ++k)
    for (std::size_t p = offsets[k]; p < offsets[k + 1]; ++p)
      values[p] *= d.entries[col_major ? k : indices[p]];
  return SparseMatrix(m.rows(), m.cols(), m.layout(), std::move(offsets), std::move(indices),
                      std::move(values));
}

double frobenius_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double frobenius_norm(const SparseMatrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return std::sqrt(s);
}

}  // namespace cmm
