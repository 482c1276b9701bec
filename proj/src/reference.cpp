#include "cmm/reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cmm::reference {

namespace {

void check_cap(std::size_t n1, std::size_t n3, std::size_t cap) {
  if (n1 * n3 > cap)
    throw cap_error("exact oracle: " + std::to_string(n1 * n3) + " entries exceed the memory cap");
}

}  // namespace

DenseMatrix exact_product(const DenseMatrix& a, const DenseMatrix& b, std::size_t entry_cap) {
  if (a.cols() != b.rows()) throw dim_error("exact_product: inner dimensions disagree");
  check_cap(a.rows(), b.cols(), entry_cap);
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

DenseMatrix exact_product(const SparseMatrix& a, const SparseMatrix& b, std::size_t entry_cap) {
  return exact_product(a.to_dense(), b.to_dense(), entry_cap);
}

std::vector<std::vector<double>> naive_countsketch(const DenseMatrix& a, const DenseMatrix& b,
                                                   const std::vector<PairHashFamily>& families,
                                                   std::size_t entry_cap) {
  std::vector<HashTables> tables;
  tables.reserve(families.size());
  for (const auto& f : families) tables.push_back(HashTables::tabulate(f, a.rows(), b.cols()));
  return naive_countsketch(a, b, tables, entry_cap);
}

HashTables HashTables::tabulate(const PairHashFamily& f, std::size_t n1, std::size_t n3) {
  HashTables t;
  t.buckets = f.buckets();
  t.bucket1.resize(n1);
  t.sign1.resize(n1);
  t.bucket2.resize(n3);
  t.sign2.resize(n3);
  for (std::size_t i = 0; i < n1; ++i) {
    t.bucket1[i] = f.bucket1(i);
    t.sign1[i] = f.sign1(i);
  }
  for (std::size_t j = 0; j < n3; ++j) {
    t.bucket2[j] = f.bucket2(j);
    t.sign2[j] = f.sign2(j);
  }
  return t;
}

std::vector<std::vector<double>> naive_countsketch(const DenseMatrix& a, const DenseMatrix& b,
                                                   const std::vector<HashTables>& tables,
                                                   std::size_t entry_cap) {
  const DenseMatrix product = exact_product(a, b, entry_cap);
  std::vector<std::vector<double>> coeff(tables.size());
  for (std::size_t t = 0; t < tables.size(); ++t) {
    const HashTables& tab = tables[t];
    const std::uint32_t mask = tab.buckets - 1;
    coeff[t].assign(tab.buckets, 0.0);
    for (std::size_t i = 0; i < product.rows(); ++i)
      for (std::size_t j = 0; j < product.cols(); ++j) {
        const std::uint32_t k = (tab.bucket1[i] + tab.bucket2[j]) & mask;
        coeff[t][k] += tab.sign1[i] * tab.sign2[j] * product(i, j);
      }
  }
  return coeff;
}

double err_f_k(const DenseMatrix& m, std::size_t k) {
  std::vector<double> squares;
  squares.reserve(m.rows() * m.cols());
  for (double v : m.data()) squares.push_back(v * v);
  if (k >= squares.size()) return 0.0;
  std::sort(squares.begin(), squares.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t p = k; p < squares.size(); ++p) sum += squares[p];
  return sum;
}

DenseMatrix exact_covariance(const DenseMatrix& observations) {
  const std::size_t n = observations.rows();
  const std::size_t m = observations.cols();
  if (m < 2) throw dim_error("exact_covariance: need at least two observations");
  std::vector<double> mean(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < m; ++c) mean[i] += observations(i, c);
    mean[i] /= static_cast<double>(m);
  }
  DenseMatrix q(n, n);
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t i = 0; i < n; ++i) {
      const double di = observations(i, c) - mean[i];
      if (di == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) q(i, j) += di * (observations(j, c) - mean[j]);
    }
  const double scale = 1.0 / static_cast<double>(m - 1);
  for (double& v : q.data()) v *= scale;
  return q;
}

}  // namespace cmm::reference
