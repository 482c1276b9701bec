#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cmm/covariance.hpp"
#include "cmm/estimate.hpp"
#include "cmm/matrix.hpp"
#include "cmm/recovery.hpp"
#include "cmm/reference.hpp"
#include "cmm/serialize.hpp"
#include "cmm/sketch.hpp"

namespace py = pybind11;
using namespace cmm;

namespace {

DenseMatrix to_dense(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw dim_error("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(arr.shape(0));
  const auto cols = static_cast<std::size_t>(arr.shape(1));
  std::vector<double> data(arr.data(), arr.data() + rows * cols);
  return DenseMatrix(rows, cols, std::move(data));
}

py::array_t<double> to_numpy(const DenseMatrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

SketchParams make_params(std::uint32_t buckets, std::uint32_t reps, std::uint64_t seed,
                         unsigned sign_independence, unsigned threads) {
  SketchParams p;
  p.buckets = buckets;
  p.reps = reps;
  p.seed = seed;
  if (sign_independence != 2 && sign_independence != 4)
    throw dim_error("sign_independence must be 2 or 4");
  p.sign_independence =
      sign_independence == 4 ? SignIndependence::FourWise : SignIndependence::TwoWise;
  p.threads = threads;
  return p;
}

}  // namespace

PYBIND11_MODULE(_cmm, m) {
  m.doc() = "Compressed (count-sketch) representations of matrix products";

  py::register_exception<parse_error>(m, "ParseError", PyExc_ValueError);
  py::register_exception<dim_error>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<io_error>(m, "IoError", PyExc_IOError);
  py::register_exception<mode_error>(m, "ModeError", PyExc_ValueError);
  py::register_exception<cap_error>(m, "CapError", PyExc_MemoryError);

  py::class_<SparseMatrix>(m, "SparseMatrix")
      .def_property_readonly("rows", &SparseMatrix::rows)
      .def_property_readonly("cols", &SparseMatrix::cols)
      .def_property_readonly("nnz", &SparseMatrix::nnz)
      .def("to_numpy", [](const SparseMatrix& s) { return to_numpy(s.to_dense()); })
      .def_static(
          "from_numpy",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
            return SparseMatrix::from_dense(to_dense(arr));
          },
          py::arg("array"));

  m.def("load_matrix_market", &load_matrix_market, py::arg("path"));
  m.def(
      "save_matrix_market",
      [](const std::string& path, const SparseMatrix& s) { save_matrix_market(path, s); },
      py::arg("path"), py::arg("matrix"));

  py::class_<EntryEstimate>(m, "EntryEstimate")
      .def_readonly("value", &EntryEstimate::value)
      .def_readonly("per_repetition", &EntryEstimate::per_repetition)
      .def("__float__", [](const EntryEstimate& e) { return e.value; });

  py::class_<SketchSet>(m, "SketchSet")
      .def_property_readonly("n1", &SketchSet::n1)
      .def_property_readonly("n2", &SketchSet::n2)
      .def_property_readonly("n3", &SketchSet::n3)
      .def_property_readonly("buckets", &SketchSet::buckets)
      .def_property_readonly("reps", &SketchSet::reps)
      .def_property_readonly("seed", [](const SketchSet& s) { return s.params().seed; })
      .def("coefficients",
           [](const SketchSet& s, std::size_t t) {
             auto c = s.coefficients(t);
             return std::vector<double>(c.begin(), c.end());
           },
           py::arg("rep"))
      .def("decompress", &SketchSet::decompress, py::arg("i"), py::arg("j"))
      .def("decompress_value", &SketchSet::decompress_value, py::arg("i"), py::arg("j"))
      .def(
          "decompress_all",
          [](const SketchSet& s, std::size_t cap) { return to_numpy(s.decompress_all(cap)); },
          py::arg("entry_cap") = kDefaultEntryCap);

  py::class_<Candidate>(m, "Candidate")
      .def_readonly("row", &Candidate::row)
      .def_readonly("col", &Candidate::col)
      .def_readonly("multiplicity", &Candidate::multiplicity);

  py::class_<SparseEntry>(m, "SparseEntry")
      .def_readonly("row", &SparseEntry::row)
      .def_readonly("col", &SparseEntry::col)
      .def_readonly("value", &SparseEntry::value);

  py::class_<RecoverableSketch>(m, "RecoverableSketch")
      .def_property_readonly("base",
                             [](const RecoverableSketch& r) { return r.base(); })
      .def("find_significant_entries",
           [](const RecoverableSketch& r, double threshold) {
             return find_significant_entries(r, threshold).positions;
           },
           py::arg("threshold"))
      .def("extract_sparse_approx",
           [](const RecoverableSketch& r, double threshold) {
             return extract_sparse_approx(r, threshold);
           },
           py::arg("threshold"));

  m.def(
      "compressed_product",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
         std::uint32_t buckets, std::uint32_t reps, std::uint64_t seed,
         unsigned sign_independence, unsigned threads) {
        return compressed_product(to_dense(a), to_dense(b),
                                  make_params(buckets, reps, seed, sign_independence, threads));
      },
      py::arg("a"), py::arg("b"), py::arg("buckets"), py::arg("reps") = 0, py::arg("seed") = 0,
      py::arg("sign_independence") = 2, py::arg("threads") = 1);

  m.def(
      "compressed_product_sparse",
      [](const SparseMatrix& a, const SparseMatrix& b, std::uint32_t buckets, std::uint32_t reps,
         std::uint64_t seed, unsigned sign_independence, unsigned threads) {
        return compressed_product(a, b,
                                  make_params(buckets, reps, seed, sign_independence, threads));
      },
      py::arg("a"), py::arg("b"), py::arg("buckets"), py::arg("reps") = 0, py::arg("seed") = 0,
      py::arg("sign_independence") = 2, py::arg("threads") = 1);

  m.def(
      "compressed_product_recoverable",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
         std::uint32_t buckets, std::uint32_t reps, std::uint64_t seed,
         unsigned sign_independence, unsigned threads) {
        return compressed_product_recoverable(
            to_dense(a), to_dense(b),
            make_params(buckets, reps, seed, sign_independence, threads));
      },
      py::arg("a"), py::arg("b"), py::arg("buckets"), py::arg("reps") = 0, py::arg("seed") = 0,
      py::arg("sign_independence") = 2, py::arg("threads") = 1);

  m.def("sketch_add", &sketch_add, py::arg("x"), py::arg("y"));
  m.def("sketch_scale", &sketch_scale, py::arg("x"), py::arg("alpha"));

  py::class_<NnzEstimate>(m, "NnzEstimate")
      .def_readonly("upper_bound", &NnzEstimate::upper_bound)
      .def_readonly("terminating_b", &NnzEstimate::terminating_b)
      .def_readonly("capped", &NnzEstimate::capped)
      .def_readonly("zero_fraction_per_level", &NnzEstimate::zero_fraction_per_level)
      .def_readonly("level_failure_bound", &NnzEstimate::level_failure_bound);

  py::class_<FrobeniusEstimate>(m, "FrobeniusEstimate")
      .def_readonly("median_square", &FrobeniusEstimate::median_square)
      .def_readonly("upper_bound", &FrobeniusEstimate::upper_bound)
      .def_readonly("reps", &FrobeniusEstimate::reps);

  m.def(
      "estimate_nnz",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
         std::uint32_t reps, std::uint64_t seed) {
        return estimate_nnz(to_dense(a), to_dense(b), reps, seed);
      },
      py::arg("a"), py::arg("b"), py::arg("reps") = 10, py::arg("seed") = 0);

  m.def(
      "estimate_frobenius_ub",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
         std::uint32_t reps, std::uint64_t seed) {
        return estimate_frobenius_ub(to_dense(a), to_dense(b), reps, seed);
      },
      py::arg("a"), py::arg("b"), py::arg("reps") = 25, py::arg("seed") = 0);

  py::class_<CorrelationHit>(m, "CorrelationHit")
      .def_readonly("i", &CorrelationHit::i)
      .def_readonly("j", &CorrelationHit::j)
      .def_readonly("estimate", &CorrelationHit::estimate);

  py::class_<CovarianceSketch>(m, "CovarianceSketch")
      .def_property_readonly("recoverable", &CovarianceSketch::recoverable)
      .def_property_readonly("base", [](const CovarianceSketch& c) { return c.base(); })
      .def_property_readonly("diagonal",
                             [](const CovarianceSketch& c) {
                               auto d = c.diagonal();
                               return std::vector<double>(d.begin(), d.end());
                             })
      .def(
          "scan",
          [](const CovarianceSketch& c, double threshold) {
            return scan_correlations(c, threshold);
          },
          py::arg("threshold"));

  m.def(
      "sketch_covariance",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& samples,
         std::uint32_t buckets, std::uint32_t reps, std::uint64_t seed, bool recoverable,
         unsigned threads) {
        return sketch_covariance(SampleSet{to_dense(samples)},
                                 make_params(buckets, reps, seed, 2, threads), recoverable);
      },
      py::arg("samples"), py::arg("buckets"), py::arg("reps") = 0, py::arg("seed") = 0,
      py::arg("recoverable") = false, py::arg("threads") = 1,
      "Sketch the sample covariance of an n-by-m observation matrix (one column per "
      "observation), diagonal removed.");

  m.def(
      "exact_product",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
        return to_numpy(reference::exact_product(to_dense(a), to_dense(b)));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "err_f_k",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& mat,
         std::size_t k) { return reference::err_f_k(to_dense(mat), k); },
      py::arg("matrix"), py::arg("k"));

  m.def(
      "store_sketch",
      [](const std::string& path, const SketchSet& sk) { store_sketch(path, sk); },
      py::arg("path"), py::arg("sketch"));
  m.def(
      "store_sketch",
      [](const std::string& path, const RecoverableSketch& sk) { store_sketch(path, sk); },
      py::arg("path"), py::arg("sketch"));
  m.def(
      "load_sketch",
      [](const std::string& path) -> py::object {
        AnySketch sk = load_sketch(path);
        if (std::holds_alternative<SketchSet>(sk))
          return py::cast(std::get<SketchSet>(std::move(sk)));
        return py::cast(std::get<RecoverableSketch>(std::move(sk)));
      },
      py::arg("path"));
}
