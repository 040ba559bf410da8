#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lcwnet/basis.hpp"
#include "lcwnet/diagnostics.hpp"
#include "lcwnet/gradcheck.hpp"
#include "lcwnet/qr.hpp"
#include "lcwnet/stats.hpp"
#include "lcwnet/trainer.hpp"

namespace py = pybind11;

namespace {

lcw::Matrix matrix_from_array(const py::array_t<double, py::array::c_style>& arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  lcw::Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
  const auto view = arr.unchecked<2>();
  for (py::ssize_t i = 0; i < arr.shape(0); ++i)
    for (py::ssize_t j = 0; j < arr.shape(1); ++j)
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = view(i, j);
  return m;
}

py::array_t<double> array_from_matrix(const lcw::Matrix& m) {
  py::array_t<double> arr({m.rows(), m.cols()});
  auto view = arr.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      view(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = m(i, j);
  return arr;
}

py::dict stats_to_dict(const lcw::SummaryStats& st) {
  py::dict d;
  d["mean"] = st.mean;
  d["variance"] = st.variance;
  d["q01"] = st.q01;
  d["q25"] = st.q25;
  d["q50"] = st.q50;
  d["q75"] = st.q75;
  d["q99"] = st.q99;
  return d;
}

lcw::PhiActivation phi_kind(const std::string& name) {
  if (name == "sigmoid") return lcw::PhiActivation::sigmoid;
  if (name == "relu") return lcw::PhiActivation::relu;
  if (name == "identity") return lcw::PhiActivation::identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Linearly constrained weights: basis construction, variance diagnostics, training";

  m.def(
      "build_basis",
      [](std::size_t dim) { return array_from_matrix(lcw::LcwBasis::build(dim).matrix()); },
      py::arg("dim"),
      "Orthonormal basis of the zero-sum subspace, as an (m, m-1) array");

  m.def(
      "lift",
      [](const py::array_t<double, py::array::c_style>& v) {
        std::vector<double> vv(v.data(), v.data() + v.size());
        auto basis = lcw::LcwBasis::shared(vv.size() + 1);
        return basis->lift(vv);
      },
      py::arg("v"), "Realize the zero-sum weight w = B v");

  m.def(
      "project",
      [](const py::array_t<double, py::array::c_style>& w) {
        std::vector<double> ww(w.data(), w.data() + w.size());
        auto basis = lcw::LcwBasis::shared(ww.size());
        return basis->project(ww);
      },
      py::arg("w"), "Free parameter v = B^T w of the zero-sum component");

  m.def(
      "qr_thin",
      [](const py::array_t<double, py::array::c_style>& a) {
        const auto res = lcw::qr_thin(matrix_from_array(a));
        return py::make_tuple(array_from_matrix(res.q), array_from_matrix(res.r));
      },
      py::arg("a"), "Thin Householder QR with a positive-diagonal R");

  m.def(
      "matmul",
      [](const py::array_t<double, py::array::c_style>& a,
         const py::array_t<double, py::array::c_style>& b) {
        return array_from_matrix(lcw::matmul(matrix_from_array(a), matrix_from_array(b)));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "summarize",
      [](const std::vector<double>& samples) { return stats_to_dict(lcw::summarize(samples)); },
      py::arg("samples"), "Mean, population variance, and {1,25,50,75,99}% quantiles");

  m.def(
      "measure_phi",
      [](const std::string& kind, double sigma, std::size_t samples, std::uint64_t seed) {
        lcw::Rng rng(seed);
        const auto est = lcw::measure_phi(phi_kind(kind), sigma, samples, rng);
        py::dict d;
        d["phi_fw"] = est.phi_fw;
        d["phi_bw"] = est.phi_bw;
        d["se_fw"] = est.se_fw;
        d["se_bw"] = est.se_bw;
        d["std_ratio_fw"] = est.std_ratio_fw();
        d["std_ratio_bw"] = est.std_ratio_bw();
        return d;
      },
      py::arg("kind"), py::arg("sigma") = 1.0, py::arg("samples") = 1000000,
      py::arg("seed") = 1,
      "Monte Carlo forward/backward variance amplification of an activation");

  m.def(
      "measure_shift",
      [](const py::array_t<double, py::array::c_style>& W,
         const py::array_t<double, py::array::c_style>& A, const std::vector<double>& mean_vec) {
        const auto rep = lcw::measure_shift(matrix_from_array(W), matrix_from_array(A), mean_vec);
        py::list rows;
        for (const auto& r : rep.rows) {
          py::dict d;
          d["predicted_mean"] = r.predicted_mean;
          d["empirical_mean"] = r.empirical_mean;
          d["angle"] = r.angle;
          d["weight_norm"] = r.weight_norm;
          d["standard_error"] = r.standard_error;
          rows.append(d);
        }
        py::dict out;
        out["rows"] = rows;
        out["max_abs_deviation"] = rep.max_abs_deviation;
        out["rows_within_4se"] = rep.rows_within_4se;
        return out;
      },
      py::arg("W"), py::arg("A"), py::arg("mean_vec"),
      "Predicted vs empirical preactivation means, row by row");

  m.def(
      "verify_props",
      [](std::uint64_t seed, std::size_t samples) {
        py::list out;
        for (const auto& v : lcw::run_verification_battery(seed, samples)) {
          py::dict d;
          d["name"] = v.name;
          d["expected"] = v.expected;
          d["observed"] = v.observed;
          d["tolerance"] = v.tolerance;
          d["pass"] = v.pass;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 1, py::arg("samples") = 1000000,
      "Run the full statistical verification battery");

  m.def(
      "gradcheck",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& r : lcw::run_gradcheck_suite(seed)) {
          py::dict d;
          d["name"] = r.name;
          d["max_rel_error"] = r.max_rel_error;
          d["threshold"] = r.threshold;
          d["pass"] = r.pass;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 1, "Finite-difference checks for every layer type");

  m.def(
      "train",
      [](const std::string& config_json) {
        const lcw::TrainConfig cfg = lcw::config_from_json_text(config_json);
        const lcw::TrainOutput out = lcw::train(cfg);
        py::list rows;
        for (const auto& r : out.log.rows) {
          py::dict d;
          d["epoch"] = r.epoch;
          d["train_loss"] = r.train_loss;
          d["train_accuracy"] = r.train_accuracy;
          d["test_loss"] = r.test_loss;
          d["test_accuracy"] = r.test_accuracy;
          d["learning_rate"] = r.learning_rate;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config_json"), "Train from a JSON config string; returns per-epoch metrics");
}
