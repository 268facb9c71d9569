#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "pricing/estimators.hpp"
#include "pricing/losses.hpp"
#include "pricing/oracle.hpp"
#include "pricing/transfer.hpp"

namespace py = pybind11;
using namespace pricing;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Mat& a) {
  Array out({a.rows(), a.cols()});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) view(i, j) = a(i, j);
  }
  return out;
}

Mat from_numpy(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d array");
  const auto view = a.unchecked<2>();
  Mat out(view.shape(0), view.shape(1));
  for (py::ssize_t i = 0; i < view.shape(0); ++i) {
    for (py::ssize_t j = 0; j < view.shape(1); ++j) out(i, j) = view(i, j);
  }
  return out;
}

Mat reweight(const std::string& kind, const Vec& pi0, const std::optional<Vec>& fy_hat,
             double c) {
  const Propensities p(pi0);
  switch (parse_estimator_kind(kind)) {
    case EstimatorKind::kIps: return r_ips(p).mat;
    case EstimatorKind::kCips: return r_cips(p).mat;
    case EstimatorKind::kRobust: return r_robust(TransferMatrix(p)).mat;
    case EstimatorKind::kMv:
    case EstimatorKind::kSwitching: {
      if (!fy_hat) throw py::value_error(kind + " needs fy_hat");
      const TransferMatrix t(p);
      const ReweightMatrix mv = r_mv(t, OutcomeDist(*fy_hat));
      if (parse_estimator_kind(kind) == EstimatorKind::kMv) return mv.mat;
      return r_switching(mv, r_robust(t), SwitchingWeight(c)).mat;
    }
    case EstimatorKind::kDr: break;
  }
  throw py::value_error("DR has no reweighting matrix of its own; use MV");
}

}  // namespace

PYBIND11_MODULE(_pricing_losses, m) {
  m.doc() = "Corrupted-label pricing losses: transfer matrices, left inverses, oracle checks.";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<MatError>(m, "MatError", PyExc_ValueError);

  m.def("transfer_matrix", [](const Vec& pi0) {
    return to_numpy(TransferMatrix(Propensities(pi0)).mat());
  }, py::arg("pi0"));

  m.def("reweight_matrix",
        [](const std::string& kind, const Vec& pi0, const std::optional<Vec>& fy_hat, double c) {
          return to_numpy(reweight(kind, pi0, fy_hat, c));
        },
        py::arg("kind"), py::arg("pi0"),
        py::arg("fy_hat") = std::nullopt, py::arg("c") = 0.5,
        "R for kind in {MV, Robust, IPS, CIPS, CMix}; MV and CMix need fy_hat.");

  m.def("valuation_loss", [](const Vec& pi, const Vec& prices, double unit_cost) {
    return valuation_loss_vector(PolicyDist(pi), PriceLadder(prices, unit_cost)).values;
  }, py::arg("pi"), py::arg("prices"), py::arg("unit_cost") = 0.0);

  m.def("corrupted_loss", [](const Array& r, const Vec& lv) {
    return corrupted_loss_vector(from_numpy(r), ValuationLossVector{lv}).values;
  }, py::arg("r"), py::arg("lv"));

  m.def("conditional_variance", [](const Array& r, const Vec& lv, const Vec& fy) {
    return conditional_variance(from_numpy(r), ValuationLossVector{lv}, OutcomeDist(fy));
  }, py::arg("r"), py::arg("lv"), py::arg("fy"));

  m.def("push_forward", [](const Vec& pi0, const Vec& fv) {
    return push_forward(TransferMatrix(Propensities(pi0)), ValuationDist(fv)).vec();
  }, py::arg("pi0"), py::arg("fv"));

  m.def("oracle_suite", [](std::uint64_t seed, std::size_t instances, bool break_robust) {
    oracle::SuiteConfig cfg;
    cfg.seed = seed;
    cfg.instances = instances;
    cfg.break_robust = break_robust;
    py::list out;
    for (const auto& row : oracle::run_suite(cfg)) {
      py::dict d;
      d["check"] = row.check;
      d["max_error"] = row.max_error;
      d["tolerance"] = row.tolerance;
      d["pass"] = row.pass;
      out.append(d);
    }
    return out;
  }, py::arg("seed") = 20240101, py::arg("instances") = 200, py::arg("break_robust") = false);
}
