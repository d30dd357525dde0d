#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scorelab/bounds.hpp"
#include "scorelab/cli.hpp"
#include "scorelab/counterexample.hpp"
#include "scorelab/metrics.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/scorefield.hpp"
#include "scorelab/targets.hpp"

#include <sstream>

namespace py = pybind11;
using namespace scorelab;

namespace {

py::array_t<double> to_array(const Ensemble& e) {
  py::array_t<double> a({static_cast<py::ssize_t>(e.size()), static_cast<py::ssize_t>(e.dim)});
  std::copy(e.data.begin(), e.data.end(), a.mutable_data());
  return a;
}

ScoreSource source_for(const TargetSpec& t, const std::string& kind, double delta, double eta) {
  SourceOptions opts;
  opts.delta = delta;
  if (eta != 0.0) opts.eta = Perturbation{Perturbation::Shape::constant, eta, 0.0};
  if (kind == "exact") return make_score_source(SourceKind::exact, t, opts);
  if (kind == "quadrature") return make_score_source(SourceKind::quadrature, t, opts);
  throw DomainError("source must be 'exact' or 'quadrature'");
}

}  // namespace

PYBIND11_MODULE(_scorelab, m) {
  m.doc() = "Score regularity bounds, counter-examples and diffusion sampler experiments";

  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<HorizonError>(m, "HorizonError", PyExc_ArithmeticError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<TargetSpec>(m, "Target")
      .def_readonly("name", &TargetSpec::name)
      .def_readonly("dim", &TargetSpec::dim)
      .def("__repr__", [](const TargetSpec& t) { return "<Target " + t.name + " dim=" + std::to_string(t.dim) + ">"; });

  m.def("catalog", &catalog, py::arg("name"), py::arg("params") = ParamMap{});
  m.def("catalog_names", &catalog_names);

  py::class_<ScoreField>(m, "ScoreField")
      .def(py::init<TargetSpec>(), py::arg("target"))
      .def("log_pbar", &ScoreField::log_pbar, py::arg("t_bar"), py::arg("x"))
      .def("grad_qbar", &ScoreField::grad_qbar, py::arg("t_bar"), py::arg("x"))
      .def("hess_qbar", &ScoreField::hess_qbar, py::arg("t_bar"), py::arg("x"))
      .def(
          "score",
          [](const ScoreField& f, double t, const Vec& x) {
            auto q = f.forward(t, x);
            return py::make_tuple(q.score, q.score_jacobian);
          },
          py::arg("t"), py::arg("x"), "Score and its Jacobian at forward time t.");

  m.def(
      "closed_form_score",
      [](const TargetSpec& t, double time, const Vec& x) {
        const auto mix = mixture_view(t);
        if (!mix) throw UnsupportedError("closed_form_score: target is not a Gaussian mixture");
        auto s = closed_form_mixture(*mix, time, x);
        return py::make_tuple(s.score, s.jacobian);
      },
      py::arg("target"), py::arg("t"), py::arg("x"));

  m.def(
      "thm31_bounds",
      [](double M0, double M1, double t) {
        auto b = thm31_bounds(M0, M1, t);
        return py::dict(py::arg("upper") = b.upper, py::arg("lower") = b.lower, py::arg("horizon") = b.horizon);
      },
      py::arg("M0"), py::arg("M1"), py::arg("t"));
  m.def("cor32_Ct", &cor32_Ct, py::arg("L0"), py::arg("L1"), py::arg("t"));
  m.def("prior_horizon", &prior_horizon, py::arg("L"));
  m.def("early_stopping_lipschitz", &early_stopping_lipschitz, py::arg("delta"), py::arg("M"));
  m.def("theorem_ids", &theorem_ids);
  m.def(
      "sweep_verify",
      [](const TargetSpec& t, const std::string& id, std::vector<double> t_bars, int per_axis, double lo, double hi) {
        SweepGrid g;
        g.t_bars = std::move(t_bars);
        g.points = ValidationGrid::lattice(t.dim, lo, hi, per_axis).points;
        const auto r = sweep_verify(t, id, g);
        return py::dict(py::arg("violations") = r.violation_count(), py::arg("skipped") = r.skipped_count(),
                        py::arg("rows") = r.rows.size(), py::arg("min_margin") = r.min_margin(),
                        py::arg("csv") = r.to_csv());
      },
      py::arg("target"), py::arg("theorem"), py::arg("t_bars"), py::arg("per_axis") = 41, py::arg("lo") = -4.0,
      py::arg("hi") = 4.0);

  m.def(
      "block_ratio",
      [](double M, const std::string& path) {
        const auto b = block_ratio(M, path == "quadrature" ? BlockPath::quadrature : BlockPath::closed_form);
        return py::dict(py::arg("A") = b.A, py::arg("B") = b.B, py::arg("C") = b.C, py::arg("D") = b.D,
                        py::arg("E") = b.E, py::arg("ratio") = b.ratio);
      },
      py::arg("M"), py::arg("path") = "closed_form");

  m.def(
      "sample",
      [](const TargetSpec& t, double T, std::size_t N, double delta, std::size_t ensemble, std::uint64_t seed,
         const std::string& source, double eta) {
        SamplerConfig cfg{T, N, delta, ensemble, seed};
        const auto src = source_for(t, source, delta, eta);
        Ensemble e;
        {
          py::gil_scoped_release release;
          e = backward_run(cfg, src);
        }
        return py::make_tuple(to_array(e), e.excluded);
      },
      py::arg("target"), py::arg("T") = 3.0, py::arg("N") = 20, py::arg("delta") = 0.0, py::arg("ensemble") = 10000,
      py::arg("seed") = 0, py::arg("source") = "exact", py::arg("eta") = 0.0);
  m.def(
      "forward_sample",
      [](const TargetSpec& t, double time, std::size_t count, std::uint64_t seed) {
        return to_array(forward_sample(t, time, count, seed));
      },
      py::arg("target"), py::arg("t"), py::arg("count"), py::arg("seed") = 0);

  m.def("w1_1d", &w1_1d, py::arg("a"), py::arg("b"));
  m.def(
      "rate_fit",
      [](const std::vector<double>& Ns, const std::vector<double>& errors) {
        if (Ns.size() != errors.size()) throw ContractError("rate_fit: length mismatch");
        std::vector<RatePoint> pts;
        for (std::size_t i = 0; i < Ns.size(); ++i) pts.push_back({Ns[i], errors[i]});
        const auto f = rate_fit(pts);
        return py::dict(py::arg("a") = f.a, py::arg("b") = f.b, py::arg("gamma") = f.gamma,
                        py::arg("residual") = f.residual, py::arg("degenerate") = f.degenerate);
      },
      py::arg("N"), py::arg("errors"));

  m.def(
      "run_cli",
      [](const std::string& command, const std::string& config_text,
         const std::vector<std::pair<std::string, std::string>>& overrides) {
        std::ostringstream log;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(command, config_text, overrides, log);
        }
        return py::make_tuple(code, log.str());
      },
      py::arg("command"), py::arg("config_text"),
      py::arg("overrides") = std::vector<std::pair<std::string, std::string>>{});
  m.def("provenance", &provenance_string);
}
