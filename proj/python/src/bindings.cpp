#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fsfmb/debias.hpp"
#include "fsfmb/error.hpp"
#include "fsfmb/factor_terms.hpp"
#include "fsfmb/fmb.hpp"
#include "fsfmb/pipeline.hpp"
#include "fsfmb/regression.hpp"
#include "fsfmb/selection.hpp"

namespace py = pybind11;
using namespace fsfmb;

namespace {

StopRule make_stop(std::optional<double> eps, std::optional<std::size_t> count, const std::string& on,
                   std::optional<std::size_t> max_steps) {
  if (eps && count) throw Error(ErrorCode::Config, "give stop_eps or stop_count, not both");
  if (count) return StopRule::fixed_count(*count);
  return StopRule::min_gain(eps.value_or(0.01), parse_objective(on), max_steps);
}

HacSpec make_hac(std::optional<std::size_t> lag) { return lag ? HacSpec::fixed(*lag) : HacSpec::rule(); }

ScanMethod parse_scan(const std::string& s) {
  if (s == "refit") return ScanMethod::Refit;
  if (s == "incremental") return ScanMethod::Incremental;
  throw Error(ErrorCode::Config, "scan must be refit or incremental, got " + s);
}

py::object opt(const std::optional<double>& v) { return v ? py::object(py::float_(*v)) : py::none(); }

py::dict selection_dict(const SelectionResult& r) {
  py::list steps;
  for (const auto& s : r.steps) {
    py::dict d;
    d["index"] = s.index;
    d["r2"] = s.r2;
    d["adj_r2"] = s.adj_r2;
    d["alpha"] = opt(s.alpha);
    d["alpha_t"] = opt(s.alpha_t);
    steps.append(d);
  }
  py::dict out;
  out["base_set"] = r.base_set;
  out["base_r2"] = r.base_r2;
  out["base_adj_r2"] = r.base_adj_r2;
  out["steps"] = steps;
  out["final_set"] = r.final_set;
  return out;
}

SelectionResult selection_from(const IndexSet& final_set) {
  SelectionResult r;
  r.final_set = final_set;
  return r;
}

py::dict estimate_dict(const SdfEstimate& e) {
  py::dict d;
  d["psi"] = e.psi;
  d["selected"] = e.selected;
  d["alpha"] = opt(e.alpha);
  d["r2"] = e.fit.r2;
  d["adj_r2"] = e.fit.adj_r2;
  d["gram_singular"] = e.gram_singular;
  d["equivalence_gap"] = e.equivalence_gap;
  return d;
}

py::dict loading_dict(const DebiasedLoading& l) {
  py::dict d;
  d["j"] = l.j;
  d["psi_d"] = l.psi_d;
  d["sigma_psi"] = l.sigma_psi;
  d["se"] = l.standard_error();
  d["t_stat"] = l.t_stat;
  const auto [lo, hi] = l.confidence_interval(1.96);
  d["ci95"] = py::make_tuple(lo, hi);
  d["selected"] = l.sets.selected;
  d["auxiliary"] = l.sets.auxiliary;
  d["combined"] = l.sets.combined;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Forward-selection Fama-MacBeth estimation";
  m.attr("__version__") = FSFMB_VERSION;

  // Leaked on purpose: the type lives as long as the interpreter.
  static PyObject* error_type = PyErr_NewException("fsfmb._core.FsfmbError", PyExc_RuntimeError, nullptr);
  m.attr("FsfmbError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.def(
      "expand_terms",
      [](const std::vector<std::string>& base, int degree, const std::string& mode) {
        std::vector<std::string> labels;
        for (const auto& t : expand_terms(base, {parse_expansion_kind(mode), degree})) labels.push_back(t.label());
        return labels;
      },
      py::arg("base_names"), py::arg("degree") = 3, py::arg("mode") = "full");

  m.def(
      "expand",
      [](const MatrixXd& base, const std::vector<std::string>& names, int degree, const std::string& mode) {
        const FactorPanel panel = make_factor_panel(base, names);
        const FactorPanel out = materialize(panel, expand_terms(panel.names, {parse_expansion_kind(mode), degree}));
        return py::make_tuple(out.values, out.names);
      },
      py::arg("base"), py::arg("names") = std::vector<std::string>{}, py::arg("degree") = 3,
      py::arg("mode") = "full", "Higher-order product terms of the base columns and their labels.");

  m.def(
      "ols",
      [](const MatrixXd& X, const VectorXd& y, bool intercept) {
        const LinearFit f = ols(X, y, intercept);
        py::dict d;
        d["coefficients"] = f.coefficients;
        d["intercept"] = opt(f.intercept);
        d["residuals"] = f.residuals;
        d["r2"] = f.r2;
        d["adj_r2"] = f.adj_r2;
        d["rank"] = f.rank;
        return d;
      },
      py::arg("X"), py::arg("y"), py::arg("intercept") = true);

  m.def(
      "newey_west_lrv", [](const VectorXd& x, std::optional<std::size_t> lag) { return newey_west_lrv(x, make_hac(lag)); },
      py::arg("series"), py::arg("lag") = py::none());

  m.def(
      "sample_covariances",
      [](const MatrixXd& returns, const MatrixXd& factors) { return sample_covariances(returns, factors); },
      py::arg("returns"), py::arg("factors"));

  m.def(
      "estimate",
      [](const MatrixXd& returns, const MatrixXd& factors, const IndexSet& S, bool intercept) {
        return estimate_dict(estimate_sdf_loadings(make_returns_panel(returns), make_factor_panel(factors), S, intercept));
      },
      py::arg("returns"), py::arg("factors"), py::arg("selected"), py::arg("intercept") = true);

  m.def(
      "select",
      [](const MatrixXd& returns, const MatrixXd& factors, const IndexSet& base, std::optional<IndexSet> candidates,
         std::optional<double> stop_eps, std::optional<std::size_t> stop_count, std::optional<std::size_t> max_steps,
         const std::string& objective, bool intercept, const std::string& scan, std::size_t threads) {
        const FactorPanel f = make_factor_panel(factors);
        const IndexSet cand = candidates ? *candidates : complement(base, f.size());
        ObjectiveConfig cfg;
        cfg.objective = parse_objective(objective);
        cfg.with_intercept = intercept;
        cfg.scan = parse_scan(scan);
        cfg.threads = threads;
        const StopRule stop = make_stop(stop_eps, stop_count, objective, max_steps);
        SelectionResult r;
        {
          py::gil_scoped_release release;
          r = fs_fmb(make_returns_panel(returns), f, base, cand, stop, cfg);
        }
        return selection_dict(r);
      },
      py::arg("returns"), py::arg("factors"), py::arg("base") = IndexSet{}, py::arg("candidates") = py::none(),
      py::arg("stop_eps") = py::none(), py::arg("stop_count") = py::none(), py::arg("max_steps") = py::none(),
      py::arg("objective") = "adj_r2", py::arg("intercept") = true, py::arg("scan") = "refit",
      py::arg("threads") = 1);

  m.def(
      "debias",
      [](const MatrixXd& returns, const MatrixXd& factors, const IndexSet& selected, std::optional<IndexSet> coordinates,
         std::optional<double> stop_eps, std::optional<std::size_t> stop_count, bool intercept,
         std::optional<std::size_t> hac_lag, std::size_t threads) {
        const ReturnsPanel r = make_returns_panel(returns);
        const FactorPanel f = make_factor_panel(factors);
        DebiasOptions options;
        options.with_intercept = intercept;
        options.hac = make_hac(hac_lag);
        const IndexSet coords = coordinates ? *coordinates : all_indices(f.size());
        DebiasRun run;
        {
          py::gil_scoped_release release;
          run = debias_all(r, f, selection_from(selected), coords, make_stop(stop_eps, stop_count, "adj_r2", {}),
                           options, threads);
        }
        py::list loadings;
        for (const auto& l : run.loadings) loadings.append(loading_dict(l));
        py::dict d;
        d["loadings"] = loadings;
        d["skipped"] = run.skipped;
        return d;
      },
      py::arg("returns"), py::arg("factors"), py::arg("selected"), py::arg("coordinates") = py::none(),
      py::arg("stop_eps") = py::none(), py::arg("stop_count") = py::none(), py::arg("intercept") = true,
      py::arg("hac_lag") = py::none(), py::arg("threads") = 1);

  m.def("lemma_check", [](const MatrixXd& cov, double tol) { return lemma_d2_check(cov, tol); }, py::arg("covariance"),
        py::arg("tolerance") = 1e-8);

  m.def(
      "run_config",
      [](const std::string& command, const std::string& config_path) {
        const RunConfig cfg = load_config(config_path);
        return report_document(run_stage(command, cfg), cfg).dump();
      },
      py::arg("command"), py::arg("config"), "Runs a CLI stage and returns the JSON report text.");

  m.attr("commands") = command_names();
}
