// Python surface: the experiment runner (reports as plain dicts) plus direct
// entry points for the most-used library calls.  Validation failures raise
// ValueError; experiment failures raise RuntimeError with the module message.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lefschetz/experiments.hpp"
#include "lefschetz/foliation.hpp"
#include "lefschetz/fourier.hpp"
#include "lefschetz/mis.hpp"
#include "lefschetz/rational.hpp"
#include "lefschetz/weights.hpp"

namespace py = pybind11;
namespace ex = lefschetz::experiments;
using namespace lefschetz;
using alg::Cplx;

namespace {

py::object json_loads(const std::string& dumped) {
  return py::module_::import("json").attr("loads")(dumped);
}

weights::ModelWeight parse_weight(const std::string& text, int vars) {
  return weights::ModelWeight::parse(text, vars);
}

foliation::FrameField vertical_field(const std::string& poly) {
  return foliation::FrameField::vertical(
      foliation::RatFunc::from_poly(foliation::parse_poly_w(poly)));
}

py::list gens_list(const mis::StaircaseIdeal& ideal) {
  py::list out;
  for (const auto& g : ideal.gens) {
    py::tuple t(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) t[i] = g[i];
    out.append(t);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Numerical experiments on weighted torus identities, scaling ideals of "
      "singular weights, and foliated splitting sections.";
  m.attr("__version__") = ex::kToolVersion;

  m.def(
      "experiments",
      [] {
        py::list out;
        for (const auto& spec : ex::registry()) {
          py::dict d;
          d["name"] = spec.name;
          d["summary"] = spec.summary;
          d["sampling"] = spec.sampling;
          py::list ps;
          for (const auto& p : spec.params) {
            py::dict pd;
            pd["key"] = p.key;
            pd["default"] = p.fallback;
            pd["help"] = p.help;
            ps.append(pd);
          }
          d["params"] = ps;
          out.append(d);
        }
        return out;
      },
      "List every registered experiment with its parameters and defaults.");

  m.def(
      "run_experiment",
      [](const std::string& name, const std::map<std::string, std::string>& params,
         std::optional<std::uint64_t> seed, int jobs) {
        ex::ExperimentConfig cfg;
        cfg.experiment = name;
        cfg.params = params;
        cfg.seed = seed;
        cfg.jobs = jobs;
        ex::Report rep = ex::run(cfg);
        return json_loads(rep.to_json(true).dump());
      },
      py::arg("name"), py::arg("params") = std::map<std::string, std::string>{},
      py::arg("seed") = std::nullopt, py::arg("jobs") = 1,
      "Run a named experiment and return its JSON report as a dict.");

  m.def(
      "report_csv",
      [](const std::string& name, const std::map<std::string, std::string>& params,
         std::optional<std::uint64_t> seed) {
        ex::ExperimentConfig cfg;
        cfg.experiment = name;
        cfg.params = params;
        cfg.seed = seed;
        return ex::run(cfg).csv_text();
      },
      py::arg("name"), py::arg("params") = std::map<std::string, std::string>{},
      py::arg("seed") = std::nullopt, "Run an experiment and return its CSV table.");

  // -- scaling ideals ------------------------------------------------------

  m.def(
      "ideal_generators",
      [](const std::string& weight, int vars) {
        return gens_list(mis::ideal_of_weight(parse_weight(weight, vars)));
      },
      py::arg("weight"), py::arg("vars") = 2,
      "Monomial exponent vectors generating the weight's integrability ideal.");

  m.def(
      "scaled_ideal_generators",
      [](const std::string& weight, const std::string& t, int vars) {
        return gens_list(
            mis::scaled_ideal(parse_weight(weight, vars), rational_from_string(t)));
      },
      py::arg("weight"), py::arg("t"), py::arg("vars") = 2,
      "Generators of the ideal at scale t (exact rational, off the jump set).");

  m.def(
      "jumping_numbers",
      [](const std::string& weight, const std::string& tmax, int vars) {
        std::vector<std::string> out;
        for (const auto& t :
             mis::jumping_numbers(parse_weight(weight, vars), rational_from_string(tmax)))
          out.push_back(rational_to_string(t));
        return out;
      },
      py::arg("weight"), py::arg("tmax") = "1", py::arg("vars") = 2,
      "Exact jumping numbers of the scaling family up to tmax, as rational strings.");

  m.def(
      "branch_generators",
      [](const std::string& a, const std::string& b, const std::string& c) {
        mis::BranchParams bp{rational_from_string(a), rational_from_string(b),
                             rational_from_string(c)};
        bp.validate();
        return gens_list(mis::branch_ideal(bp));
      },
      py::arg("a"), py::arg("b"), py::arg("c"),
      "Closed-form generators for the two-branch weight a*log|z| + log(|z|^b + |w|^c).");

  m.def(
      "cluster_coherence",
      [](int K, int degree) {
        auto diag = mis::coherence_diagnostic(mis::ClusterFamily::standard(K), degree);
        py::dict d;
        d["verdict"] = diag.verdict;
        d["witness_index"] = diag.witness_index;
        d["witness_power"] = diag.witness_power;
        d["degree"] = diag.degree;
        d["kernel_dimension"] = diag.kernel_dimension;
        return d;
      },
      py::arg("K") = 6, py::arg("degree") = 3,
      "Degree-capped patching obstruction for the standard size-K cluster family.");

  m.def(
      "lelong_number",
      [](const std::string& weight, int vars) {
        return rational_to_string(
            parse_weight(weight, vars).lelong(weights::Point(vars, Cplx(0, 0))));
      },
      py::arg("weight"), py::arg("vars") = 2,
      "Lelong number of the weight at the origin, as a rational string.");

  m.def(
      "mass_bound",
      [](const std::string& weight, double radius, int vars) {
        weights::PolydiscDomain K(weights::Point(vars, Cplx(0, 0)),
                                  std::vector<double>(vars, radius));
        return weights::mass_bound(parse_weight(weight, vars), K);
      },
      py::arg("weight"), py::arg("radius") = 0.5, py::arg("vars") = 2,
      "Certified gradient mass of the weight over the origin-centered polydisc.");

  // -- splitting sections --------------------------------------------------

  m.def(
      "integrability",
      [](const std::string& S, const std::string& T, int samples) {
        auto eta = foliation::build_eta(vertical_field(S), vertical_field(T));
        auto rep = foliation::integrability_test(eta, samples);
        py::dict d;
        d["integrable"] = rep.integrable;
        if (rep.has_witness) {
          py::dict wd;
          wd["chart"] = rep.witness.chart;
          wd["w"] = rep.witness.w;
          py::list res;
          for (Cplx z : rep.residual) res.append(z);
          wd["residual"] = res;
          d["witness"] = wd;
        } else {
          d["witness"] = py::none();
        }
        d["rank"] = foliation::generic_rank(eta);
        d["iota"] = foliation::iota_invariant(eta);
        return d;
      },
      py::arg("S") = "1", py::arg("T") = "-w^2", py::arg("samples") = 32,
      "Kernel integrability of the splitting section for vertical fields S, T.");

  m.def(
      "iota_invariant",
      [](const std::string& S, const std::string& T) {
        return foliation::iota_invariant(
            foliation::build_eta(vertical_field(S), vertical_field(T)));
      },
      py::arg("S") = "1", py::arg("T") = "-w^2",
      "Fiber-integral pairing of the splitting section (2 for every vertical pair).");

  // -- weighted torus identities ------------------------------------------

  m.def(
      "harmonic_generator",
      [] {
        auto rep = foliation::harmonic_generator_check();
        py::dict d;
        d["dbar_residual"] = rep.dbar_residual;
        d["dbar_star_residual"] = rep.dbar_star_residual;
        d["preimage_matches"] = rep.preimage_matches;
        return d;
      },
      "Harmonicity residuals of the antiholomorphic generator and its preimage.");
}
