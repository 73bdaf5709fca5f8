#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "awh/errors.hpp"
#include "awh/martingale.hpp"
#include "awh/serialize.hpp"
#include "awh/simulate.hpp"

namespace py = pybind11;
using namespace awh;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Askey-Wilson quadratic harness toolkit";
    m.attr("__version__") = kVersion;
    m.attr("SCHEMA") = kSchema;

    py::register_exception<Inadmissible>(m, "Inadmissible", PyExc_ValueError);
    py::register_exception<HypothesisViolated>(m, "HypothesisViolated",
                                               PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<UnsupportedPoint>(m, "UnsupportedPoint",
                                             PyExc_ValueError);
    py::register_exception<EmptyDomain>(m, "EmptyDomain", PyExc_ValueError);
    py::register_exception<Singular>(m, "Singular", PyExc_ArithmeticError);
    py::register_exception<NonConvergent>(m, "NonConvergent",
                                          PyExc_ArithmeticError);
    py::register_exception<InsufficientPaths>(m, "InsufficientPaths",
                                              PyExc_ArithmeticError);

    // ---- q-series ----
    m.def("qpoch_finite",
          py::overload_cast<double, double, int>(&qpoch_finite), py::arg("a"),
          py::arg("q"), py::arg("n"));
    m.def("qpoch_infinite",
          [](double a, double q) { return qpoch_infinite(a, q); },
          py::arg("a"), py::arg("q"));
    m.def("qbinomial", &qbinomial, py::arg("n"), py::arg("k"), py::arg("q"));

    // ---- Askey-Wilson measures ----
    py::class_<AWParams>(m, "AWParams")
        .def_readonly("a", &AWParams::a)
        .def_readonly("b", &AWParams::b)
        .def_readonly("c", &AWParams::c)
        .def_readonly("d", &AWParams::d)
        .def_readonly("q", &AWParams::q);
    py::class_<Atom>(m, "Atom")
        .def_readonly("x", &Atom::x)
        .def_readonly("mass", &Atom::mass);
    py::class_<AWMeasure>(m, "AWMeasure")
        .def_readonly("params", &AWMeasure::params)
        .def_readonly("K", &AWMeasure::K)
        .def_readonly("atoms", &AWMeasure::atoms)
        .def_readonly("has_continuous", &AWMeasure::has_continuous);
    m.def("aw_params", &aw_params, py::arg("a"), py::arg("b"), py::arg("c"),
          py::arg("d"), py::arg("q"));
    m.def("measure", [](const AWParams& p) { return measure(p); },
          py::arg("params"));
    m.def("density", [](double x, const AWParams& p) { return density(x, p); },
          py::arg("x"), py::arg("params"));
    m.def("eval_bar", &eval_bar, py::arg("n"), py::arg("x"), py::arg("params"));
    m.def("eval_monic", &eval_monic, py::arg("n"), py::arg("x"),
          py::arg("params"));
    m.def("aw_mean", &mean, py::arg("params"));
    m.def("aw_variance", &variance, py::arg("params"));
    m.def("discrete_pmf", &discrete_pmf, py::arg("k"), py::arg("N"),
          py::arg("a"), py::arg("b"), py::arg("c"), py::arg("q"));
    m.def("integrate_measure",
          [](const AWMeasure& mm, const std::function<double(double)>& f) {
              return integrate_measure(mm, f);
          },
          py::arg("measure"), py::arg("f"));

    // ---- process / harness ----
    py::class_<ProcessParams>(m, "ProcessParams")
        .def_readonly("A", &ProcessParams::A)
        .def_readonly("B", &ProcessParams::B)
        .def_readonly("C", &ProcessParams::C)
        .def_readonly("D", &ProcessParams::D)
        .def_readonly("q", &ProcessParams::q)
        .def("__repr__", [](const ProcessParams& p) {
            return params_to_json(p, -1);
        });
    py::class_<HarnessParams>(m, "HarnessParams")
        .def_readonly("eta", &HarnessParams::eta)
        .def_readonly("theta", &HarnessParams::theta)
        .def_readonly("sigma", &HarnessParams::sigma)
        .def_readonly("tau", &HarnessParams::tau)
        .def_readonly("gamma", &HarnessParams::gamma);
    py::class_<Interval>(m, "Interval")
        .def_readonly("lo", &Interval::lo)
        .def_readonly("hi", &Interval::hi)
        .def("contains", &Interval::contains);
    py::class_<TimeDomain>(m, "TimeDomain")
        .def_readonly("I", &TimeDomain::I)
        .def_readonly("J", &TimeDomain::J);
    m.def("validate", &validate, py::arg("A"), py::arg("B"), py::arg("C"),
          py::arg("D"), py::arg("q"));
    m.def("harness_params", &harness_params);
    m.def("time_domains", &time_domains);
    m.def("marginal",
          [](const ProcessParams& p, double t) { return marginal(p, t); },
          py::arg("params"), py::arg("t"));
    m.def("transition",
          [](const ProcessParams& p, double s, double t, double x) {
              return transition(p, s, t, x);
          },
          py::arg("params"), py::arg("s"), py::arg("t"), py::arg("x"));
    m.def("e_y", &e_y);
    m.def("var_y", &var_y);
    m.def("cov_y", &cov_y);
    m.def("cond_e_y", &cond_e_y);
    m.def("cond_var_y", &cond_var_y);
    m.def("bicond_e_y", &bicond_e_y);
    m.def("bicond_var_y", &bicond_var_y);
    m.def("mobius_h", &mobius_h);
    m.def("mobius_T", &mobius_T);
    m.def("z_from_y", &z_from_y);
    m.def("x_from_z", &x_from_z);
    m.def("q_meixner", &q_meixner, py::arg("theta"), py::arg("tau"),
          py::arg("gamma"));
    m.def("bi_poisson", &bi_poisson, py::arg("eta"), py::arg("theta"),
          py::arg("gamma"));
    m.def("free_harness", &free_harness, py::arg("eta"), py::arg("theta"),
          py::arg("sigma"), py::arg("tau"));
    m.def("purely_quadratic", &purely_quadratic, py::arg("sigma"),
          py::arg("tau"), py::arg("gamma"));

    // ---- martingale structure ----
    py::class_<IdentityReport>(m, "IdentityReport")
        .def_readonly("identity", &IdentityReport::identity)
        .def_readonly("n_max", &IdentityReport::n_max)
        .def_readonly("max_residual", &IdentityReport::max_residual)
        .def_readonly("argmax_n", &IdentityReport::argmax_n);
    m.def("r_poly", &r_poly, py::arg("n"), py::arg("x"), py::arg("t"),
          py::arg("params"));
    m.def("check_q_commutation", &check_q_commutation, py::arg("params"),
          py::arg("n_max"));
    m.def("check_matrix_identity", &check_matrix_identity, py::arg("params"),
          py::arg("s"), py::arg("t"), py::arg("u"), py::arg("n_max"));
    m.def("check_projection", &check_projection, py::arg("params"),
          py::arg("s"), py::arg("t"), py::arg("x"), py::arg("n_max"));
    m.def("q_n", &q_n, py::arg("n"), py::arg("y"), py::arg("x"), py::arg("t"),
          py::arg("s"), py::arg("params"));
    m.def("connection_coeffs", &connection_coeffs, py::arg("n"), py::arg("x"),
          py::arg("s"), py::arg("params"));

    // ---- simulation ----
    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("values", &Trajectory::values)
        .def_readonly("seed", &Trajectory::seed)
        .def_readonly("stream", &Trajectory::stream);
    m.def("sample_path",
          [](const ProcessParams& p, const std::vector<double>& grid,
             uint64_t seed, uint64_t stream) {
              return sample_path(p, grid, seed, stream);
          },
          py::arg("params"), py::arg("grid"), py::arg("seed"),
          py::arg("stream") = 0);
    py::class_<McCell>(m, "McCell")
        .def_readonly("g1", &McCell::g1)
        .def_readonly("g2", &McCell::g2)
        .def_readonly("count", &McCell::count)
        .def_readonly("var_hat", &McCell::var_hat)
        .def_readonly("var_se", &McCell::var_se)
        .def_readonly("var_target", &McCell::var_target);
    py::class_<McConditional>(m, "McConditional")
        .def_readonly("n_paths", &McConditional::n_paths)
        .def_readonly("coef_s", &McConditional::coef_s)
        .def_readonly("coef_u", &McConditional::coef_u)
        .def_readonly("se_s", &McConditional::se_s)
        .def_readonly("se_u", &McConditional::se_u)
        .def_readonly("target_s", &McConditional::target_s)
        .def_readonly("target_u", &McConditional::target_u)
        .def_readonly("cov_st", &McConditional::cov_st)
        .def_readonly("cov_se", &McConditional::cov_se)
        .def_readonly("cov_target", &McConditional::cov_target)
        .def_readonly("eta_hat", &McConditional::eta_hat)
        .def_readonly("eta_se", &McConditional::eta_se)
        .def_readonly("sigma_hat", &McConditional::sigma_hat)
        .def_readonly("sigma_se", &McConditional::sigma_se)
        .def_readonly("cells", &McConditional::cells);
    m.def("mc_conditional", &mc_conditional, py::arg("params"), py::arg("s"),
          py::arg("t"), py::arg("u"), py::arg("n_paths"), py::arg("seed"));

    py::class_<DiscreteProcessSpec>(m, "DiscreteProcessSpec")
        .def_readonly("A", &DiscreteProcessSpec::A)
        .def_readonly("B", &DiscreteProcessSpec::B)
        .def_readonly("C", &DiscreteProcessSpec::C)
        .def_readonly("q", &DiscreteProcessSpec::q)
        .def_readonly("N", &DiscreteProcessSpec::N)
        .def_readonly("D", &DiscreteProcessSpec::D);
    m.def("discrete_spec", &discrete_spec, py::arg("A"), py::arg("B"),
          py::arg("C"), py::arg("q"), py::arg("N"));
    py::class_<DiscreteProcess>(m, "DiscreteProcess")
        .def(py::init<const DiscreteProcessSpec&>())
        .def_property_readonly("spec", &DiscreteProcess::spec)
        .def("domain", &DiscreteProcess::domain)
        .def("y_k", &DiscreteProcess::y_k, py::arg("t"), py::arg("k"))
        .def("marginal_k", &DiscreteProcess::marginal_k, py::arg("t"),
             py::arg("k"))
        .def("transition_jk", &DiscreteProcess::transition_jk, py::arg("s"),
             py::arg("t"), py::arg("j"), py::arg("k"))
        .def("bicond", &DiscreteProcess::bicond, py::arg("i"), py::arg("j"),
             py::arg("k"), py::arg("s"), py::arg("t"), py::arg("u"))
        .def("sample_path", &DiscreteProcess::sample_path, py::arg("grid"),
             py::arg("seed"), py::arg("stream") = 0);

    py::class_<BridgeLaw>(m, "BridgeLaw")
        .def_readonly("deterministic", &BridgeLaw::deterministic)
        .def_readonly("value", &BridgeLaw::value)
        .def_readonly("atoms", &BridgeLaw::atoms);
    py::class_<BridgeEndpoints>(m, "BridgeEndpoints")
        .def_readonly("left_time", &BridgeEndpoints::left_time)
        .def_readonly("right_time", &BridgeEndpoints::right_time)
        .def_readonly("left", &BridgeEndpoints::left)
        .def_readonly("right", &BridgeEndpoints::right);
    m.def("bridge_endpoints", &bridge_endpoints, py::arg("params"));

    // ---- serialization ----
    m.def("params_to_json",
          [](const ProcessParams& p) { return params_to_json(p); },
          py::arg("params"));
    m.def("params_from_json", &params_from_json, py::arg("text"));
}
