#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mlab/cli.hpp"
#include "mlab/dirichlet.hpp"
#include "mlab/errors.hpp"
#include "mlab/h_analysis.hpp"
#include "mlab/identities.hpp"
#include "mlab/sieve.hpp"
#include "mlab/summatory.hpp"

namespace py = pybind11;
using namespace mlab;

namespace {

// Sieve plus optional convolution table, with prefix sums over both.
class Workbench {
 public:
  Workbench(u64 n_max, u64 conv_cap) {
    py::gil_scoped_release release;
    auto sieve = std::make_shared<SieveTable>(sieve_table(n_max));
    std::shared_ptr<const ArithTable> conv;
    if (conv_cap > 0) {
      conv = std::make_shared<ArithTable>(build_arith_table(*sieve, conv_cap, Lambda2Method::both));
    }
    sums_ = std::make_shared<PrefixSums>(sieve, conv);
  }

  const PrefixSums& sums() const { return *sums_; }
  std::shared_ptr<const PrefixSums> shared() const { return sums_; }

 private:
  std::shared_ptr<const PrefixSums> sums_;
};

ProfileKind to_kind(const std::string& s) {
  if (s == "smoothed") return ProfileKind::smoothed;
  if (s == "mertens") return ProfileKind::mertens;
  throw PreconditionError("kind must be 'smoothed' or 'mertens'");
}

py::dict constants_dict(const ConstantEstimates& c) {
  py::dict d;
  d["alpha_hat"] = c.alpha_hat;
  d["ell_hat"] = c.ell_hat;
  d["L_hat"] = c.L_hat;
  d["m_hat"] = c.m_hat;
  d["m_hat_tail"] = c.m_hat_tail;
  d["M_hat"] = c.M_hat;
  d["iota_hat"] = c.iota_hat;
  d["kappa"] = c.kappa;
  d["epsilon"] = c.epsilon;
  d["h_param"] = c.h_param;
  d["kappa_applicable"] = c.kappa_applicable;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mertens-function verification workbench";

  py::register_exception<RangeError>(m, "RangeError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<CapabilityError>(m, "CapabilityError", PyExc_RuntimeError);
  py::register_exception<CrossCheckError>(m, "CrossCheckError", PyExc_RuntimeError);

  m.def("sieve", [](u64 n_max) {
    SieveTable t;
    {
      py::gil_scoped_release release;
      t = sieve_table(n_max);
    }
    py::array_t<std::int8_t> mu(static_cast<py::ssize_t>(t.mu.size()), t.mu.data());
    py::array_t<double> lambda(static_cast<py::ssize_t>(t.lambda.size()), t.lambda.data());
    return py::make_tuple(mu, lambda);
  }, py::arg("n_max"), "mu and Lambda on [0, n_max] (index 0 unused).");

  m.def("lambda2", [](u64 n_max, const std::string& method) {
    Lambda2Method lm = method == "selberg-form" ? Lambda2Method::selberg
                     : method == "mobius-form"  ? Lambda2Method::mobius
                                                : Lambda2Method::both;
    const ArithTable a = build_arith_table(n_max, lm);
    return py::array_t<double>(static_cast<py::ssize_t>(a.lambda2.size()), a.lambda2.data());
  }, py::arg("n_max"), py::arg("method") = "both");

  py::class_<Workbench>(m, "Workbench")
      .def(py::init<u64, u64>(), py::arg("n_max"), py::arg("conv_cap") = 0)
      .def_property_readonly("n_max", [](const Workbench& w) { return w.sums().n_max(); })
      .def_property_readonly("conv_cap", [](const Workbench& w) { return w.sums().conv_cap(); })
      .def("mertens", [](const Workbench& w, double x) { return w.sums().mertens(x); })
      .def("psi", [](const Workbench& w, double x) { return w.sums().psi(x); })
      .def("big_f", [](const Workbench& w, double x) { return w.sums().big_f(x); })
      .def("big_f_integral", [](const Workbench& w, double x) { return w.sums().big_f_integral(x); })
      .def("h_smoothed", [](const Workbench& w, double y) { return w.sums().h_smoothed(y); })
      .def("h_mertens", [](const Workbench& w, double y) { return w.sums().h_mertens(y); })
      .def("g_weighted", [](const Workbench& w, double x) { return w.sums().g_weighted(x); })
      .def("sum_lambda2", [](const Workbench& w, double x) { return w.sums().sum_lambda2(x); })
      .def("f_sum_residual", [](const Workbench& w, double x) { return check_f_sum_identity(w.sums(), x).residual; })
      .def("floor_weighted_residual",
           [](const Workbench& w, double x) { return floor_weighted_mu_sum(w.sums(), x).residual; })
      .def("tatuzawa_iseki",
           [](const Workbench& w, double x, const std::string& fn) {
             return check_tatuzawa_iseki(w.sums(), x, test_function_by_name(fn, w.sums())).residual;
           },
           py::arg("x"), py::arg("function") = "one")
      .def("lemma1_smoothed", [](const Workbench& w, double x) { return check_lemma1_smoothed(w.sums(), x); })
      .def("remainder_series",
           [](const Workbench& w, const std::string& kind, const std::vector<double>& xs) {
             const RemainderSeries s = remainder_series(w.sums(), parse_kind(kind), xs);
             py::list samples;
             for (const auto& p : s.samples) samples.append(py::make_tuple(p.x, p.raw, p.normalized));
             py::dict d;
             d["kind"] = std::string(kind_name(s.kind));
             d["normalization"] = s.normalization;
             d["sup_normalized"] = s.sup_normalized;
             d["argmax_x"] = s.argmax_x;
             d["samples"] = samples;
             return d;
           })
      .def("profile",
           [](const Workbench& w, const std::string& kind, u64 y_max, int spd) {
             HProfile p = build_profile(w.shared(), to_kind(kind), y_max, spd);
             py::dict d;
             d["x"] = p.x_samples;
             d["h"] = p.h_values;
             d["cum_abs"] = p.cumulative_abs_integral;
             std::vector<double> zs;
             for (const auto& z : p.zeros) zs.push_back(z.x);
             d["zeros"] = zs;
             d["constants"] = p.empty() ? py::dict() : constants_dict(p.constants);
             return d;
           },
           py::arg("kind") = "smoothed", py::arg("y_max"), py::arg("samples_per_decade") = 20);

  m.def("lambda_iteration", [](double lambda, int n_steps, double alpha) {
    const auto it = lambda_iteration(lambda, n_steps, alpha);
    std::vector<double> ks;
    for (const auto& s : it.steps) ks.push_back(s.lambda_k);
    return py::make_tuple(ks, it.limit);
  }, py::arg("lam"), py::arg("n_steps"), py::arg("alpha") = 1.0);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the mlab command line; returns (status, stdout, stderr).");

  m.attr("__version__") = MLAB_VERSION;
}
