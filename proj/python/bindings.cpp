#include "wits/bench.hpp"
#include "wits/config.hpp"
#include "wits/data.hpp"
#include "wits/falkon.hpp"
#include "wits/hypotest.hpp"
#include "wits/kernel.hpp"
#include "wits/mmd_stats.hpp"
#include "wits/modelsel.hpp"
#include "wits/witness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wits;

namespace {

// numpy arrays arrive in any layout; the library wants row-major doubles.
using SampleIn = Eigen::Ref<const Sample>;

py::dict outcome_dict(const TestOutcome& o) {
    py::dict d;
    d["method"] = o.method;
    d["statistic"] = o.statistic;
    d["p_value"] = o.p_value ? py::cast(*o.p_value) : py::none();
    d["threshold"] = o.threshold ? py::cast(*o.threshold) : py::none();
    d["reject"] = o.reject;
    d["alpha"] = o.alpha;
    d["num_permutations"] = o.num_permutations ? py::cast(*o.num_permutations) : py::none();
    d["bandwidth"] = o.bandwidth ? py::cast(*o.bandwidth) : py::none();
    d["lambda"] = o.lambda ? py::cast(*o.lambda) : py::none();
    return d;
}

PermutationOptions perm_options(int b, std::uint64_t seed, bool plus_one) {
    PermutationOptions opt;
    opt.num_permutations = b;
    opt.seed = seed;
    opt.plus_one = plus_one;
    return opt;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kernel two-sample tests with learned witness functions";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<Kernel>(m, "Kernel")
        .def_static("gaussian", &Kernel::gaussian, py::arg("bandwidth"))
        .def_static("linear", &Kernel::linear)
        .def("scaled", &Kernel::scaled, py::arg("factor"))
        .def_readonly("bandwidth", &Kernel::bandwidth)
        .def_readonly("scale", &Kernel::scale)
        .def("__call__", [](const Kernel& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
            return eval_kernel(k, x.transpose(), y.transpose());
        })
        .def("__repr__", [](const Kernel& k) {
            if (k.family == KernelFamily::Linear) return std::string("Kernel.linear()");
            return "Kernel.gaussian(" + std::to_string(k.bandwidth) + ")";
        });

    m.def("gram_matrix", [](const Kernel& k, SampleIn a) { return gram_matrix(k, Sample(a)); });
    m.def("gram_matrix", [](const Kernel& k, SampleIn a, SampleIn b) { return gram_matrix(k, Sample(a), Sample(b)); });
    m.def("median_heuristic_bandwidth", [](SampleIn z) { return median_heuristic_bandwidth(Sample(z)); });

    m.def("mmd_v_statistic", [](const Kernel& k, SampleIn x, SampleIn y) { return mmd_v_statistic(k, Sample(x), Sample(y)); });
    m.def("mmd_u_statistic", [](const Kernel& k, SampleIn x, SampleIn y) { return mmd_u_statistic(k, Sample(x), Sample(y)); });
    m.def("sigma_h1_squared", [](const Kernel& k, SampleIn x, SampleIn y) { return sigma_h1_squared(k, Sample(x), Sample(y)); });
    m.def("j_criterion", [](const Kernel& k, SampleIn x, SampleIn y, double eps) { return j_criterion(k, Sample(x), Sample(y), eps); },
          py::arg("k"), py::arg("x"), py::arg("y"), py::arg("eps") = 1e-8);

    py::class_<WitnessModel>(m, "WitnessModel")
        .def_property_readonly("basis", &WitnessModel::basis)
        .def_property_readonly("coefficients", &WitnessModel::coefficients)
        .def_property_readonly("kernel", &WitnessModel::kernel)
        .def_property_readonly("orientation", &WitnessModel::orientation)
        .def("__call__", [](const WitnessModel& h, SampleIn z) { return evaluate_witness(h, Sample(z)); });

    m.def("mmd_witness", [](const Kernel& k, SampleIn x, SampleIn y) { return mmd_witness(k, Sample(x), Sample(y)); });
    m.def("kfda_witness_exact",
          [](const Kernel& k, double lambda, SampleIn x, SampleIn y, std::optional<double> c) {
              return kfda_witness_exact(k, lambda, Sample(x), Sample(y), c);
          },
          py::arg("k"), py::arg("lam"), py::arg("x"), py::arg("y"), py::arg("c") = py::none());
    m.def("kfda_witness_nystrom",
          [](const Kernel& k, SampleIn x, SampleIn y, Index num_centers, double lambda, int cg_iterations,
             std::uint64_t seed, bool pooled) {
              FalkonConfig cfg;
              cfg.num_centers = num_centers;
              cfg.lambda = lambda;
              cfg.cg_iterations = cg_iterations;
              cfg.seed = seed;
              if (pooled) {
                  cfg.centering = FalkonCentering::Pooled;
                  cfg.c = default_proportion(x.rows(), y.rows());
              }
              return kfda_witness_nystrom(k, Sample(x), Sample(y), cfg);
          },
          py::arg("k"), py::arg("x"), py::arg("y"), py::arg("num_centers"), py::arg("lam") = 1e-2,
          py::arg("cg_iterations") = 50, py::arg("seed") = 0, py::arg("pooled_centering") = true);

    m.def("standardized_tau", [](const WitnessModel& h, SampleIn x, SampleIn y) {
        return standardized_tau(h, Sample(x), Sample(y));
    });
    m.def("asymptotic_witness_test",
          [](const WitnessModel& h, SampleIn x, SampleIn y, double alpha) {
              return outcome_dict(asymptotic_witness_test(h, Sample(x), Sample(y), alpha));
          },
          py::arg("h"), py::arg("x"), py::arg("y"), py::arg("alpha") = 0.05);
    m.def("permutation_witness_test",
          [](const WitnessModel& h, SampleIn x, SampleIn y, double alpha, int b, std::uint64_t seed, bool plus_one) {
              return outcome_dict(permutation_witness_test(h, Sample(x), Sample(y), alpha, perm_options(b, seed, plus_one)));
          },
          py::arg("h"), py::arg("x"), py::arg("y"), py::arg("alpha") = 0.05, py::arg("permutations") = 200,
          py::arg("seed") = 0, py::arg("plus_one") = false);
    m.def("mmd_boot_test",
          [](const Kernel& k, SampleIn x, SampleIn y, double alpha, int b, std::uint64_t seed, bool plus_one) {
              return outcome_dict(mmd_boot_test(k, Sample(x), Sample(y), alpha, perm_options(b, seed, plus_one)));
          },
          py::arg("k"), py::arg("x"), py::arg("y"), py::arg("alpha") = 0.05, py::arg("permutations") = 200,
          py::arg("seed") = 0, py::arg("plus_one") = false);
    m.def("kfda_boot_test",
          [](const Kernel& k, double lambda, SampleIn x, SampleIn y, double alpha, int b, std::uint64_t seed,
             bool plus_one) {
              return outcome_dict(
                  kfda_boot_test(k, lambda, Sample(x), Sample(y), alpha, perm_options(b, seed, plus_one)));
          },
          py::arg("k"), py::arg("lam"), py::arg("x"), py::arg("y"), py::arg("alpha") = 0.05,
          py::arg("permutations") = 200, py::arg("seed") = 0, py::arg("plus_one") = false);

    m.def("blobs_rotated",
          [](Index n, Index mm, double theta, std::uint64_t seed) {
              TwoSample ts = blobs_rotated(n, mm, theta, seed);
              return py::make_tuple(ts.x, ts.y);
          },
          py::arg("n"), py::arg("m"), py::arg("theta"), py::arg("seed") = 0);
    m.def("blobs_liu",
          [](Index n, Index mm, std::uint64_t seed, bool null_mode) {
              TwoSample ts = blobs_liu(n, mm, seed, null_mode);
              return py::make_tuple(ts.x, ts.y);
          },
          py::arg("n"), py::arg("m"), py::arg("seed") = 0, py::arg("null_mode") = false);

    m.def("grid_search_cv",
          [](SampleIn x, SampleIn y, int folds, std::uint64_t seed) {
              const CvReport r = grid_search_cv(ParamGrid::defaults(), Sample(x), Sample(y), folds, seed);
              py::dict d;
              d["bandwidth"] = r.kernel.bandwidth;
              d["lambda"] = r.lambda;
              d["score"] = r.best_score;
              return d;
          },
          py::arg("x"), py::arg("y"), py::arg("folds") = 5, py::arg("seed") = 0);

    m.def("run_power",
          [](const std::string& config_text) {
              const RunSpec spec = parse_run_spec(config_text);
              PowerEstimate p;
              {
                  py::gil_scoped_release release;
                  p = estimate_rejection_rate(spec.experiment);
              }
              py::dict d;
              d["rejection_rate"] = p.rejection_rate;
              d["std_err"] = p.std_err;
              d["repetitions"] = p.repetitions;
              d["rejections"] = p.rejections;
              return d;
          },
          py::arg("config_text"), "Rejection rate for an INI run configuration given as text.");
}
