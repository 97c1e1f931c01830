#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfunc/arith.hpp"
#include "mfunc/charfun.hpp"
#include "mfunc/error.hpp"
#include "mfunc/parallel.hpp"
#include "mfunc/pipeline.hpp"
#include "mfunc/satotate.hpp"

namespace py = pybind11;
using namespace mfunc;

namespace {

pipeline::RunConfig config_from(const std::string& json) {
    auto c = pipeline::config_from_json(io::Json::parse(json));
    pipeline::validate(c);
    return c;
}

py::array_t<double> vector_array(const std::vector<double>& values) {
    py::array_t<double> a(std::vector<py::ssize_t>{static_cast<py::ssize_t>(values.size())});
    std::copy(values.begin(), values.end(), a.mutable_data());
    return a;
}

py::array_t<double> grid_array(const std::vector<double>& values, std::size_t nx, std::size_t ny) {
    py::array_t<double> a({nx, ny});
    std::copy(values.begin(), values.end(), a.mutable_data());
    return a;
}

py::dict density_dict(const density::DensityGrid& d) {
    const auto& g = d.geometry;
    std::vector<double> xs(g.nx), ys(g.ny);
    for (std::size_t i = 0; i < g.nx; ++i) xs[i] = g.x(i);
    for (std::size_t j = 0; j < g.ny; ++j) ys[j] = g.y(j);
    py::dict out;
    out["meta"] = density::sidecar(d).dump();
    out["x"] = vector_array(xs);
    out["y"] = vector_array(ys);
    out["values"] = grid_array(d.values, g.nx, g.ny);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of the mfunc package";

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
            exc.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    m.def("version", [] { return std::string(io::kVersion); });
    m.def("set_threads", &set_thread_count, py::arg("count"));

    m.def("primes_upto", [](std::uint64_t limit) { return arith::sieve_primes(limit).primes; }, py::arg("limit"));
    m.def(
        "tau",
        [](std::size_t bound) {
            const auto t = arith::tau_coefficients(bound);
            py::list out;
            for (const auto& v : t) out.append(py::int_(py::str(v.str())));
            return out;
        },
        py::arg("bound"), "tau(1..bound) as Python ints");

    m.def("st_ratio", py::overload_cast<double, double>(&satotate::st_ratio), py::arg("a"), py::arg("b"));

    m.def(
        "local_charfn",
        [](const std::string& config_json, std::size_t n, std::complex<double> w) {
            const auto c = config_from(config_json);
            const auto spec = pipeline::load_spec(c);
            return charfun::local_charfn(euler::LocalCurve(spec, n, c.sigma), w);
        },
        py::arg("config"), py::arg("n"), py::arg("w"));

    m.def(
        "density",
        [](const std::string& config_json) {
            const auto c = config_from(config_json);
            pipeline::DensityRun run;
            {
                py::gil_scoped_release release;
                run = pipeline::run_density(c, false);
            }
            auto out = density_dict(run.density);
            out["tail_bound"] = run.charfn.tail_bound;
            return out;
        },
        py::arg("config"));

    m.def(
        "compare",
        [](const std::string& config_json) {
            const auto c = config_from(config_json);
            pipeline::CompareRun run;
            {
                py::gil_scoped_release release;
                run = pipeline::run_compare(c, false);
            }
            auto report = empirical::to_json(run.report);
            report["passed"] = run.passed;
            return report.dump();
        },
        py::arg("config"));

    m.def(
        "satotate",
        [](int gamma, double xi, std::uint64_t x, std::optional<double> epsilon, std::optional<std::string> cache_dir) {
            pipeline::SatoTateArgs a;
            a.gamma = gamma;
            a.xi = xi;
            a.x = x;
            a.epsilon = epsilon;
            if (cache_dir) a.cache_dir = *cache_dir;
            return pipeline::run_satotate(a).dump();
        },
        py::arg("gamma"), py::arg("xi"), py::arg("x"), py::arg("epsilon") = py::none(),
        py::arg("cache_dir") = py::none());
}
