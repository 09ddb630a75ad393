#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sdbm/constructor.hpp"
#include "sdbm/data.hpp"
#include "sdbm/evaluation.hpp"
#include "sdbm/free_energy.hpp"
#include "sdbm/mixtures.hpp"
#include "sdbm/model.hpp"
#include "sdbm/model_io.hpp"
#include "sdbm/threads.hpp"
#include "sdbm/training.hpp"

namespace py = pybind11;
using namespace sdbm;

namespace {

// Vectors and matrices cross the boundary as (nested) sequences of floats
// rather than numpy buffers: the conversion goes through the Python sequence
// protocol only, so it works against any numpy ABI. Matrices are row-major
// lists of rows.
Vec to_vec(const std::vector<double>& x) {
    return Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()));
}

std::vector<double> from_vec(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Mat to_mat(const std::vector<std::vector<double>>& rows) {
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != c)
            throw std::invalid_argument("rows must all have the same length");
        m.row(i) = Eigen::Map<const Vec>(rows[i].data(), c).transpose();
    }
    return m;
}

std::vector<std::vector<double>> from_mat(const Mat& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows[static_cast<std::size_t>(i)].assign(m.cols(), 0.0);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    }
    return rows;
}

py::dict region_report_dict(const RegionReport& r, const NetworkSpec& spec) {
    py::dict d;
    d["count"] = r.count;
    d["method"] = r.method;
    d["exact"] = r.exact;
    py::list active;
    for (const ActiveRegion& a : r.active) {
        py::dict e;
        e["config"] = config_bitstring(spec, a.config);
        e["witness"] = from_vec(a.witness);
        e["gradient"] = from_vec(a.gradient);
        e["intercept"] = a.intercept;
        active.append(e);
    }
    d["active"] = active;
    return d;
}

py::dict bounds_dict(const FreeEnergyBundle& b, const NetworkSpec& spec) {
    py::dict d;
    d["F"] = b.exact;
    d["F_hat"] = b.hardmin;
    d["F_mf"] = b.meanfield;
    d["E_res"] = b.residual;
    d["lower"] = b.hardmin - std::exp(b.hardmin - b.residual);
    d["argmin_config"] = config_bitstring(spec, b.argmin_config);
    d["ok"] = b.bounds_ok;
    return d;
}

LayerState state_from_lists(const Model& m, const std::vector<std::vector<double>>& layers) {
    LayerState s;
    s.reserve(layers.size());
    for (const auto& layer : layers) s.push_back(to_vec(layer));
    validate_state(m.spec(), s);
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "layered Boltzmann machines: region counting, bounds, training";

    py::class_<NetworkSpec>(mod, "NetworkSpec")
        .def_static("rbm", &NetworkSpec::rbm)
        .def_static("dbm", &NetworkSpec::dbm)
        .def_static("sdbm", &NetworkSpec::sdbm)
        .def_readonly("layer_sizes", &NetworkSpec::layer_sizes)
        .def_property_readonly("num_hidden", &NetworkSpec::num_hidden)
        .def_property_readonly("num_visible", &NetworkSpec::num_visible)
        .def("__repr__", [](const NetworkSpec& s) {
            std::ostringstream os;
            os << "NetworkSpec([";
            for (std::size_t i = 0; i < s.layer_sizes.size(); ++i)
                os << (i ? ", " : "") << s.layer_sizes[i];
            os << "], pairs=" << s.mask.size() << ")";
            return os.str();
        });

    py::class_<Model>(mod, "Model")
        .def_static("zeros", &Model::zeros)
        .def_static("gaussian",
                    [](const NetworkSpec& spec, double sigma, std::uint64_t seed) {
                        Rng rng(seed);
                        return Model::gaussian(spec, sigma, rng);
                    },
                    py::arg("spec"), py::arg("sigma"), py::arg("seed") = 0)
        .def_property_readonly("spec", &Model::spec)
        .def("energy",
             [](const Model& m, const std::vector<std::vector<double>>& layers) {
                 return m.energy(state_from_lists(m, layers));
             })
        .def("rescaled", &Model::rescaled)
        .def("uncentered_equivalent", &Model::uncentered_equivalent)
        .def("save",
             [](const Model& m, const std::string& path) { save_model(m, path); })
        .def_static("load", [](const std::string& path) { return load_model(path); });

    mod.def("set_num_threads", &set_num_threads);

    mod.def("gbm_model", py::overload_cast<int>(&gbm_model), py::arg("depth"),
            "single-visible-unit chain model of the given depth");
    mod.def("bundle_sdbm", py::overload_cast<int, int>(&bundle_sdbm),
            py::arg("units_per_layer"), py::arg("num_hidden_layers"));
    mod.def("tangency_check", [](int depth, double tol) {
        const auto cert = tangency_check(soft_deep_params(depth), depth, tol);
        py::list entries;
        for (const auto& e : cert.entries) {
            py::dict d;
            d["slope"] = e.slope;
            d["intercept"] = e.intercept;
            d["tangency_point"] = e.tangency_point;
            d["residual"] = e.residual;
            d["ok"] = e.ok;
            entries.append(d);
        }
        return py::make_tuple(cert.ok, entries);
    }, py::arg("depth"), py::arg("tol") = 1e-9);

    mod.def("exact_free_energy", [](const Model& m, const std::vector<double>& v) {
        return exact_free_energy(m, to_vec(v));
    });
    mod.def("hardmin_free_energy", [](const Model& m, const std::vector<double>& v) {
        const auto [f, h] = hardmin_free_energy(m, to_vec(v));
        return py::make_tuple(f, config_bitstring(m.spec(), h));
    });
    mod.def("meanfield_free_energy", [](const Model& m, const std::vector<double>& v) {
        return meanfield_free_energy(m, to_vec(v)).value;
    });
    mod.def("check_bounds", [](const Model& m, const std::vector<double>& v) {
        return bounds_dict(check_bounds(m, to_vec(v)), m.spec());
    });

    mod.def("count_effective_mixtures",
            [](const Model& m, const std::string& method, std::uint64_t seed) {
                CountOptions opt;
                opt.seed = seed;
                if (method == "auto")
                    opt.method = CountMethod::automatic;
                else if (method == "envelope")
                    opt.method = CountMethod::envelope_1d;
                else if (method == "lp")
                    opt.method = CountMethod::lp_exact;
                else if (method == "grid")
                    opt.method = CountMethod::grid_estimate;
                else
                    throw std::invalid_argument("method must be auto|envelope|lp|grid");
                return region_report_dict(count_effective_mixtures(m, opt), m.spec());
            },
            py::arg("model"), py::arg("method") = "auto", py::arg("seed") = 0);
    mod.def("rbm_region_bound", [](int n_vis, int n_hid) {
        return rbm_region_formula(n_vis, n_hid).str();
    });

    mod.def("exact_log_z", [](const Model& m) { return exact_log_z(m); });
    mod.def("ais_log_z",
            [](const Model& m, int betas, int runs, std::uint64_t seed) {
                const auto r = ais_log_z(m, AnnealingSchedule::uniform(betas, runs), seed);
                py::dict d;
                d["log_z"] = r.log_z;
                d["ci3"] = py::make_tuple(r.ci3.first, r.ci3.second);
                d["num_runs"] = r.num_runs;
                d["num_betas"] = r.num_betas;
                return d;
            },
            py::arg("model"), py::arg("betas") = 1000, py::arg("runs") = 100,
            py::arg("seed") = 0);

    mod.def("train",
            [](const Model& init, const std::vector<std::vector<double>>& examples,
               double lr, long updates, int batch,
               double reg, double eta, double center_rate, std::uint64_t seed,
               long log_interval) {
                TrainConfig cfg;
                cfg.initial_lr = lr;
                cfg.total_updates = updates;
                cfg.batch_size = batch;
                cfg.seed = seed;
                cfg.log_interval = log_interval;
                if (reg > 0.0) cfg.reg = RegularizationConfig{eta, reg};
                if (center_rate > 0.0) cfg.centering = CenteringConfig{center_rate};
                const TrainResult res = train(init, to_mat(examples), cfg);
                py::list log;
                for (const auto& e : res.log) {
                    py::dict d;
                    d["update"] = e.update;
                    d["lr"] = e.lr;
                    d["grad_norm"] = e.grad_norm;
                    d["reconstruction_error"] = e.reconstruction_error;
                    if (e.exact_train_ll) d["exact_train_ll"] = *e.exact_train_ll;
                    log.append(d);
                }
                return py::make_tuple(res.model, log);
            },
            py::arg("init"), py::arg("examples"), py::arg("lr") = 0.01,
            py::arg("updates") = 1000, py::arg("batch") = 100, py::arg("reg") = 0.0,
            py::arg("eta") = 1.0, py::arg("center_rate") = 0.0, py::arg("seed") = 0,
            py::arg("log_interval") = 0);

    mod.def("bars_and_stripes", [](int width, int height) {
        return from_mat(bars_and_stripes(width, height));
    });
    mod.def("parity_patterns", [](int n) { return from_mat(parity_patterns(n)); });
    mod.def("independent_bernoulli",
            [](const std::vector<double>& probs, long num_examples, std::uint64_t seed) {
                return from_mat(independent_bernoulli(to_vec(probs), num_examples, seed));
            });
    mod.def("bernoulli_baseline_ll", [](const std::vector<std::vector<double>>& examples) {
        return bernoulli_baseline_ll(to_mat(examples));
    });
}
