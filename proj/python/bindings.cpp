// Python bindings: parameters travel as plain dicts (linear space), run
// records as (d1, d2, n, loss[, tag]) tuples, families as id strings.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "bootlaw/data_io.hpp"
#include "bootlaw/decision.hpp"
#include "bootlaw/errors.hpp"
#include "bootlaw/fit.hpp"
#include "bootlaw/forms.hpp"
#include "bootlaw/serialize.hpp"
#include "bootlaw/trend.hpp"

namespace py = pybind11;
using namespace bootlaw;

namespace {

ParamVector params_from_dict(const py::dict& d) {
    std::vector<std::pair<std::string, double>> kv;
    for (const auto& item : d) {
        kv.emplace_back(py::cast<std::string>(item.first), py::cast<double>(item.second));
    }
    return ParamVector::from_linear(kv);
}

py::dict params_to_dict(const ParamVector& params) {
    py::dict d;
    for (const auto& [name, value] : params.internal_values()) {
        (void)value;
        d[py::str(name)] = params.linear(name);
    }
    return d;
}

Dataset dataset_from_records(const py::sequence& records) {
    Dataset data;
    for (const auto& entry : records) {
        const auto row = py::cast<py::sequence>(entry);
        const auto len = py::len(row);
        if (len != 4 && len != 5) {
            throw param_error("each record must be (d1, d2, n, loss) or (d1, d2, n, loss, tag)");
        }
        RunRecord record;
        record.d1 = py::cast<double>(row[0]);
        record.d2 = py::cast<double>(row[1]);
        record.n = py::cast<double>(row[2]);
        record.loss = py::cast<double>(row[3]);
        if (len == 5) record.tag = py::cast<std::string>(row[4]);
        data.records.push_back(std::move(record));
    }
    return data;
}

py::list dataset_to_records(const Dataset& data) {
    py::list records;
    for (const auto& r : data.records) {
        records.append(py::make_tuple(r.d1, r.d2, r.n, r.loss, r.tag));
    }
    return records;
}

FitConfig make_config(double delta, std::size_t max_starts) {
    FitConfig config;
    config.huber_delta = delta;
    config.grid.max_starts = max_starts;
    return config;
}

py::dict fit_result_to_dict(const FitResult& result) {
    py::dict d;
    d["family"] = std::string(traits(result.family).id);
    d["params"] = params_to_dict(result.params);
    d["objective"] = result.objective;
    d["loo_rms"] = result.loo_rms ? py::object(py::float_(*result.loo_rms))
                                  : py::object(py::none());
    d["best_start"] = result.best_start;
    d["best_converged"] = result.best_converged;
    d["n_starts"] = result.starts.size();
    d["warnings"] = result.warnings;
    return d;
}

} // namespace

PYBIND11_MODULE(bootlaw, m) {
    m.doc() = "two-stage pretraining scaling laws: fitting, model selection, and "
              "token-budget decisions";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const io_error& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        } catch (const param_error& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const domain_error& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const error& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    m.def("families", [] {
        std::vector<std::string> ids;
        for (Family family : all_families) ids.emplace_back(traits(family).id);
        return ids;
    }, "ids of every supported functional form");

    m.def(
        "predict_loss",
        [](const std::string& family, const py::dict& params, double d1, double d2, double n) {
            return predict_loss(family_from_id(family), params_from_dict(params), {d1, d2, n});
        },
        py::arg("family"), py::arg("params"), py::arg("d1") = 1e8, py::arg("d2") = 1e8,
        py::arg("n") = 1e8, "evaluate a law at one (d1, d2, n) point");

    m.def(
        "log_predict",
        [](const std::string& family, const py::dict& params, double d1, double d2, double n) {
            const Family f = family_from_id(family);
            return log_predict_lse(f, params_from_dict(params), to_log_point(f, {d1, d2, n}));
        },
        py::arg("family"), py::arg("params"), py::arg("d1") = 1e8, py::arg("d2") = 1e8,
        py::arg("n") = 1e8, "ln loss via the overflow-safe log-sum-exp route");

    m.def(
        "effective_exponent",
        [](const py::dict& params, double d1) {
            const auto eff = effective_exponent(params_from_dict(params), d1);
            return py::make_tuple(eff.value, eff.saturated);
        },
        py::arg("params"), py::arg("d1"),
        "(alpha2 - alpha3 * ln d1, saturated_flag) at a first-stage budget");

    m.def(
        "fit",
        [](const std::string& family, const py::sequence& records, bool loo, double delta,
           std::size_t max_starts) {
            const Family f = family_from_id(family);
            const Dataset data = dataset_from_records(records);
            const FitConfig config = make_config(delta, max_starts);
            return fit_result_to_dict(loo ? fit_with_loo(f, data, config)
                                          : fit(f, data, config));
        },
        py::arg("family"), py::arg("records"), py::arg("loo") = false,
        py::arg("delta") = 1e-3, py::arg("max_starts") = 2000,
        "multistart Huber fit; set loo=True for exact leave-one-out RMS");

    m.def(
        "compare",
        [](const py::sequence& records, const std::vector<std::string>& families, double delta,
           std::size_t max_starts) {
            std::vector<Family> fams;
            for (const auto& id : families) fams.push_back(family_from_id(id));
            const auto rows = compare_forms(dataset_from_records(records), fams,
                                            make_config(delta, max_starts));
            py::list out;
            for (const auto& row : rows) {
                py::dict d;
                d["family"] = std::string(traits(row.family).id);
                d["ok"] = row.ok;
                d["free_params"] = row.free_params;
                if (row.ok) {
                    d["loo_rms"] = row.loo_rms;
                    d["objective"] = row.objective;
                    d["params"] = params_to_dict(row.params);
                } else {
                    d["error"] = row.error;
                }
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("records"), py::arg("families"), py::arg("delta") = 1e-3,
        py::arg("max_starts") = 2000,
        "rank candidate forms by leave-one-out RMS (ranked list of dicts)");

    m.def(
        "slice_trend",
        [](const py::sequence& records, const std::string& axis) {
            Dataset data = dataset_from_records(records);
            if (axis == "d2") {
                data = swap_d1_d2(data);
            } else if (axis != "d1") {
                throw param_error("axis must be 'd1' or 'd2', got '" + axis + "'");
            }
            const auto slices = slice_fit_by_d1(data);
            const auto lines = trend_lines(slices);
            py::list slice_rows;
            for (const auto& s : slices) {
                py::dict row;
                row["d1"] = s.d1;
                row["A"] = s.A;
                row["alpha"] = s.alpha;
                row["E"] = s.E;
                row["n_points"] = s.n_points;
                slice_rows.append(std::move(row));
            }
            py::dict out;
            out["slices"] = std::move(slice_rows);
            out["gamma"] = lines.gamma;
            out["e_prime"] = lines.e_prime;
            out["exponent_r2"] = lines.exponent_r2;
            out["a0"] = lines.a0;
            out["alpha1"] = lines.alpha1;
            out["factor_r2"] = lines.factor_r2;
            return out;
        },
        py::arg("records"), py::arg("axis") = "d1",
        "per-slice power laws plus the straight lines through them");

    m.def(
        "break_even",
        [](const py::dict& scratch, const py::dict& grown, double n, double lo, double hi) {
            const auto result =
                break_even(params_from_dict(scratch), params_from_dict(grown), n, lo, hi);
            py::dict d;
            d["n"] = result.n;
            d["d_star"] = result.d_star;
            d["residual"] = result.residual;
            d["crossings"] = result.crossings;
            return d;
        },
        py::arg("scratch"), py::arg("grown"), py::arg("n"), py::arg("lo") = 1e9,
        py::arg("hi") = 1e18,
        "token budget where from-scratch at 2n matches the grown model at n");

    m.def("break_even_analytic", &break_even_analytic, py::arg("n"),
          "closed-form approximation of the break-even budget");

    m.def(
        "catch_up",
        [](const py::dict& scratch, const py::dict& boot, double d1, double d2, double n) {
            return catch_up_tokens(params_from_dict(scratch), params_from_dict(boot), d1, d2,
                                   n);
        },
        py::arg("scratch"), py::arg("boot"), py::arg("d1"), py::arg("d2"), py::arg("n"),
        "from-scratch tokens needed to match the bootstrapped loss");

    m.def(
        "catch_up_sensitivity",
        [](const py::dict& scratch, const py::dict& boot, double d1, double d2, double n,
           double delta) {
            const auto rows = catch_up_sensitivity(params_from_dict(scratch),
                                                   params_from_dict(boot), d1, d2, n, delta);
            py::list out;
            for (const auto& row : rows) {
                py::dict d;
                d["alpha3"] = row.alpha3;
                d["reachable"] = row.reachable;
                d["d"] = row.reachable ? py::object(py::float_(row.d))
                                       : py::object(py::none());
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("scratch"), py::arg("boot"), py::arg("d1"), py::arg("d2"), py::arg("n"),
        py::arg("delta") = 5e-4, "catch-up tokens at alpha3 - delta, alpha3, alpha3 + delta");

    m.def(
        "optimal_allocation",
        [](const py::dict& params, double d1, double c2, const std::string& mode) {
            AllocationMode m_;
            if (mode == "growth") {
                m_ = AllocationMode::growth;
            } else if (mode == "cpt") {
                m_ = AllocationMode::cpt;
            } else {
                throw param_error("mode must be 'growth' or 'cpt', got '" + mode + "'");
            }
            const auto result = optimal_allocation(params_from_dict(params), d1, c2, m_);
            py::dict d;
            d["c2"] = result.c2;
            d["d2_opt"] = result.d2_opt;
            d["n_opt"] = result.n_opt;
            d["mode"] = mode;
            d["a"] = result.a;
            d["b"] = result.b;
            d["g_const"] = result.g_const;
            d["alpha_eff"] = result.alpha_eff;
            return d;
        },
        py::arg("params"), py::arg("d1"), py::arg("c2"), py::arg("mode") = "growth",
        "compute-optimal split of a second-stage budget");

    m.def("flops", &flops, py::arg("n"), py::arg("d"), "training compute estimate 6*n*d");

    m.def(
        "synth",
        [](const std::string& family, const py::dict& truth, const py::tuple& d1,
           const py::tuple& d2, const py::tuple& n, double sigma, double jitter,
           std::uint64_t seed, const std::string& tag) {
            auto to_axis = [](const py::tuple& t, const char* name) {
                if (py::len(t) != 3) {
                    throw param_error(std::string(name) + " axis must be (count, lo, hi)");
                }
                GridAxis axis;
                axis.count = py::cast<int>(t[0]);
                axis.lo = py::cast<double>(t[1]);
                axis.hi = py::cast<double>(t[2]);
                return axis;
            };
            SynthSpec spec;
            spec.family = family_from_id(family);
            spec.truth = params_from_dict(truth);
            spec.d1 = to_axis(d1, "d1");
            spec.d2 = to_axis(d2, "d2");
            spec.n = to_axis(n, "n");
            spec.noise_sigma = sigma;
            spec.jitter = jitter;
            spec.seed = seed;
            spec.tag = tag;
            return dataset_to_records(synth_dataset(spec));
        },
        py::arg("family"), py::arg("truth"), py::arg("d1") = py::make_tuple(1, 1e8, 1e8),
        py::arg("d2") = py::make_tuple(1, 1e8, 1e8), py::arg("n") = py::make_tuple(1, 1e8, 1e8),
        py::arg("sigma") = 0.0, py::arg("jitter") = 0.0, py::arg("seed") = 0,
        py::arg("tag") = "synth",
        "deterministic synthetic runs from known coefficients; axes are (count, lo, hi)");

    m.def(
        "load_runs", [](const std::string& path) { return dataset_to_records(load_runs(path)); },
        py::arg("path"), "load a runs CSV as (d1, d2, n, loss, tag) tuples");

    m.def(
        "save_runs",
        [](const py::sequence& records, const std::string& path) {
            save_runs(dataset_from_records(records), path);
        },
        py::arg("records"), py::arg("path"), "write records to a runs CSV");

    m.def(
        "load_params",
        [](const std::string& path) { return params_to_dict(load_params(path)); },
        py::arg("path"), "load a params JSON file as a dict (linear space)");

    m.def(
        "save_params",
        [](const py::dict& params, const std::string& path) {
            save_params(params_from_dict(params), path);
        },
        py::arg("params"), py::arg("path"), "write a params dict as JSON (linear space)");
}
