#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "latticefibers/assembly.hpp"
#include "latticefibers/birman_schwinger.hpp"
#include "latticefibers/dispersion.hpp"
#include "latticefibers/fiber.hpp"
#include "latticefibers/potential.hpp"
#include "latticefibers/spectral.hpp"
#include "latticefibers/svg.hpp"

namespace latfib {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

struct ExperimentConfig {
    std::string mode;
    MassPair masses{1.0, 1.0};
    int dimension = 1;
    Potential potential{1};
    std::vector<QuasiMomentum> k_points;
    std::vector<std::int64_t> radii;
    std::vector<double> deltas;
    std::optional<double> z;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    Json echo;

    static ExperimentConfig parse(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static ExperimentConfig load(const std::filesystem::path& file);
};

inline ExperimentConfig ExperimentConfig::parse(const nlohmann::json& j,
                                                const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    try {
        cfg.mode = j.at("mode").get<std::string>();
        static const char* kModes[] = {"band", "spectrum", "scan", "dichotomy", "bs-count", "convergence"};
        bool known = false;
        for (const char* m : kModes) known = known || cfg.mode == m;
        if (!known) throw std::invalid_argument("unknown mode '" + cfg.mode + "'");

        const auto& m = j.at("masses");
        cfg.masses = MassPair(m.at(0).get<double>(), m.at(1).get<double>());
        cfg.dimension = j.at("dimension").get<int>();
        if (cfg.dimension < 1) throw std::invalid_argument("dimension must be >= 1");

        if (j.contains("potential")) {
            const auto& p = j.at("potential");
            if (p.is_string()) {
                std::ifstream f(base_dir / p.get<std::string>());
                if (!f) throw std::invalid_argument("cannot open potential file " + p.get<std::string>());
                cfg.potential = potential_from_json(nlohmann::json::parse(f));
            } else {
                cfg.potential = potential_from_json(p);
            }
        } else {
            cfg.potential = Potential(cfg.dimension);
        }
        if (cfg.potential.dim() != cfg.dimension) {
            throw std::invalid_argument("potential dimension does not match config dimension");
        }

        const auto& kspec = j.at("k");
        if (kspec.contains("point")) {
            cfg.k_points.emplace_back(kspec.at("point").get<std::vector<double>>());
        } else if (kspec.contains("points")) {
            for (const auto& p : kspec.at("points")) {
                cfg.k_points.emplace_back(p.get<std::vector<double>>());
            }
        } else if (kspec.contains("grid")) {
            const auto n = kspec.at("grid").at("points_per_axis").get<std::int64_t>();
            if (n < 1) throw std::invalid_argument("grid points_per_axis must be >= 1");
            // k_m = -pi + 2 pi m / n per axis, wrapped into (-pi, pi]; the
            // m = 0 point is exactly pi, so the boundary set is always reachable.
            std::int64_t total = 1;
            for (int dd = 0; dd < cfg.dimension; ++dd) total *= n;
            for (std::int64_t idx = 0; idx < total; ++idx) {
                std::vector<double> comps(static_cast<std::size_t>(cfg.dimension));
                std::int64_t rem = idx;
                for (int dd = cfg.dimension - 1; dd >= 0; --dd) {
                    comps[static_cast<std::size_t>(dd)] =
                        -kPi + 2.0 * kPi * static_cast<double>(rem % n) / static_cast<double>(n);
                    rem /= n;
                }
                cfg.k_points.emplace_back(std::move(comps));
            }
        } else {
            throw std::invalid_argument("k must contain 'point', 'points' or 'grid'");
        }
        for (const auto& k : cfg.k_points) k.check_dim(cfg.dimension);

        cfg.radii = j.value("radii", std::vector<std::int64_t>{20});
        if (!std::is_sorted(cfg.radii.begin(), cfg.radii.end()) || cfg.radii.empty()) {
            throw std::invalid_argument("radii must be nonempty and increasing");
        }
        cfg.deltas = j.value("deltas", std::vector<double>{1e-8});
        for (double d : cfg.deltas) {
            if (!(d > 0.0)) throw std::invalid_argument("deltas must be positive");
        }
        if (j.contains("z")) cfg.z = j.at("z").get<double>();
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.output_dir = j.value("output_dir", std::string("out"));
        cfg.echo = Json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config error: ") + e.what());
    }
    return cfg;
}

inline ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
    std::ifstream f(file);
    if (!f) throw std::invalid_argument("cannot open config " + file.string());
    return parse(nlohmann::json::parse(f), file.parent_path());
}

struct RunOptions {
    int jobs = 1;
    bool stable_output = false;
    std::optional<std::string> out_dir;
};

inline int effective_jobs(int requested) {
    int jobs = std::max(1, requested);
    if (const char* cap = std::getenv("LATTICEFIBERS_THREADS")) {
        const int c = std::atoi(cap);
        if (c > 0) jobs = std::min(jobs, c);
    }
    return jobs;
}

/// Runs fn(i) for i in [0, n) on `jobs` workers. Task isolation: exceptions
/// are captured per index and returned as messages.
inline std::vector<std::string> parallel_for(std::int64_t n, int jobs,
                                             const std::function<void(std::int64_t)>& fn) {
    std::vector<std::string> errors(static_cast<std::size_t>(n));
    std::atomic<std::int64_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(i)] = e.what();
            }
        }
    };
    jobs = std::min<std::int64_t>(effective_jobs(jobs), std::max<std::int64_t>(n, 1));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return errors;
}

namespace detail {

inline Json spectrum_to_json(const SpectrumResult& r) {
    Json j;
    j["band_min"] = r.band.band_min;
    j["band_max"] = r.band.band_max;
    j["ratio"] = r.band.ratio;
    j["margin"] = r.margin;
    j["n_below"] = r.n_below;
    j["n_above"] = r.n_above;
    j["below"] = r.below;
    j["above"] = r.above;
    j["complete_spectrum"] = r.complete_spectrum;
    return j;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
}

inline std::string csv_num(double v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
}

}  // namespace detail

/// Executes the configured mode over the k set; writes report.json,
/// tables/*.csv and plots/*.svg under the output directory.
inline Json run(const ExperimentConfig& cfg, const RunOptions& opt) {
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path out = opt.out_dir.value_or(cfg.output_dir);
    fs::create_directories(out / "tables");
    fs::create_directories(out / "plots");

    Json report;
    report["version"] = kVersion;
    report["mode"] = cfg.mode;
    report["config"] = cfg.echo;
    report["warnings"] = Json::array();
    Json results = Json::array();

    const auto cert = hypothesis_certificate(cfg.potential);
    if (!cert.holds_A || !cert.holds_B) {
        report["warnings"].push_back("hypothesis uncertified: " + cert.reason);
    }

    const std::int64_t nk = static_cast<std::int64_t>(cfg.k_points.size());
    const std::int64_t radius = cfg.radii.back();
    const double delta = *std::min_element(cfg.deltas.begin(), cfg.deltas.end());

    if (cfg.mode == "band") {
        std::vector<Json> rows(static_cast<std::size_t>(nk));
        auto errs = parallel_for(nk, opt.jobs, [&](std::int64_t i) {
            const auto& k = cfg.k_points[static_cast<std::size_t>(i)];
            const BandParams bp = band_params(cfg.masses, k);
            Json r;
            r["k"] = k.components();
            r["amplitudes"] = bp.amplitude;
            r["phases"] = bp.phase;
            r["ratio"] = bp.ratio;
            r["band_min"] = bp.band_min;
            r["band_max"] = bp.band_max;
            rows[static_cast<std::size_t>(i)] = std::move(r);
        });
        std::ostringstream csv;
        csv << "index";
        for (int dd = 0; dd < cfg.dimension; ++dd) csv << ",k" << (dd + 1);
        csv << ",A,E_min,E_max\n";
        std::vector<double> xs, emin, emax;
        for (std::int64_t i = 0; i < nk; ++i) {
            const auto& r = rows[static_cast<std::size_t>(i)];
            if (!errs[static_cast<std::size_t>(i)].empty()) continue;
            csv << i;
            for (const auto& c : r["k"]) csv << "," << detail::csv_num(c.get<double>());
            csv << "," << detail::csv_num(r["ratio"].get<double>()) << ","
                << detail::csv_num(r["band_min"].get<double>()) << ","
                << detail::csv_num(r["band_max"].get<double>()) << "\n";
            xs.push_back(static_cast<double>(i));
            emin.push_back(r["band_min"].get<double>());
            emax.push_back(r["band_max"].get<double>());
            results.push_back(r);
        }
        detail::write_file(out / "tables" / "band.csv", csv.str());
        if (xs.size() > 1) {
            LineChart chart("Band edges along the k path", "k index", "energy");
            chart.add_series("E_min", xs, emin);
            chart.add_series("E_max", xs, emax);
            chart.write((out / "plots" / "band_edges.svg").string());
        }
        for (std::int64_t i = 0; i < nk; ++i) {
            if (!errs[static_cast<std::size_t>(i)].empty()) {
                results.push_back(Json{{"k", cfg.k_points[static_cast<std::size_t>(i)].components()},
                                       {"error", errs[static_cast<std::size_t>(i)]}});
            }
        }
    } else if (cfg.mode == "spectrum" || cfg.mode == "scan") {
        std::vector<Json> rows(static_cast<std::size_t>(nk));
        auto errs = parallel_for(nk, opt.jobs, [&](std::int64_t i) {
            const auto& k = cfg.k_points[static_cast<std::size_t>(i)];
            const SpectrumResult sr = count_discrete(cfg.masses, k, cfg.potential, radius, delta);
            Json r;
            r["k"] = k.components();
            r["A"] = sr.band.ratio;
            r["boundary_k"] = (sr.band.ratio == 0.0);
            r["radius"] = radius;
            r["spectrum"] = detail::spectrum_to_json(sr);
            if (cfg.mode == "spectrum" && sr.complete_spectrum) r["eigenvalues"] = sr.eigenvalues;
            rows[static_cast<std::size_t>(i)] = std::move(r);
        });
        std::ostringstream csv;
        csv << "index";
        for (int dd = 0; dd < cfg.dimension; ++dd) csv << ",k" << (dd + 1);
        csv << ",A,n_below,n_above,boundary\n";
        for (std::int64_t i = 0; i < nk; ++i) {
            if (!errs[static_cast<std::size_t>(i)].empty()) {
                results.push_back(Json{{"k", cfg.k_points[static_cast<std::size_t>(i)].components()},
                                       {"error", errs[static_cast<std::size_t>(i)]}});
                continue;
            }
            const auto& r = rows[static_cast<std::size_t>(i)];
            csv << i;
            for (const auto& c : r["k"]) csv << "," << detail::csv_num(c.get<double>());
            csv << "," << detail::csv_num(r["A"].get<double>()) << ","
                << r["spectrum"]["n_below"].get<std::int64_t>() << ","
                << r["spectrum"]["n_above"].get<std::int64_t>() << ","
                << (r["boundary_k"].get<bool>() ? 1 : 0) << "\n";
            results.push_back(r);
        }
        detail::write_file(out / "tables" / (cfg.mode == "scan" ? "scan.csv" : "spectrum.csv"),
                           csv.str());
    } else if (cfg.mode == "dichotomy") {
        for (std::int64_t i = 0; i < nk; ++i) {
            const auto& k = cfg.k_points[static_cast<std::size_t>(i)];
            Json r;
            r["k"] = k.components();
            try {
                const DichotomyVerdict dv = classify_dichotomy(cfg.masses, k, cfg.potential);
                r["verdict"] = (dv.verdict == DichotomyVerdict::Kind::Infinite) ? "Infinite" : "Finite";
                r["regime"] = dv.regime;
                if (!dv.alpha.empty()) r["alpha"] = dv.alpha;
                if (dv.witness) r["witness"] = *dv.witness;
                if (dv.containment) r["containment_radius"] = *dv.containment;
            } catch (const std::exception& e) {
                r["error"] = e.what();
            }
            results.push_back(std::move(r));
        }
    } else if (cfg.mode == "bs-count") {
        if (!cfg.z) throw std::invalid_argument("bs-count mode requires 'z' in the config");
        std::vector<Json> rows(static_cast<std::size_t>(nk));
        auto errs = parallel_for(nk, opt.jobs, [&](std::int64_t i) {
            const auto& k = cfg.k_points[static_cast<std::size_t>(i)];
            const LatticeBox box(cfg.dimension, radius, Boundary::periodic);
            const BSOperator bs = bs_matrix(cfg.masses, k, cfg.potential, *cfg.z, box);
            Json r;
            r["k"] = k.components();
            r["z"] = *cfg.z;
            r["count"] = bs_count(bs);
            r["side"] = (bs.side == SpectralSide::below) ? "below" : "above";
            rows[static_cast<std::size_t>(i)] = std::move(r);
        });
        std::ostringstream csv;
        csv << "index,z,count,side\n";
        for (std::int64_t i = 0; i < nk; ++i) {
            if (!errs[static_cast<std::size_t>(i)].empty()) {
                results.push_back(Json{{"k", cfg.k_points[static_cast<std::size_t>(i)].components()},
                                       {"error", errs[static_cast<std::size_t>(i)]}});
                continue;
            }
            const auto& r = rows[static_cast<std::size_t>(i)];
            csv << i << "," << detail::csv_num(r["z"].get<double>()) << ","
                << r["count"].get<std::int64_t>() << "," << r["side"].get<std::string>() << "\n";
            results.push_back(r);
        }
        detail::write_file(out / "tables" / "bs_count.csv", csv.str());
    } else if (cfg.mode == "convergence") {
        if (cfg.radii.size() < 3) throw std::invalid_argument("convergence mode needs >= 3 radii");
        struct Task {
            std::int64_t ik;
            double delta;
        };
        std::vector<Task> tasks;
        for (std::int64_t i = 0; i < nk; ++i) {
            for (double dl : cfg.deltas) tasks.push_back({i, dl});
        }
        std::vector<Json> rows(tasks.size());
        auto errs = parallel_for(static_cast<std::int64_t>(tasks.size()), opt.jobs, [&](std::int64_t t) {
            const Task& task = tasks[static_cast<std::size_t>(t)];
            const auto& k = cfg.k_points[static_cast<std::size_t>(task.ik)];
            const ConvergenceVerdict cv = convergence_study(cfg.masses, k, cfg.potential, cfg.radii, task.delta);
            Json r;
            r["k"] = k.components();
            r["delta"] = task.delta;
            r["radii"] = cv.radii;
            r["counts"] = cv.counts;
            r["verdict"] = to_string(cv.verdict);
            if (cv.stable_count >= 0) r["stable_count"] = cv.stable_count;
            rows[static_cast<std::size_t>(t)] = std::move(r);
        });
        std::ostringstream csv;
        csv << "k_index,delta,radius,count\n";
        LineChart chart("Discrete-eigenvalue counts vs box radius", "radius R", "count");
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (!errs[t].empty()) {
                results.push_back(Json{{"k", cfg.k_points[static_cast<std::size_t>(tasks[t].ik)].components()},
                                       {"delta", tasks[t].delta},
                                       {"error", errs[t]}});
                continue;
            }
            const auto& r = rows[t];
            std::vector<double> xs, ys;
            for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
                csv << tasks[t].ik << "," << detail::csv_num(tasks[t].delta) << "," << cfg.radii[i]
                    << "," << r["counts"][i].get<std::int64_t>() << "\n";
                xs.push_back(static_cast<double>(cfg.radii[i]));
                ys.push_back(static_cast<double>(r["counts"][i].get<std::int64_t>()));
            }
            std::ostringstream name;
            name << "k#" << tasks[t].ik << " delta=" << tasks[t].delta;
            chart.add_series(name.str(), xs, ys);
            results.push_back(r);
        }
        detail::write_file(out / "tables" / "convergence.csv", csv.str());
        if (!tasks.empty()) chart.write((out / "plots" / "counts_vs_radius.svg").string());
    }

    report["results"] = std::move(results);
    if (!opt.stable_output) {
        const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
        report["timings"] = Json{{"total_seconds", dt.count()}};
    }
    detail::write_file(out / "report.json", report.dump(2) + "\n");
    return report;
}

}  // namespace latfib
