#include "mfunc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfunc/error.hpp"

namespace mfunc::pipeline {

namespace {

template <class T>
void take(const io::Json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

std::filesystem::path cache_dir_or_default(const std::optional<std::filesystem::path>& dir) {
    return dir ? *dir : arith::default_cache_dir();
}

std::shared_ptr<const arith::HeckeTable> table_for(std::uint64_t prime_limit,
                                                   const std::optional<std::filesystem::path>& hecke_file,
                                                   const std::optional<std::filesystem::path>& cache_dir) {
    if (hecke_file)
        return std::make_shared<const arith::HeckeTable>(
            arith::read_hecke_csv(*hecke_file, hecke_file->stem().string(), 0, 1));
    return std::make_shared<const arith::HeckeTable>(
        arith::cached_hecke_table(prime_limit, cache_dir_or_default(cache_dir)));
}

euler::EulerProductSpec spec_for(const std::string& selector, std::size_t zeta_primes,
                                 const std::function<std::shared_ptr<const arith::HeckeTable>()>& table) {
    const auto sel = parse_spec(selector);
    switch (sel.family) {
        case euler::Family::zeta: return euler::spec_zeta(zeta_primes);
        case euler::Family::modular: return euler::spec_modular(table());
        case euler::Family::sympow: return euler::spec_sympow(table(), sel.gamma);
        case euler::Family::custom: break;
    }
    fail(ErrorKind::domain, "unsupported spec selector " + selector);
}

charfun::PreflightReport preflight_or_throw(const euler::EulerProductSpec& spec, const RunConfig& c) {
    charfun::PreflightOptions po;
    po.r1_min = c.r1_min;
    auto report = charfun::decay_preflight(spec, c.sigma, po);
    if (!report.passed)
        fail(ErrorKind::inversion_quality,
             "decay preflight: only " + std::to_string(report.bounded_count) +
                 " primes with |r_1| >= C, two-zero structure and bounded normalized decay; need " +
                 std::to_string(po.required));
    return report;
}

charfun::CharFnGrid charfn_for(const euler::EulerProductSpec& spec, const RunConfig& c) {
    charfun::ProductOptions po;
    po.quad.tol = c.quad_tol;
    po.tail_tol = c.tail_tol;
    auto grid = charfun::product_charfn(spec, c.sigma, c.charfn_cutoff, charfun::WGrid{c.w_max, c.w_nodes}, po);
    grid.preflight = preflight_or_throw(spec, c);
    return grid;
}

io::Json preflight_json(const charfun::PreflightReport& r) {
    io::Json j;
    j["passed"] = r.passed;
    j["bounded_count"] = r.bounded_count;
    io::Json primes = io::Json::array();
    for (const auto& p : r.primes) {
        io::Json row;
        row["p"] = p.p;
        row["r1_abs"] = p.r1_abs;
        row["spread"] = p.spread;
        row["bounded"] = p.bounded;
        io::Json norm = io::Json::array();
        for (const auto& d : p.rows) norm.push_back(d.normalized);
        row["normalized"] = norm;
        primes.push_back(row);
    }
    j["primes"] = primes;
    return j;
}

io::Json charfn_meta(const charfun::CharFnGrid& g) {
    io::Json j;
    j["kind"] = "charfn";
    j["spec"] = g.spec_name;
    j["sigma"] = g.sigma;
    j["prime_cutoff"] = g.prime_cutoff;
    j["w_max"] = g.grid.w_max;
    j["w_nodes"] = g.grid.nodes;
    j["tail_bound"] = g.tail_bound;
    j["heuristic"] = g.heuristic;
    j["skipped_primes"] = g.skipped_primes;
    j["direct_primes"] = g.direct_primes;
    j["series_primes"] = g.series_primes;
    j["series_remainder"] = g.series_remainder;
    return j;
}

template <class F>
std::string render(F&& writer) {
    std::ostringstream ss;
    writer(ss);
    return ss.str();
}

}  // namespace

RunConfig config_from_json(const io::Json& j, RunConfig c) {
    static const std::vector<std::string> known{
        "spec", "sigma", "charfn_cutoff", "sample_cutoff", "w_max", "w_nodes", "z_nodes", "z_extent", "z_rect",
        "compare_bins", "T", "samples", "seed", "out_dir", "prime_limit", "hecke_file", "cache_dir", "quad_tol",
        "tail_tol", "norm_tol", "sup_tol", "l1_tol", "r1_min", "allow_heuristic"};
    if (!j.is_object()) fail(ErrorKind::domain, "config: expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) fail(ErrorKind::domain, "config: unknown key " + key);
    try {
        take(j, "spec", c.spec);
        take(j, "sigma", c.sigma);
        take(j, "charfn_cutoff", c.charfn_cutoff);
        take(j, "sample_cutoff", c.sample_cutoff);
        take(j, "w_max", c.w_max);
        take(j, "w_nodes", c.w_nodes);
        take(j, "z_nodes", c.z_nodes);
        take(j, "z_extent", c.z_extent);
        if (j.contains("z_rect") && !j.at("z_rect").is_null()) {
            const auto v = j.at("z_rect").get<std::vector<double>>();
            if (v.size() != 4) fail(ErrorKind::domain, "config: z_rect needs [x0, x1, y0, y1]");
            c.z_rect = density::Rectangle{v[0], v[1], v[2], v[3]};
        }
        take(j, "compare_bins", c.compare_bins);
        take(j, "T", c.T);
        take(j, "samples", c.samples);
        take(j, "seed", c.seed);
        if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
        take(j, "prime_limit", c.prime_limit);
        if (j.contains("hecke_file") && !j.at("hecke_file").is_null())
            c.hecke_file = j.at("hecke_file").get<std::string>();
        if (j.contains("cache_dir") && !j.at("cache_dir").is_null()) c.cache_dir = j.at("cache_dir").get<std::string>();
        take(j, "quad_tol", c.quad_tol);
        take(j, "tail_tol", c.tail_tol);
        take(j, "norm_tol", c.norm_tol);
        take(j, "sup_tol", c.sup_tol);
        take(j, "l1_tol", c.l1_tol);
        take(j, "r1_min", c.r1_min);
        take(j, "allow_heuristic", c.allow_heuristic);
    } catch (const io::Json::exception& e) {
        fail(ErrorKind::domain, std::string("config: ") + e.what());
    }
    return c;
}

io::Json config_to_json(const RunConfig& c) {
    io::Json j;
    j["spec"] = c.spec;
    j["sigma"] = c.sigma;
    j["charfn_cutoff"] = c.charfn_cutoff;
    j["sample_cutoff"] = c.sample_cutoff;
    j["w_max"] = c.w_max;
    j["w_nodes"] = c.w_nodes;
    j["z_nodes"] = c.z_nodes;
    j["z_extent"] = c.z_extent;
    j["z_rect"] = c.z_rect ? io::Json{c.z_rect->x0, c.z_rect->x1, c.z_rect->y0, c.z_rect->y1} : io::Json(nullptr);
    j["compare_bins"] = c.compare_bins;
    j["T"] = c.T;
    j["samples"] = c.samples;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir.string();
    j["prime_limit"] = c.prime_limit;
    j["hecke_file"] = c.hecke_file ? io::Json(c.hecke_file->string()) : io::Json(nullptr);
    j["cache_dir"] = c.cache_dir ? io::Json(c.cache_dir->string()) : io::Json(nullptr);
    j["quad_tol"] = c.quad_tol;
    j["tail_tol"] = c.tail_tol;
    j["norm_tol"] = c.norm_tol;
    j["sup_tol"] = c.sup_tol;
    j["l1_tol"] = c.l1_tol;
    j["r1_min"] = c.r1_min;
    j["allow_heuristic"] = c.allow_heuristic;
    return j;
}

namespace {

// Output and cache locations do not change results, so they stay out of provenance.
io::Json result_config(const RunConfig& c) {
    auto j = config_to_json(c);
    j.erase("out_dir");
    j.erase("cache_dir");
    return j;
}

}  // namespace

std::string config_hash(const RunConfig& c) { return io::hex64(io::fnv1a(result_config(c).dump())); }

SpecSelector parse_spec(const std::string& s) {
    if (s == "zeta") return {euler::Family::zeta, 1};
    if (s == "modular") return {euler::Family::modular, 1};
    if (s.rfind("sympow:", 0) == 0) {
        int gamma = 0;
        try {
            std::size_t used = 0;
            gamma = std::stoi(s.substr(7), &used);
            if (used != s.size() - 7) gamma = 0;
        } catch (const std::exception&) {
            gamma = 0;
        }
        if (gamma < 2) fail(ErrorKind::domain, "spec " + s + ": sympow needs an integer gamma >= 2");
        return {euler::Family::sympow, gamma};
    }
    fail(ErrorKind::domain, "unknown spec '" + s + "' (zeta | modular | sympow:<gamma>)");
}

void validate(const RunConfig& c) {
    parse_spec(c.spec);
    auto positive = [](bool ok, const char* what) {
        if (!ok) fail(ErrorKind::domain, std::string("config: ") + what);
    };
    positive(c.sigma > 0.0 && std::isfinite(c.sigma), "sigma must be positive");
    positive(c.charfn_cutoff > 0 && c.sample_cutoff > 0, "prime cutoffs must be positive");
    positive(c.w_max > 0.0, "w_max must be positive");
    positive(c.w_nodes >= 3 && c.w_nodes % 2 == 1, "w_nodes must be odd and >= 3");
    positive(c.z_nodes > 0 && c.compare_bins > 0, "resolutions must be positive");
    positive(c.z_extent > 0.0, "z_extent must be positive");
    positive(c.T > 0.0, "T must be positive");
    positive(c.samples >= 1000, "samples must be >= 1000");
    positive(c.prime_limit >= 2, "prime_limit must be >= 2");
    positive(c.quad_tol > 0.0 && c.tail_tol > 0.0 && c.norm_tol > 0.0, "tolerances must be positive");
    positive(c.sup_tol > 0.0 && c.l1_tol > 0.0 && c.r1_min >= 0.0, "tolerances must be positive");
    if (c.z_rect) positive(c.z_rect->valid() && c.z_rect->area() > 0.0, "z_rect must be a nonempty rectangle");
}

std::shared_ptr<const arith::HeckeTable> load_table(const RunConfig& c) {
    return table_for(c.prime_limit, c.hecke_file, c.cache_dir);
}

euler::EulerProductSpec load_spec(const RunConfig& c) {
    return spec_for(c.spec, std::max({c.charfn_cutoff, c.sample_cutoff, std::size_t{1000}}),
                    [&] { return load_table(c); });
}

void check_sigma(const euler::EulerProductSpec& spec, const RunConfig& c) {
    if (c.sigma <= spec.sigma0() && !c.allow_heuristic)
        fail(ErrorKind::domain, "sigma = " + io::format_double(c.sigma, 6) + " is not above sigma0 = " +
                                    io::format_double(spec.sigma0(), 6) + " for " + spec.name() +
                                    "; pass --allow-heuristic to run anyway");
}

density::Geometry compare_geometry(const euler::EulerProductSpec& spec, const RunConfig& c) {
    const auto rect = c.z_rect ? *c.z_rect : density::auto_rectangle(spec, c.sigma, c.charfn_cutoff, c.z_extent);
    return {rect, c.compare_bins, c.compare_bins};
}

void emit(const std::filesystem::path& dir, const std::string& name, const std::string& contents, io::Json meta,
          const RunConfig* config) {
    io::write_text(dir / name, contents);
    meta["file"] = name;
    meta["version"] = std::string(io::kVersion);
    if (config) {
        meta["config_hash"] = config_hash(*config);
        meta["seed"] = config->seed;
        meta["config"] = result_config(*config);
    }
    io::write_json(dir / (name + ".json"), meta);
}

void emit_json(const std::filesystem::path& dir, const std::string& name, io::Json body, const RunConfig* config) {
    body["version"] = std::string(io::kVersion);
    if (config) {
        body["config_hash"] = config_hash(*config);
        body["seed"] = config->seed;
        body["config"] = result_config(*config);
    }
    io::write_json(dir / name, body);
}

DensityRun run_density(const RunConfig& c, bool write) {
    validate(c);
    const auto spec = load_spec(c);
    check_sigma(spec, c);
    DensityRun run;
    run.charfn = charfn_for(spec, c);
    const auto rect = c.z_rect ? *c.z_rect : density::auto_rectangle(spec, c.sigma, c.charfn_cutoff, c.z_extent);
    density::InvertOptions io_opts;
    io_opts.norm_tol = c.norm_tol;
    run.density = density::invert(run.charfn, {rect, c.z_nodes, c.z_nodes}, io_opts);
    if (write) {
        emit(c.out_dir, "charfn.csv", render([&](auto& o) { charfun::write_charfn_csv(run.charfn, o); }),
             charfn_meta(run.charfn), &c);
        emit(c.out_dir, "density.csv", render([&](auto& o) { density::write_density_csv(run.density, o); }),
             density::sidecar(run.density), &c);
        emit(c.out_dir, "density.matrix", render([&](auto& o) { density::write_gnuplot_matrix(run.density, o); }),
             density::sidecar(run.density), &c);
        io::Json diag;
        diag["charfn"] = charfn_meta(run.charfn);
        diag["density"] = density::sidecar(run.density);
        diag["preflight"] = preflight_json(*run.charfn.preflight);
        emit_json(c.out_dir, "diagnostics.json", diag, &c);
    }
    return run;
}

empirical::EmpiricalHistogram run_sample(const RunConfig& c, bool write) {
    validate(c);
    const auto spec = load_spec(c);
    check_sigma(spec, c);
    empirical::HistogramOptions ho;
    ho.seed = c.seed;
    auto h = empirical::build_histogram(spec, c.sigma, c.T, c.samples, c.sample_cutoff, compare_geometry(spec, c), ho);
    if (write)
        emit(c.out_dir, "histogram.csv", render([&](auto& o) { empirical::write_histogram_csv(h, o); }),
             empirical::sidecar(h), &c);
    return h;
}

CompareRun run_compare(const RunConfig& c, bool write) {
    validate(c);
    const auto spec = load_spec(c);
    check_sigma(spec, c);
    const auto geo = compare_geometry(spec, c);
    CompareRun run;
    const auto charfn = charfn_for(spec, c);
    density::InvertOptions io_opts;
    io_opts.cell_average = true;
    io_opts.norm_tol = c.norm_tol;
    run.density = density::invert(charfn, geo, io_opts);
    empirical::HistogramOptions ho;
    ho.seed = c.seed;
    run.histogram = empirical::build_histogram(spec, c.sigma, c.T, c.samples, c.sample_cutoff, geo, ho);
    run.report = empirical::discrepancy(run.histogram, run.density, c.seed);
    run.passed = run.report.sufficient && run.report.sup_rect < c.sup_tol && run.report.l1 < c.l1_tol;
    if (write) {
        emit(c.out_dir, "compare_density.csv", render([&](auto& o) { density::write_density_csv(run.density, o); }),
             density::sidecar(run.density), &c);
        emit(c.out_dir, "histogram.csv", render([&](auto& o) { empirical::write_histogram_csv(run.histogram, o); }),
             empirical::sidecar(run.histogram), &c);
        auto report = empirical::to_json(run.report);
        report["sup_tol"] = c.sup_tol;
        report["l1_tol"] = c.l1_tol;
        report["passed"] = run.passed;
        report["heuristic"] = run.histogram.heuristic || run.density.heuristic;
        emit_json(c.out_dir, "compare.json", report, &c);
    }
    return run;
}

io::Json run_satotate(const SatoTateArgs& a) {
    const auto table = table_for(a.x, a.hecke_file, a.cache_dir);
    const auto system = satotate::build_intervals(a.gamma, a.xi);
    auto rec = satotate::record(system, a.x, satotate::empirical_fraction(*table, system, a.x));
    rec["ell"] = system.ell;
    rec["S"] = satotate::closed_form_S(system);
    rec["T"] = satotate::closed_form_T(system);
    rec["st_ratio"] = satotate::st_ratio(system);
    if (a.epsilon) {
        const auto pf = satotate::pf_epsilon_density(*table, *a.epsilon, a.x);
        rec["pf_epsilon"] = {{"epsilon", pf.epsilon},
                             {"x", pf.x},
                             {"empirical", pf.fraction},
                             {"predicted", pf.prediction},
                             {"abs_error", std::abs(pf.fraction - pf.prediction)}};
    }
    return rec;
}

io::Json run_decay(const DecayArgs& a) {
    if (a.radii.empty()) fail(ErrorKind::domain, "decay: need at least one radius");
    if (a.directions == 0) fail(ErrorKind::domain, "decay: need at least one direction");
    const auto spec = spec_for(a.spec, 100000, [&] { return table_for(a.prime_limit, a.hecke_file, a.cache_dir); });
    std::size_t index = spec.prime_count();
    for (std::size_t n = 0; n < spec.prime_count() && spec.prime(n) <= a.prime; ++n)
        if (spec.prime(n) == a.prime) index = n;
    if (index == spec.prime_count()) fail(ErrorKind::domain, "decay: " + std::to_string(a.prime) + " is not a table prime");
    if (spec.degree(index) == 0) fail(ErrorKind::domain, "decay: local factor at this prime is excluded");
    const euler::LocalCurve curve(spec, index, a.sigma);
    std::vector<double> radii = a.radii;
    if (a.scale_by_prime)
        for (auto& r : radii) r /= curve.radius();
    const auto rows = charfun::decay_profile(curve, radii, charfun::uniform_directions(a.directions));
    io::Json j;
    j["spec"] = spec.name();
    j["sigma"] = a.sigma;
    j["prime"] = a.prime;
    j["r1"] = std::abs(euler::taylor_r(spec, 1, index));
    j["two_zero_structure"] = charfun::two_zero_structure(curve);
    j["window"] = charfun::decay_window(curve);
    io::Json table = io::Json::array();
    for (const auto& r : rows)
        table.push_back({{"radius", r.radius},
                         {"sup_abs", r.sup_abs},
                         {"best_tau", r.best_tau},
                         {"best_radius", r.best_radius},
                         {"normalized", r.normalized},
                         {"nodes", r.nodes}});
    j["rows"] = table;
    const double spread = charfun::decay_spread(rows);
    j["spread"] = spread;
    j["max_spread"] = a.max_spread;
    j["bounded"] = spread <= a.max_spread;
    return j;
}

}  // namespace mfunc::pipeline
