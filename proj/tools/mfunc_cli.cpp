// mfunc: densities of log L(sigma + it), empirical comparison, Sato-Tate checks.

#include <cstdlib>
#include <iostream>
#include <new>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mfunc/error.hpp"
#include "mfunc/parallel.hpp"
#include "mfunc/pipeline.hpp"

using namespace mfunc;

namespace {

enum Exit { kOk = 0, kValidation = 2, kQuality = 3, kResource = 4 };

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::domain:
        case ErrorKind::incomplete_data:
        case ErrorKind::singularity:
        case ErrorKind::coverage: return kValidation;
        case ErrorKind::resource: return kResource;
        default: return kQuality;
    }
}

struct RunFlags {
    std::optional<std::string> config_file;
    std::optional<std::string> spec;
    std::optional<double> sigma;
    std::optional<std::size_t> charfn_cutoff, sample_cutoff;
    std::optional<double> w_max;
    std::optional<std::size_t> w_nodes, z_nodes, compare_bins;
    std::optional<double> z_extent;
    std::optional<std::vector<double>> z_rect;
    std::optional<double> T;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> prime_limit;
    std::optional<std::string> hecke_file, cache_dir;
    std::optional<double> quad_tol, tail_tol, norm_tol, sup_tol, l1_tol, r1_min;
    bool allow_heuristic = false;
};

void add_run_options(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config_file, "JSON config file; flags override its values");
    cmd->add_option("--spec", f.spec, "zeta | modular | sympow:<gamma>");
    cmd->add_option("--sigma", f.sigma, "real part of s");
    cmd->add_option("--cutoff,-N", f.charfn_cutoff, "primes in the truncated characteristic function");
    cmd->add_option("--sample-cutoff", f.sample_cutoff, "primes in the sampler");
    cmd->add_option("--wmax", f.w_max, "half-width of the w-grid");
    cmd->add_option("--wnodes", f.w_nodes, "w-grid nodes per axis (odd)");
    cmd->add_option("--znodes", f.z_nodes, "density nodes per axis");
    cmd->add_option("--zextent", f.z_extent, "auto z-rectangle half-width in standard deviations");
    cmd->add_option("--zrect", f.z_rect, "explicit z-rectangle x0 x1 y0 y1")->expected(4);
    cmd->add_option("--bins", f.compare_bins, "histogram bins per axis");
    cmd->add_option("--T", f.T, "sample t in [-T, T]");
    cmd->add_option("--samples", f.samples, "number of equidistant t samples");
    cmd->add_option("--seed", f.seed, "seed for the rectangle family");
    cmd->add_option("--out,-o", f.out_dir, "output directory");
    cmd->add_option("--prime-limit", f.prime_limit, "Hecke table prime limit");
    cmd->add_option("--hecke-file", f.hecke_file, "external eigenvalue CSV (p,lambda_num,lambda_is_exact,theta)");
    cmd->add_option("--cache-dir", f.cache_dir, "eigenvalue cache directory");
    cmd->add_option("--quad-tol", f.quad_tol, "quadrature tolerance");
    cmd->add_option("--tail-tol", f.tail_tol, "tolerance on the omitted-prime bound");
    cmd->add_option("--norm-tol", f.norm_tol, "tolerance on the density norm defect");
    cmd->add_option("--sup-tol", f.sup_tol, "compare: rectangle discrepancy tolerance");
    cmd->add_option("--l1-tol", f.l1_tol, "compare: L1 tolerance");
    cmd->add_option("--r1-min", f.r1_min, "constant C in |r_1| >= C for the decay preflight");
    cmd->add_flag("--allow-heuristic", f.allow_heuristic, "run at sigma <= sigma0");
}

pipeline::RunConfig build_config(const RunFlags& f) {
    pipeline::RunConfig c;
    if (f.config_file) c = pipeline::config_from_json(io::Json::parse(io::read_text(*f.config_file)));
    if (f.spec) c.spec = *f.spec;
    if (f.sigma) c.sigma = *f.sigma;
    if (f.charfn_cutoff) c.charfn_cutoff = *f.charfn_cutoff;
    if (f.sample_cutoff) c.sample_cutoff = *f.sample_cutoff;
    if (f.w_max) c.w_max = *f.w_max;
    if (f.w_nodes) c.w_nodes = *f.w_nodes;
    if (f.z_nodes) c.z_nodes = *f.z_nodes;
    if (f.z_extent) c.z_extent = *f.z_extent;
    if (f.z_rect) c.z_rect = density::Rectangle{(*f.z_rect)[0], (*f.z_rect)[1], (*f.z_rect)[2], (*f.z_rect)[3]};
    if (f.compare_bins) c.compare_bins = *f.compare_bins;
    if (f.T) c.T = *f.T;
    if (f.samples) c.samples = *f.samples;
    if (f.seed) c.seed = *f.seed;
    if (f.out_dir) c.out_dir = *f.out_dir;
    if (f.prime_limit) c.prime_limit = *f.prime_limit;
    if (f.hecke_file) c.hecke_file = *f.hecke_file;
    if (f.cache_dir) c.cache_dir = *f.cache_dir;
    if (f.quad_tol) c.quad_tol = *f.quad_tol;
    if (f.tail_tol) c.tail_tol = *f.tail_tol;
    if (f.norm_tol) c.norm_tol = *f.norm_tol;
    if (f.sup_tol) c.sup_tol = *f.sup_tol;
    if (f.l1_tol) c.l1_tol = *f.l1_tol;
    if (f.r1_min) c.r1_min = *f.r1_min;
    if (f.allow_heuristic) c.allow_heuristic = true;
    pipeline::validate(c);
    return c;
}

void print(const io::Json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Value-distribution densities of log L(sigma + it) for Euler products"};
    app.require_subcommand(1);
    std::optional<std::size_t> threads;
    app.add_option("--threads", threads, "worker cap (overrides MFUNC_THREADS)");

    RunFlags density_flags, sample_flags, compare_flags;
    auto* density_cmd = app.add_subcommand("density", "characteristic function and density grid");
    add_run_options(density_cmd, density_flags);
    auto* sample_cmd = app.add_subcommand("sample", "histogram of sampled log values");
    add_run_options(sample_cmd, sample_flags);
    auto* compare_cmd = app.add_subcommand("compare", "density versus empirical histogram");
    add_run_options(compare_cmd, compare_flags);

    pipeline::SatoTateArgs st;
    std::optional<double> epsilon;
    std::optional<std::string> st_hecke, st_cache;
    auto* st_cmd = app.add_subcommand("satotate", "prime-angle fractions against the Sato-Tate prediction");
    st_cmd->add_option("--gamma", st.gamma, "symmetric power")->check(CLI::PositiveNumber);
    st_cmd->add_option("--xi", st.xi, "xi in (0, pi/2)");
    st_cmd->add_option("--x", st.x, "prime bound");
    st_cmd->add_option("--epsilon", epsilon, "also report the density of |lambda| > sqrt 2 - epsilon");
    st_cmd->add_option("--hecke-file", st_hecke, "external eigenvalue CSV");
    st_cmd->add_option("--cache-dir", st_cache, "eigenvalue cache directory");

    pipeline::DecayArgs dc;
    std::optional<std::string> dc_hecke, dc_cache;
    auto* decay_cmd = app.add_subcommand("decay", "sup of |K_n| over directions at growing |w|");
    decay_cmd->add_option("--spec", dc.spec, "zeta | modular | sympow:<gamma>");
    decay_cmd->add_option("--sigma", dc.sigma, "real part of s");
    decay_cmd->add_option("--prime", dc.prime, "prime p_n");
    decay_cmd->add_option("--radii", dc.radii, "radii |w| (ascending)");
    decay_cmd->add_flag("--scale-by-prime", dc.scale_by_prime, "multiply radii by p^sigma");
    decay_cmd->add_option("--directions", dc.directions, "seed directions in [0, pi)");
    decay_cmd->add_option("--max-spread", dc.max_spread, "largest max/min ratio counted as bounded");
    decay_cmd->add_option("--prime-limit", dc.prime_limit, "Hecke table prime limit");
    decay_cmd->add_option("--hecke-file", dc_hecke, "external eigenvalue CSV");
    decay_cmd->add_option("--cache-dir", dc_cache, "eigenvalue cache directory");

    std::uint64_t cache_limit = 1000000;
    std::optional<std::string> cache_dir;
    bool cache_clear = false;
    auto* cache_cmd = app.add_subcommand("cache", "build or inspect the Hecke eigenvalue cache");
    cache_cmd->add_option("--prime-limit", cache_limit, "prime limit of the table");
    cache_cmd->add_option("--cache-dir", cache_dir, "cache directory");
    cache_cmd->add_flag("--clear", cache_clear, "remove the cached table instead of building it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        if (threads) set_thread_count(*threads);
        if (density_cmd->parsed()) {
            const auto c = build_config(density_flags);
            const auto run = pipeline::run_density(c);
            io::Json out = density::sidecar(run.density);
            out["tail_bound"] = run.charfn.tail_bound;
            out["out_dir"] = c.out_dir.string();
            print(out);
        } else if (sample_cmd->parsed()) {
            const auto c = build_config(sample_flags);
            print(empirical::sidecar(pipeline::run_sample(c)));
        } else if (compare_cmd->parsed()) {
            const auto c = build_config(compare_flags);
            const auto run = pipeline::run_compare(c);
            auto out = empirical::to_json(run.report);
            out["passed"] = run.passed;
            print(out);
            if (!run.passed) {
                std::cerr << "compare: discrepancy above tolerance\n";
                return kQuality;
            }
        } else if (st_cmd->parsed()) {
            st.epsilon = epsilon;
            if (st_hecke) st.hecke_file = *st_hecke;
            if (st_cache) st.cache_dir = *st_cache;
            print(pipeline::run_satotate(st));
        } else if (decay_cmd->parsed()) {
            if (dc_hecke) dc.hecke_file = *dc_hecke;
            if (dc_cache) dc.cache_dir = *dc_cache;
            print(pipeline::run_decay(dc));
        } else if (cache_cmd->parsed()) {
            const auto dir = cache_dir ? std::filesystem::path(*cache_dir) : arith::default_cache_dir();
            const auto path = arith::hecke_cache_path(dir, cache_limit);
            io::Json out;
            out["path"] = path.string();
            if (cache_clear) {
                out["removed"] = std::filesystem::remove(path);
            } else {
                bool hit = false;
                const auto table = arith::cached_hecke_table(cache_limit, dir, &hit);
                out["hit"] = hit;
                out["entries"] = table.size();
            }
            print(out);
        }
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const io::Json::exception& e) {
        std::cerr << "error [domain]: " << e.what() << '\n';
        return kValidation;
    } catch (const std::bad_alloc&) {
        std::cerr << "error [resource]: out of memory\n";
        return kResource;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error [resource]: " << e.what() << '\n';
        return kResource;
    } catch (const std::exception& e) {
        std::cerr << "error [internal]: " << e.what() << '\n';
        return kQuality;
    }
    return kOk;
}
