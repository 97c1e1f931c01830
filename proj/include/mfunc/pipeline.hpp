#pragma once

// Run configuration and the end-to-end pipelines behind the command-line tool.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfunc/charfun.hpp"
#include "mfunc/density.hpp"
#include "mfunc/empirical.hpp"
#include "mfunc/io.hpp"
#include "mfunc/satotate.hpp"

namespace mfunc::pipeline {

struct RunConfig {
    std::string spec = "zeta";              // zeta | modular | sympow:<gamma>
    double sigma = 1.2;
    std::size_t charfn_cutoff = 1000;       // primes in the truncated product
    std::size_t sample_cutoff = 10000;      // primes in the sampler
    double w_max = 60.0;
    std::size_t w_nodes = 513;
    std::size_t z_nodes = 201;              // density resolution per axis
    double z_extent = 6.0;                  // auto rectangle half-width in standard deviations
    std::optional<density::Rectangle> z_rect;
    std::size_t compare_bins = 32;          // histogram / comparison resolution per axis
    double T = 1e4;
    std::size_t samples = 200000;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "mfunc-out";
    std::uint64_t prime_limit = 1000000;    // Hecke table size
    std::optional<std::filesystem::path> hecke_file;   // external eigenvalues
    std::optional<std::filesystem::path> cache_dir;
    double quad_tol = 1e-10;
    double tail_tol = 1e-2;
    double norm_tol = 1e-2;
    double sup_tol = 0.02;
    double l1_tol = 0.05;
    double r1_min = 0.3;
    bool allow_heuristic = false;
};

// Fields missing from the JSON keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const io::Json& json, RunConfig base = {});
io::Json config_to_json(const RunConfig& config);
// Hash of the canonical JSON form, for sidecars.
std::string config_hash(const RunConfig& config);

// Throws domain errors for invalid settings.
void validate(const RunConfig& config);

struct SpecSelector {
    euler::Family family = euler::Family::zeta;
    int gamma = 1;
};
SpecSelector parse_spec(const std::string& selector);

// The Hecke table for the run: external file if given, else the cache.
std::shared_ptr<const arith::HeckeTable> load_table(const RunConfig& config);
euler::EulerProductSpec load_spec(const RunConfig& config);

// Refuses sigma <= sigma0 unless allow_heuristic is set.
void check_sigma(const euler::EulerProductSpec& spec, const RunConfig& config);

density::Geometry compare_geometry(const euler::EulerProductSpec& spec, const RunConfig& config);

struct DensityRun {
    charfun::CharFnGrid charfn;
    density::DensityGrid density;
};

// Preflight, product, inversion; writes charfn.csv, density.csv, density.matrix and sidecars.
DensityRun run_density(const RunConfig& config, bool write = true);

empirical::EmpiricalHistogram run_sample(const RunConfig& config, bool write = true);

struct CompareRun {
    density::DensityGrid density;
    empirical::EmpiricalHistogram histogram;
    empirical::DiscrepancyReport report;
    bool passed = false;
};

CompareRun run_compare(const RunConfig& config, bool write = true);

struct SatoTateArgs {
    int gamma = 2;
    double xi = 0.5235987755982988;
    std::uint64_t x = 1000000;
    std::optional<double> epsilon;
    std::optional<std::filesystem::path> hecke_file;
    std::optional<std::filesystem::path> cache_dir;
};
io::Json run_satotate(const SatoTateArgs& args);

struct DecayArgs {
    std::string spec = "zeta";
    double sigma = 0.75;
    std::uint64_t prime = 2;
    std::vector<double> radii{1e2, 1e3, 1e4};
    bool scale_by_prime = false;       // multiply radii by p^sigma
    std::size_t directions = 32;
    double max_spread = 1.2;
    std::uint64_t prime_limit = 1000000;
    std::optional<std::filesystem::path> hecke_file;
    std::optional<std::filesystem::path> cache_dir;
};
io::Json run_decay(const DecayArgs& args);

// Writes `contents` to dir/name and a sidecar dir/name.json carrying `meta` and provenance.
void emit(const std::filesystem::path& dir, const std::string& name, const std::string& contents, io::Json meta,
          const RunConfig* config);
// JSON outputs carry their provenance inline instead of a sidecar.
void emit_json(const std::filesystem::path& dir, const std::string& name, io::Json body, const RunConfig* config);

}  // namespace mfunc::pipeline
