#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "wavesim/planner.hpp"
#include "wavesim/sampler.hpp"
#include "wavesim/verify.hpp"
#include "wavesim/wavelets.hpp"

namespace wavesim {

// Everything one run needs, loaded from a single JSON document.  Every
// output file embeds config_hash(config) so a plan produced under one config
// cannot silently drive a simulation under another.
struct RunConfig {
    enum class Process { Power, Product };

    Process process = Process::Power;
    long long s = 1;  // power exponent; ignored for products
    std::string density_family;
    std::map<std::string, double> density_params;
    std::string density2_family;  // product only
    std::map<std::string, double> density2_params;
    WaveletSpec wavelet;
    WaveletSpec wavelet2;  // product only
    double epsilon = 0.0;
    double delta = 0.0;
    double p = 2.0;
    double T = 1.0;
    std::uint64_t seed = 0;
    int grid_points = 512;
    int replications = 200;

    AccuracySpec accuracy() const;
};

// Throws DomainError on schema violations with the offending field named.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

// Stable canonical rendering: fixed key order, 17-significant-digit numbers.
// Equal configs always render identically, so the hash is reproducible
// across runs and platforms.
std::string canonical_config_string(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

// FNV-1a, the hash behind every provenance check in the file formats.
std::uint64_t fnv1a(std::string_view bytes);

// Plan file: the truncation counts, budgets and constants for one config,
// stamped with that config's hash.
struct PlanFile {
    std::uint64_t config_hash = 0;
    bool is_product = false;
    TruncationPlan plan;          // power
    PlanConstants constants;      // power
    ProductPlan product;          // product
    PlanConstants constants1;     // product
    PlanConstants constants2;     // product
    double R0 = 0.0;              // power
    double R0_1 = 0.0, R0_2 = 0.0;
};

std::string plan_to_json(const PlanFile& pf);
PlanFile plan_from_json(const std::string& json_text);
void save_plan_file(const PlanFile& pf, const std::string& path);
// Throws ProvenanceMismatch when expected_config_hash is nonzero and the
// file was produced under a different config.
PlanFile load_plan_file(const std::string& path,
                        std::uint64_t expected_config_hash = 0);
std::uint64_t plan_content_hash(const PlanFile& pf);

// CSV path output: "# seed=... plan_hash=..." header line, then "t,value"
// rows with 17 significant digits for exact double round trips.
std::string path_to_csv(const SamplePath& path, std::uint64_t seed,
                        std::uint64_t plan_hash);
void save_path_csv(const SamplePath& path, std::uint64_t seed,
                   std::uint64_t plan_hash, const std::string& file);

// Verification report as JSON with all inputs echoed.
std::string report_to_json(const VerificationReport& report,
                           const RunConfig& config, std::uint64_t cfg_hash,
                           const std::map<std::string, double>& extra = {});
void save_report_json(const std::string& json_text, const std::string& path);

}  // namespace wavesim
