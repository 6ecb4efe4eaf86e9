#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sediment/error.hpp"

namespace sediment {

// Coverage dynamics: the share of incoming queries the wiki can already
// answer, growing as answered work is distilled back in.
struct BetaContribution {
    std::string synthesis_id;
    double beta = 0.0;
};

struct CoverageParams {
    double h0 = 0.05;
    double alpha = 0.18;  // cultivation rate, exclusive (0, 1)
    double p = 0.9;       // task concentration: share of queries on covered ground
    std::vector<BetaContribution> beta_contributions;
    // Each query triggers each listed contribution independently with this
    // probability (expected-value mode folds it in deterministically).
    double beta_trigger_probability = 0.0;
};

void validate_coverage(const CoverageParams& params);

// One coverage step. Throws SimulationError on out-of-range inputs.
double step_h(double h, double alpha, double p);

// Coverage step plus triggered synthesis contributions, clamped to 1.
double step_h_extended(double h, double alpha, double p,
                       const std::vector<double>& triggered_betas);

enum class Regime { chunk_rag, long_context, compounding };
const char* regime_name(Regime regime);
Regime regime_from_name(const std::string& name);

// How the hit probability relates to coverage: raw uses h directly;
// concentration_scaled discounts by p, since only the concentrated share of
// traffic revisits covered ground.
enum class HitModel { raw, concentration_scaled };
const char* hit_model_name(HitModel model);
HitModel hit_model_from_name(const std::string& name);

// Write-back can be charged on every query or only when the query missed.
enum class WritebackMode { every_query, on_miss };
const char* writeback_mode_name(WritebackMode mode);
WritebackMode writeback_mode_from_name(const std::string& name);

struct ChunkRagParams {
    std::int64_t chunk_tokens = 500;
    std::int64_t top_k = 5;
    std::int64_t sys_prompt_tokens = 300;
    std::int64_t query_tokens = 50;
    std::int64_t output_tokens = 500;
};

struct LongContextParams {
    std::int64_t doc_tokens = 65000;
    std::int64_t query_tokens = 50;
    std::int64_t output_tokens = 5000;
};

struct CompoundingParams {
    double c_generate = 70000.0;
    double c_retrieve = 3000.0;
    double c_writeback = 1000.0;
    HitModel hit_model = HitModel::concentration_scaled;
    WritebackMode writeback = WritebackMode::every_query;
};

struct RegimeParams {
    ChunkRagParams chunk_rag;
    LongContextParams long_context;
    CompoundingParams compounding;
};

double effective_hit(double h, double p, HitModel model);

// Cost of one query at coverage h. The literal cost equation charges
// write-back unconditionally; pass is_miss accordingly.
double per_query_cost(double h, const CompoundingParams& params, bool is_miss);

// Flat per-query token count for the stateless regimes. Compounding has no
// flat cost; asking for one is an error.
std::int64_t baseline_cost(Regime regime, const RegimeParams& params);

enum class CostMode { expected_value, bernoulli };
const char* cost_mode_name(CostMode mode);
CostMode cost_mode_from_name(const std::string& name);

struct SimOptions {
    int days = 30;
    int queries_per_day = 10;
    CostMode mode = CostMode::expected_value;
    std::uint64_t seed = 42;
    // Replays a fixed per-query cost sequence through a stateless regime;
    // must cover exactly days * queries_per_day entries.
    std::vector<double> per_query_override;
};

struct QueryPoint {
    int index = 0;  // 1-based global query index
    double h_before = 0.0;
    double cost_tokens = 0.0;

    bool operator==(const QueryPoint&) const = default;
};

struct DayPoint {
    int day = 0;
    double cumulative_tokens = 0.0;

    bool operator==(const DayPoint&) const = default;
};

struct SimTrace {
    std::string scenario;
    Regime regime = Regime::compounding;
    std::uint64_t seed = 42;
    std::vector<QueryPoint> per_query;
    std::vector<DayPoint> per_day;

    double cumulative_at(int day) const;  // SimulationError when day is not covered

    bool operator==(const SimTrace&) const = default;
};

std::string concentration_label(double p);

SimTrace simulate_regime(Regime regime, const SimOptions& options,
                         const CoverageParams& coverage, const RegimeParams& params);

// All three regimes under one coverage scenario, in declaration order.
std::vector<SimTrace> simulate(const SimOptions& options, const CoverageParams& coverage,
                               const RegimeParams& params);

// cumulative(a) / cumulative(b) at each checkpoint day.
std::vector<std::pair<int, double>> ratio_report(const SimTrace& a, const SimTrace& b,
                                                 const std::vector<int>& checkpoints);

// Raw tokens rendered in millions: two decimals, three below 0.1M so small
// cells keep a significant digit.
std::string format_millions(double raw_tokens);
std::string format_ratio(double value);  // one decimal

// Fixed interactive-latency reference for one retrieval-augmented query,
// used to put cold-start latency in context.
struct ChunkLatencyReference {
    std::int64_t retrieval_ms = 120;
    std::int64_t rerank_ms = 380;
    std::int64_t generation_ms = 2850;
    std::int64_t overhead_ms = 50;

    std::int64_t total_ms() const {
        return retrieval_ms + rerank_ms + generation_ms + overhead_ms;
    }
};

struct ProjectionRow {
    int day = 0;
    std::string regime;
    std::string scenario;
    double cumulative_tokens = 0.0;
    std::string cumulative_millions;

    bool operator==(const ProjectionRow&) const = default;
};

std::vector<ProjectionRow> projection_rows(const std::vector<SimTrace>& traces);
std::string projection_csv(const std::vector<ProjectionRow>& rows);
std::vector<ProjectionRow> parse_projection_csv(const std::string& text);

// Full projection run configured from a JSON file: both stateless regimes
// plus one compounding trace per concentration scenario.
struct ProjectionConfig {
    SimOptions options;
    CoverageParams coverage;  // p is overridden per scenario
    std::vector<double> concentrations;
    std::vector<int> checkpoints;
    RegimeParams regimes;

    static ProjectionConfig load(const std::filesystem::path& file);
};

std::vector<SimTrace> run_projection(const ProjectionConfig& config);

// Thirty-day cumulative targets in millions, one column per regime or
// concentration scenario, loaded from the shipped transcription CSV.
struct CalibrationTargets {
    std::vector<int> checkpoint_days;
    std::vector<double> chunk_millions;
    std::vector<std::string> chunk_cells;
    std::vector<double> long_context_millions;
    std::vector<std::string> long_context_cells;
    std::vector<double> concentrations;
    std::vector<std::vector<double>> compounding_millions;      // [scenario][checkpoint]
    std::vector<std::vector<std::string>> compounding_cells;

    static CalibrationTargets load(const std::filesystem::path& file);
};

struct SearchSpace {
    std::vector<double> c_generate;
    std::vector<double> c_retrieve;
    std::vector<double> c_writeback;
    std::vector<HitModel> hit_models;
    std::vector<WritebackMode> writeback_modes;

    static SearchSpace default_space();
};

struct CellFit {
    int day = 0;
    double concentration = 0.0;
    double target_millions = 0.0;
    double simulated_millions = 0.0;
    double rel_error = 0.0;
};

struct CalibrationResult {
    CompoundingParams params;
    double worst_rel_error = 0.0;
    // Simulated cost stays between the two stateless columns at every
    // checkpoint in every scenario.
    bool ranking_ok = false;
    std::vector<CellFit> cells;
};

// Grid search plus coordinate refinement over the cost constants and both
// conditioning flags, minimizing the worst-cell relative error. Coverage
// dynamics (h0, alpha) stay fixed.
CalibrationResult calibrate(const CalibrationTargets& targets, const SearchSpace& space,
                            const CoverageParams& coverage_base, int queries_per_day = 10);

std::string fit_report_json(const CalibrationResult& result);

}  // namespace sediment
