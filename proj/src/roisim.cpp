#include "sediment/roisim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "sediment/io.hpp"
#include "sediment/text.hpp"

namespace sediment {

namespace {

using ordered_json = nlohmann::ordered_json;

void require_range(double value, double lo, double hi, const char* what) {
    if (!(value >= lo && value <= hi)) {
        throw SimulationError(std::string(what) + " out of range: " + std::to_string(value));
    }
}

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw SimulationError("alpha out of range: " + std::to_string(alpha));
    }
}

void require_nonnegative(double value, const char* what) {
    if (!(value >= 0.0)) {
        throw SimulationError(std::string(what) + " must be nonnegative: " +
                              std::to_string(value));
    }
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

std::string shortest_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw SimulationError("unformattable value");
    return std::string(buf, end);
}

double parse_double_cell(const std::string& cell, const std::string& context) {
    try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric cell '" + cell + "' in " + context);
    }
}

int parse_int_cell(const std::string& cell, const std::string& context) {
    try {
        std::size_t used = 0;
        int v = std::stoi(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer cell '" + cell + "' in " + context);
    }
}

}  // namespace

void validate_coverage(const CoverageParams& params) {
    require_range(params.h0, 0.0, 1.0, "h0");
    require_alpha(params.alpha);
    require_range(params.p, 0.0, 1.0, "p");
    require_range(params.beta_trigger_probability, 0.0, 1.0, "beta_trigger_probability");
    for (const BetaContribution& b : params.beta_contributions) {
        require_nonnegative(b.beta, "beta contribution");
    }
}

double step_h(double h, double alpha, double p) {
    require_range(h, 0.0, 1.0, "h");
    require_alpha(alpha);
    require_range(p, 0.0, 1.0, "p");
    return h + alpha * (1.0 - h) * p;
}

double step_h_extended(double h, double alpha, double p,
                       const std::vector<double>& triggered_betas) {
    double next = step_h(h, alpha, p);
    for (double beta : triggered_betas) {
        require_nonnegative(beta, "beta");
        next += beta;
    }
    return std::min(1.0, next);
}

const char* regime_name(Regime regime) {
    switch (regime) {
        case Regime::chunk_rag: return "chunk_rag";
        case Regime::long_context: return "long_context";
        case Regime::compounding: return "compounding";
    }
    throw SimulationError("unknown regime");
}

Regime regime_from_name(const std::string& name) {
    if (name == "chunk_rag") return Regime::chunk_rag;
    if (name == "long_context") return Regime::long_context;
    if (name == "compounding") return Regime::compounding;
    throw ConfigError("unknown regime: " + name);
}

const char* hit_model_name(HitModel model) {
    return model == HitModel::raw ? "raw" : "concentration_scaled";
}

HitModel hit_model_from_name(const std::string& name) {
    if (name == "raw") return HitModel::raw;
    if (name == "concentration_scaled") return HitModel::concentration_scaled;
    throw ConfigError("unknown hit model: " + name);
}

const char* writeback_mode_name(WritebackMode mode) {
    return mode == WritebackMode::every_query ? "every_query" : "on_miss";
}

WritebackMode writeback_mode_from_name(const std::string& name) {
    if (name == "every_query") return WritebackMode::every_query;
    if (name == "on_miss") return WritebackMode::on_miss;
    throw ConfigError("unknown writeback mode: " + name);
}

const char* cost_mode_name(CostMode mode) {
    return mode == CostMode::expected_value ? "expected_value" : "bernoulli";
}

CostMode cost_mode_from_name(const std::string& name) {
    if (name == "expected_value") return CostMode::expected_value;
    if (name == "bernoulli") return CostMode::bernoulli;
    throw ConfigError("unknown cost mode: " + name);
}

double effective_hit(double h, double p, HitModel model) {
    require_range(h, 0.0, 1.0, "h");
    require_range(p, 0.0, 1.0, "p");
    return model == HitModel::concentration_scaled ? h * p : h;
}

double per_query_cost(double h, const CompoundingParams& params, bool is_miss) {
    require_range(h, 0.0, 1.0, "h");
    require_nonnegative(params.c_generate, "c_generate");
    require_nonnegative(params.c_retrieve, "c_retrieve");
    require_nonnegative(params.c_writeback, "c_writeback");
    double cost = (1.0 - h) * params.c_generate + h * params.c_retrieve;
    if (is_miss) cost += params.c_writeback;
    return cost;
}

std::int64_t baseline_cost(Regime regime, const RegimeParams& params) {
    switch (regime) {
        case Regime::chunk_rag: {
            const ChunkRagParams& c = params.chunk_rag;
            for (std::int64_t v : {c.chunk_tokens, c.top_k, c.sys_prompt_tokens, c.query_tokens,
                                   c.output_tokens}) {
                if (v < 0) throw SimulationError("chunk_rag token fields must be nonnegative");
            }
            return c.top_k * c.chunk_tokens + c.sys_prompt_tokens + c.query_tokens +
                   c.output_tokens;
        }
        case Regime::long_context: {
            const LongContextParams& l = params.long_context;
            for (std::int64_t v : {l.doc_tokens, l.query_tokens, l.output_tokens}) {
                if (v < 0) throw SimulationError("long_context token fields must be nonnegative");
            }
            return l.doc_tokens + l.query_tokens + l.output_tokens;
        }
        case Regime::compounding:
            throw SimulationError(
                "compounding has no flat baseline; cost depends on coverage state");
    }
    throw SimulationError("unknown regime");
}

double SimTrace::cumulative_at(int day) const {
    for (const DayPoint& point : per_day) {
        if (point.day == day) return point.cumulative_tokens;
    }
    throw SimulationError("trace does not cover day " + std::to_string(day));
}

std::string concentration_label(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "p=%g", p);
    return buf;
}

SimTrace simulate_regime(Regime regime, const SimOptions& options,
                         const CoverageParams& coverage, const RegimeParams& params) {
    if (options.days < 1) throw SimulationError("days must be at least 1");
    if (options.queries_per_day < 1) throw SimulationError("queries_per_day must be at least 1");
    validate_coverage(coverage);
    std::size_t total_queries =
        static_cast<std::size_t>(options.days) * static_cast<std::size_t>(options.queries_per_day);
    if (!options.per_query_override.empty()) {
        if (regime == Regime::compounding) {
            throw SimulationError("per-query override applies to stateless regimes only");
        }
        if (options.per_query_override.size() != total_queries) {
            throw SimulationError("per-query override must cover every query: expected " +
                                  std::to_string(total_queries) + ", got " +
                                  std::to_string(options.per_query_override.size()));
        }
        for (double v : options.per_query_override) require_nonnegative(v, "override cost");
    }

    SimTrace trace;
    trace.scenario = regime == Regime::compounding ? concentration_label(coverage.p) : "flat";
    trace.regime = regime;
    trace.seed = options.seed;
    trace.per_query.reserve(total_queries);
    trace.per_day.reserve(static_cast<std::size_t>(options.days));

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    double beta_sum = 0.0;
    for (const BetaContribution& b : coverage.beta_contributions) beta_sum += b.beta;

    double h = coverage.h0;
    double cumulative = 0.0;
    int query_index = 0;
    for (int day = 1; day <= options.days; ++day) {
        for (int q = 0; q < options.queries_per_day; ++q) {
            ++query_index;
            double cost = 0.0;
            double h_before = regime == Regime::compounding ? h : 0.0;
            if (!options.per_query_override.empty()) {
                cost = options.per_query_override[static_cast<std::size_t>(query_index - 1)];
            } else if (regime != Regime::compounding) {
                cost = static_cast<double>(baseline_cost(regime, params));
            } else {
                const CompoundingParams& cp = params.compounding;
                double h_eff = effective_hit(h, coverage.p, cp.hit_model);
                if (options.mode == CostMode::expected_value) {
                    cost = per_query_cost(h_eff, cp, false);
                    cost += cp.writeback == WritebackMode::every_query
                                ? cp.c_writeback
                                : (1.0 - h_eff) * cp.c_writeback;
                } else {
                    bool miss = uniform(rng) >= h_eff;
                    bool charge_wb = cp.writeback == WritebackMode::every_query || miss;
                    cost = per_query_cost(miss ? 0.0 : 1.0, cp, charge_wb);
                }
                // Coverage grows from the day's distilled work regardless of
                // which branch this particular query took.
                if (coverage.beta_contributions.empty()) {
                    h = step_h(h, coverage.alpha, coverage.p);
                } else if (options.mode == CostMode::expected_value) {
                    h = std::min(1.0, step_h(h, coverage.alpha, coverage.p) +
                                          coverage.beta_trigger_probability * beta_sum);
                } else {
                    std::vector<double> triggered;
                    for (const BetaContribution& b : coverage.beta_contributions) {
                        if (uniform(rng) < coverage.beta_trigger_probability) {
                            triggered.push_back(b.beta);
                        }
                    }
                    h = step_h_extended(h, coverage.alpha, coverage.p, triggered);
                }
            }
            cumulative += cost;
            trace.per_query.push_back({query_index, h_before, cost});
        }
        trace.per_day.push_back({day, cumulative});
    }
    return trace;
}

std::vector<SimTrace> simulate(const SimOptions& options, const CoverageParams& coverage,
                               const RegimeParams& params) {
    std::vector<SimTrace> traces;
    traces.push_back(simulate_regime(Regime::chunk_rag, options, coverage, params));
    traces.push_back(simulate_regime(Regime::long_context, options, coverage, params));
    traces.push_back(simulate_regime(Regime::compounding, options, coverage, params));
    return traces;
}

std::vector<std::pair<int, double>> ratio_report(const SimTrace& a, const SimTrace& b,
                                                 const std::vector<int>& checkpoints) {
    std::vector<std::pair<int, double>> out;
    out.reserve(checkpoints.size());
    for (int day : checkpoints) {
        double denom = b.cumulative_at(day);
        if (denom == 0.0) {
            throw SimulationError("ratio undefined: zero cumulative at day " +
                                  std::to_string(day));
        }
        out.emplace_back(day, a.cumulative_at(day) / denom);
    }
    return out;
}

std::string format_millions(double raw_tokens) {
    double millions = raw_tokens / 1e6;
    char buf[64];
    if (std::fabs(millions) < 0.1) {
        std::snprintf(buf, sizeof(buf), "%.3f", millions);
    } else {
        std::snprintf(buf, sizeof(buf), "%.2f", millions);
    }
    return buf;
}

std::string format_ratio(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", value);
    return buf;
}

namespace {
const char* kProjectionHeader = "day,regime,scenario,cumulative_tokens,cumulative_millions";
}

std::vector<ProjectionRow> projection_rows(const std::vector<SimTrace>& traces) {
    std::vector<ProjectionRow> rows;
    for (const SimTrace& trace : traces) {
        for (const DayPoint& point : trace.per_day) {
            ProjectionRow row;
            row.day = point.day;
            row.regime = regime_name(trace.regime);
            row.scenario = trace.scenario;
            row.cumulative_tokens = point.cumulative_tokens;
            row.cumulative_millions = format_millions(point.cumulative_tokens);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string projection_csv(const std::vector<ProjectionRow>& rows) {
    std::string out = kProjectionHeader;
    out += '\n';
    for (const ProjectionRow& row : rows) {
        out += std::to_string(row.day) + "," + row.regime + "," + row.scenario + "," +
               shortest_double(row.cumulative_tokens) + "," + row.cumulative_millions + "\n";
    }
    return out;
}

std::vector<ProjectionRow> parse_projection_csv(const std::string& text) {
    std::vector<std::string> lines = split_lines(text);
    if (lines.empty() || trim(lines[0]) != kProjectionHeader) {
        throw ConfigError("projection CSV missing header");
    }
    std::vector<ProjectionRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        std::vector<std::string> cells = split_cells(lines[i]);
        if (cells.size() != 5) {
            throw ConfigError("projection CSV row " + std::to_string(i + 1) +
                              " must have 5 cells");
        }
        ProjectionRow row;
        std::string context = "projection CSV row " + std::to_string(i + 1);
        row.day = parse_int_cell(cells[0], context);
        row.regime = cells[1];
        row.scenario = cells[2];
        row.cumulative_tokens = parse_double_cell(cells[3], context);
        row.cumulative_millions = cells[4];
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

double config_double(const ordered_json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError("field must be a number: " + key);
    return j.at(key).get<double>();
}

std::int64_t config_tokens(const ordered_json& j, const std::string& key,
                           std::int64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw ConfigError("field must be an integer: " + key);
    std::int64_t v = j.at(key).get<std::int64_t>();
    if (v < 0) throw ConfigError("field must be nonnegative: " + key);
    return v;
}

int config_int(const ordered_json& j, const std::string& key, int fallback, int min_value) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw ConfigError("field must be an integer: " + key);
    int v = j.at(key).get<int>();
    if (v < min_value) {
        throw ConfigError("field must be at least " + std::to_string(min_value) + ": " + key);
    }
    return v;
}

}  // namespace

ProjectionConfig ProjectionConfig::load(const std::filesystem::path& file) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("unparseable projection config " + file.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("projection config must be a JSON object");

    ProjectionConfig config;
    try {
        config.options.days = config_int(j, "days", 30, 1);
        config.options.queries_per_day = config_int(j, "queries_per_day", 10, 1);
        if (j.contains("seed")) config.options.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("mode")) {
            config.options.mode = cost_mode_from_name(j.at("mode").get<std::string>());
        }
        if (j.contains("coverage")) {
            const ordered_json& c = j.at("coverage");
            config.coverage.h0 = config_double(c, "h0", config.coverage.h0);
            config.coverage.alpha = config_double(c, "alpha", config.coverage.alpha);
        }
        if (j.contains("concentrations")) {
            config.concentrations = j.at("concentrations").get<std::vector<double>>();
        } else {
            config.concentrations = {0.9, 0.6, 0.3};
        }
        if (j.contains("checkpoints")) {
            config.checkpoints = j.at("checkpoints").get<std::vector<int>>();
        } else {
            config.checkpoints = {1, 5, 10, 15, 20, 25, 30};
        }
        if (j.contains("chunk_rag")) {
            const ordered_json& c = j.at("chunk_rag");
            ChunkRagParams& p = config.regimes.chunk_rag;
            p.chunk_tokens = config_tokens(c, "chunk_tokens", p.chunk_tokens);
            p.top_k = config_tokens(c, "top_k", p.top_k);
            p.sys_prompt_tokens = config_tokens(c, "sys_prompt_tokens", p.sys_prompt_tokens);
            p.query_tokens = config_tokens(c, "query_tokens", p.query_tokens);
            p.output_tokens = config_tokens(c, "output_tokens", p.output_tokens);
        }
        if (j.contains("long_context")) {
            const ordered_json& c = j.at("long_context");
            LongContextParams& p = config.regimes.long_context;
            p.doc_tokens = config_tokens(c, "doc_tokens", p.doc_tokens);
            p.query_tokens = config_tokens(c, "query_tokens", p.query_tokens);
            p.output_tokens = config_tokens(c, "output_tokens", p.output_tokens);
        }
        if (j.contains("compounding")) {
            const ordered_json& c = j.at("compounding");
            CompoundingParams& p = config.regimes.compounding;
            p.c_generate = config_double(c, "c_generate", p.c_generate);
            p.c_retrieve = config_double(c, "c_retrieve", p.c_retrieve);
            p.c_writeback = config_double(c, "c_writeback", p.c_writeback);
            if (c.contains("hit_model")) {
                p.hit_model = hit_model_from_name(c.at("hit_model").get<std::string>());
            }
            if (c.contains("writeback")) {
                p.writeback = writeback_mode_from_name(c.at("writeback").get<std::string>());
            }
            for (double v : {p.c_generate, p.c_retrieve, p.c_writeback}) {
                if (v < 0) throw ConfigError("compounding cost constants must be nonnegative");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad projection config " + file.string() + ": " + e.what());
    }

    if (config.concentrations.empty()) throw ConfigError("concentrations must be non-empty");
    for (double p : config.concentrations) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("concentration out of range");
    }
    if (config.checkpoints.empty()) throw ConfigError("checkpoints must be non-empty");
    for (int day : config.checkpoints) {
        if (day < 1 || day > config.options.days) {
            throw ConfigError("checkpoint outside simulated horizon: " + std::to_string(day));
        }
    }
    if (!(config.coverage.h0 >= 0.0 && config.coverage.h0 <= 1.0)) {
        throw ConfigError("coverage.h0 out of range");
    }
    if (!(config.coverage.alpha > 0.0 && config.coverage.alpha < 1.0)) {
        throw ConfigError("coverage.alpha out of range");
    }
    return config;
}

std::vector<SimTrace> run_projection(const ProjectionConfig& config) {
    std::vector<SimTrace> traces;
    CoverageParams coverage = config.coverage;
    coverage.p = config.concentrations.front();
    traces.push_back(
        simulate_regime(Regime::chunk_rag, config.options, coverage, config.regimes));
    traces.push_back(
        simulate_regime(Regime::long_context, config.options, coverage, config.regimes));
    for (double p : config.concentrations) {
        coverage.p = p;
        traces.push_back(
            simulate_regime(Regime::compounding, config.options, coverage, config.regimes));
    }
    return traces;
}

CalibrationTargets CalibrationTargets::load(const std::filesystem::path& file) {
    std::vector<std::string> lines = split_lines(read_file(file));
    CalibrationTargets targets;
    bool header_seen = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = trim(lines[i]);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells = split_cells(line);
        std::string context = file.filename().string() + " line " + std::to_string(i + 1);
        if (!header_seen) {
            if (cells.size() < 4 || cells[0] != "day" || cells[1] != "chunk_rag" ||
                cells[2] != "long_context") {
                throw ConfigError("target header must start day,chunk_rag,long_context: " +
                                  context);
            }
            for (std::size_t c = 3; c < cells.size(); ++c) {
                if (cells[c].rfind("p=", 0) != 0) {
                    throw ConfigError("scenario column must be named p=<value>: " + context);
                }
                double p = parse_double_cell(cells[c].substr(2), context);
                if (!(p >= 0.0 && p <= 1.0)) {
                    throw ConfigError("scenario concentration out of range: " + context);
                }
                targets.concentrations.push_back(p);
            }
            targets.compounding_millions.resize(targets.concentrations.size());
            targets.compounding_cells.resize(targets.concentrations.size());
            header_seen = true;
            continue;
        }
        if (cells.size() != 3 + targets.concentrations.size()) {
            throw ConfigError("target row has wrong cell count: " + context);
        }
        int day = parse_int_cell(cells[0], context);
        if (!targets.checkpoint_days.empty() && day <= targets.checkpoint_days.back()) {
            throw ConfigError("checkpoint days must increase: " + context);
        }
        if (day < 1) throw ConfigError("checkpoint day must be positive: " + context);
        targets.checkpoint_days.push_back(day);
        double chunk = parse_double_cell(cells[1], context);
        double lc = parse_double_cell(cells[2], context);
        if (chunk <= 0.0 || lc <= 0.0) {
            throw ConfigError("baseline cells must be positive: " + context);
        }
        targets.chunk_millions.push_back(chunk);
        targets.chunk_cells.push_back(cells[1]);
        targets.long_context_millions.push_back(lc);
        targets.long_context_cells.push_back(cells[2]);
        for (std::size_t c = 0; c < targets.concentrations.size(); ++c) {
            double v = parse_double_cell(cells[3 + c], context);
            if (v <= 0.0) throw ConfigError("target cells must be positive: " + context);
            targets.compounding_millions[c].push_back(v);
            targets.compounding_cells[c].push_back(cells[3 + c]);
        }
    }
    if (!header_seen) throw ConfigError("target file has no header: " + file.string());
    if (targets.checkpoint_days.empty()) {
        throw ConfigError("target file has no rows: " + file.string());
    }
    if (targets.concentrations.empty()) {
        throw ConfigError("target file has no compounding columns: " + file.string());
    }
    return targets;
}

SearchSpace SearchSpace::default_space() {
    SearchSpace space;
    for (double v = 60000.0; v <= 80000.0; v += 2500.0) space.c_generate.push_back(v);
    for (double v = 1000.0; v <= 10000.0; v += 1000.0) space.c_retrieve.push_back(v);
    for (double v = 0.0; v <= 5000.0; v += 500.0) space.c_writeback.push_back(v);
    space.hit_models = {HitModel::raw, HitModel::concentration_scaled};
    space.writeback_modes = {WritebackMode::every_query, WritebackMode::on_miss};
    return space;
}

namespace {

struct Fitness {
    double worst_rel_error = 0.0;
    bool ranking_ok = false;
};

// Expected-value compounding run scoring every target cell; kept allocation
// free because the calibration grid calls it thousands of times.
Fitness score_params(const CompoundingParams& params, const CalibrationTargets& targets,
                     const CoverageParams& base, int queries_per_day) {
    Fitness fit;
    fit.ranking_ok = true;
    int horizon = targets.checkpoint_days.back();
    for (std::size_t s = 0; s < targets.concentrations.size(); ++s) {
        double p = targets.concentrations[s];
        double h = base.h0;
        double cumulative = 0.0;
        std::size_t next_checkpoint = 0;
        for (int day = 1; day <= horizon; ++day) {
            for (int q = 0; q < queries_per_day; ++q) {
                double h_eff = params.hit_model == HitModel::concentration_scaled ? h * p : h;
                double cost = (1.0 - h_eff) * params.c_generate + h_eff * params.c_retrieve;
                cost += params.writeback == WritebackMode::every_query
                            ? params.c_writeback
                            : (1.0 - h_eff) * params.c_writeback;
                cumulative += cost;
                h = h + base.alpha * (1.0 - h) * p;
            }
            if (next_checkpoint < targets.checkpoint_days.size() &&
                targets.checkpoint_days[next_checkpoint] == day) {
                double target = targets.compounding_millions[s][next_checkpoint] * 1e6;
                double rel = std::fabs(cumulative - target) / target;
                fit.worst_rel_error = std::max(fit.worst_rel_error, rel);
                double chunk = targets.chunk_millions[next_checkpoint] * 1e6;
                double lc = targets.long_context_millions[next_checkpoint] * 1e6;
                if (!(cumulative > chunk && cumulative < lc)) fit.ranking_ok = false;
                ++next_checkpoint;
            }
        }
    }
    return fit;
}

bool better_fit(const Fitness& a, const Fitness& b) {
    if (a.ranking_ok != b.ranking_ok) return a.ranking_ok;
    return a.worst_rel_error < b.worst_rel_error;
}

}  // namespace

CalibrationResult calibrate(const CalibrationTargets& targets, const SearchSpace& space,
                            const CoverageParams& coverage_base, int queries_per_day) {
    if (space.c_generate.empty() || space.c_retrieve.empty() || space.c_writeback.empty() ||
        space.hit_models.empty() || space.writeback_modes.empty()) {
        throw SimulationError("empty search space");
    }
    if (queries_per_day < 1) throw SimulationError("queries_per_day must be at least 1");
    validate_coverage(coverage_base);

    CompoundingParams best;
    Fitness best_fit;
    bool first = true;
    for (HitModel hm : space.hit_models) {
        for (WritebackMode wm : space.writeback_modes) {
            for (double cg : space.c_generate) {
                for (double cr : space.c_retrieve) {
                    for (double cw : space.c_writeback) {
                        CompoundingParams candidate{cg, cr, cw, hm, wm};
                        Fitness fit =
                            score_params(candidate, targets, coverage_base, queries_per_day);
                        if (first || better_fit(fit, best_fit)) {
                            best = candidate;
                            best_fit = fit;
                            first = false;
                        }
                    }
                }
            }
        }
    }

    // Coordinate refinement with halving steps, flags frozen at the grid
    // winner. Accepts only strict improvements, so it terminates.
    const double initial_steps[3] = {1250.0, 500.0, 250.0};
    for (int halving = 0; halving < 6; ++halving) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (int axis = 0; axis < 3; ++axis) {
                double step = initial_steps[axis] / static_cast<double>(1 << halving);
                for (double direction : {+1.0, -1.0}) {
                    CompoundingParams candidate = best;
                    double* field = axis == 0   ? &candidate.c_generate
                                    : axis == 1 ? &candidate.c_retrieve
                                                : &candidate.c_writeback;
                    *field += direction * step;
                    if (*field < 0.0) continue;
                    Fitness fit =
                        score_params(candidate, targets, coverage_base, queries_per_day);
                    if (better_fit(fit, best_fit)) {
                        best = candidate;
                        best_fit = fit;
                        improved = true;
                    }
                }
            }
        }
    }

    CalibrationResult result;
    result.params = best;
    result.worst_rel_error = best_fit.worst_rel_error;
    result.ranking_ok = best_fit.ranking_ok;

    SimOptions options;
    options.days = targets.checkpoint_days.back();
    options.queries_per_day = queries_per_day;
    RegimeParams regimes;
    regimes.compounding = best;
    CoverageParams coverage = coverage_base;
    for (std::size_t s = 0; s < targets.concentrations.size(); ++s) {
        coverage.p = targets.concentrations[s];
        SimTrace trace = simulate_regime(Regime::compounding, options, coverage, regimes);
        for (std::size_t k = 0; k < targets.checkpoint_days.size(); ++k) {
            CellFit cell;
            cell.day = targets.checkpoint_days[k];
            cell.concentration = targets.concentrations[s];
            cell.target_millions = targets.compounding_millions[s][k];
            cell.simulated_millions = trace.cumulative_at(cell.day) / 1e6;
            cell.rel_error = std::fabs(cell.simulated_millions - cell.target_millions) /
                             cell.target_millions;
            result.cells.push_back(cell);
        }
    }
    return result;
}

std::string fit_report_json(const CalibrationResult& result) {
    ordered_json j;
    j["c_generate"] = result.params.c_generate;
    j["c_retrieve"] = result.params.c_retrieve;
    j["c_writeback"] = result.params.c_writeback;
    j["hit_model"] = hit_model_name(result.params.hit_model);
    j["writeback"] = writeback_mode_name(result.params.writeback);
    j["worst_rel_error"] = result.worst_rel_error;
    j["ranking_ok"] = result.ranking_ok;
    j["cells"] = ordered_json::array();
    for (const CellFit& cell : result.cells) {
        ordered_json c;
        c["day"] = cell.day;
        c["concentration"] = cell.concentration;
        c["target_millions"] = cell.target_millions;
        c["simulated_millions"] = cell.simulated_millions;
        c["rel_error"] = cell.rel_error;
        j["cells"].push_back(std::move(c));
    }
    return j.dump(2) + "\n";
}

}  // namespace sediment
