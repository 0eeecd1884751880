// vic - command-line front end for the vicloud shared library.
//
// Every subcommand writes its artifacts plus a manifest.json (inputs hash,
// seed, version, wall time) into --out. Re-running a command with the same
// inputs and seed reproduces the artifact files byte for byte. Exit codes:
// 0 ok, 1 configuration problem, 2 data problem, 3 numeric failure.

#include <vicloud.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- handles

template <typename T, void (*Free)(T*)>
class Handle {
public:
    Handle() = default;
    ~Handle() { reset(); }
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    T** out() {
        reset();
        return &raw_;
    }
    operator T*() const { return raw_; }
    T* get() const { return raw_; }
    void reset() {
        if (raw_) Free(raw_);
        raw_ = nullptr;
    }

private:
    T* raw_ = nullptr;
};

using DatasetH = Handle<vicl_dataset, vicl_dataset_free>;
using CovH = Handle<vicl_cov, vicl_cov_free>;
using EllipsoidH = Handle<vicl_ellipsoid, vicl_ellipsoid_free>;
using CloudH = Handle<vicl_cloud, vicl_cloud_free>;
using ModelH = Handle<vicl_model, vicl_model_free>;
using TreeTableH = Handle<vicl_tree_table, vicl_tree_table_free>;
using TreeCloudH = Handle<vicl_tree_cloud, vicl_tree_cloud_free>;

class Str {
public:
    Str() = default;
    ~Str() { vicl_string_free(raw_); }
    Str(const Str&) = delete;
    Str& operator=(const Str&) = delete;
    char** out() {
        vicl_string_free(raw_);
        raw_ = nullptr;
        return &raw_;
    }
    std::string str() const { return raw_ ? raw_ : ""; }

private:
    char* raw_ = nullptr;
};

[[noreturn]] void die(vicl_status status) {
    std::fprintf(stderr, "vic: error: %s\n", vicl_last_error());
    std::exit(static_cast<int>(status));
}

void check(vicl_status status) {
    if (status != VICL_OK) die(status);
}

[[noreturn]] void die_config(const std::string& message) {
    std::fprintf(stderr, "vic: error: %s\n", message.c_str());
    std::exit(1);
}

// ------------------------------------------------------------ run context

struct RunContext {
    std::string command;
    std::string out_dir;
    std::uint64_t seed = 42;
    json params = json::object();
    json inputs = json::object();
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    std::uint64_t stage_seed(const std::string& label) const {
        return vicl_label_seed(label.c_str(), seed);
    }

    void record_input(const std::string& path) {
        Str hash;
        check(vicl_file_hash(path.c_str(), hash.out()));
        inputs[path] = hash.str();
    }

    std::string path_of(const std::string& name) const {
        return (std::filesystem::path(out_dir) / name).string();
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream file(path_of(name), std::ios::binary);
        if (!file) die_config("cannot write " + path_of(name));
        file << content;
        if (!file) die_config("write failed: " + path_of(name));
        outputs.push_back(name);
    }

    void finish() {
        json manifest;
        manifest["command"] = command;
        manifest["version"] = vicl_version();
        manifest["seed"] = seed;
        manifest["params"] = params;
        manifest["inputs"] = inputs;
        manifest["outputs"] = outputs;
        manifest["wall_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - started)
                                  .count();
        std::ofstream file(path_of("manifest.json"), std::ios::binary);
        if (!file) die_config("cannot write manifest.json");
        file << manifest.dump(2) << "\n";
    }
};

RunContext make_context(const std::string& command, const std::string& out_dir,
                        std::uint64_t seed) {
    RunContext ctx;
    ctx.command = command;
    ctx.out_dir = out_dir;
    ctx.seed = seed;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) die_config("cannot create output directory " + out_dir);
    return ctx;
}

// ------------------------------------------------------------ config file

json g_config = json::object();

const std::vector<std::string> kConfigKeys = {
    "seed",        "out",          "epsilon",    "c",          "outcome",
    "data",        "synthetic",    "moments",    "boundary",   "interior",
    "clusters",    "features",     "max_features", "tol",      "max_iter",
    "sampler",     "r_candidates", "m_candidates", "r_bar",    "stability",
    "normalize",   "force_binary", "binarize_outcome"};

const std::vector<std::string> kSamplerKeys = {
    "n_per_round", "box_scale", "r", "m_rounds", "r_bar", "mr_shuffles",
    "radial_exponent"};

void load_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) die_config("cannot open config file " + path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    g_config = json::parse(buffer.str(), nullptr, false);
    if (g_config.is_discarded() || !g_config.is_object())
        die_config("config file " + path + " is not a JSON object");
    for (const auto& [key, value] : g_config.items()) {
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
            die_config("config: unknown field \"" + key + "\"");
        if (key == "sampler") {
            if (!value.is_object()) die_config("config: \"sampler\" must be an object");
            for (const auto& [skey, svalue] : value.items()) {
                (void)svalue;
                if (std::find(kSamplerKeys.begin(), kSamplerKeys.end(), skey) ==
                    kSamplerKeys.end())
                    die_config("config: unknown sampler field \"" + skey + "\"");
            }
        }
    }
}

// Flags override config values; config overrides built-in defaults.
template <typename T>
void config_default(const CLI::Option* option, const char* key, T& value) {
    if (option && option->count() > 0) return;
    if (!g_config.contains(key)) return;
    try {
        value = g_config.at(key).get<T>();
    } catch (...) {
        die_config(std::string("config: field \"") + key + "\" has the wrong type");
    }
}

void sampler_from_config(const vicl_sampler_config& defaults, vicl_sampler_config& cfg) {
    cfg = defaults;
    if (!g_config.contains("sampler")) return;
    const json& s = g_config["sampler"];
    if (s.contains("n_per_round")) cfg.n_per_round = s["n_per_round"].get<int>();
    if (s.contains("box_scale")) cfg.box_scale = s["box_scale"].get<double>();
    if (s.contains("r")) cfg.r = s["r"].get<double>();
    if (s.contains("m_rounds")) cfg.m_rounds = s["m_rounds"].get<int>();
    if (s.contains("r_bar")) cfg.r_bar = s["r_bar"].get<double>();
    if (s.contains("mr_shuffles")) cfg.mr_shuffles = s["mr_shuffles"].get<int>();
    if (s.contains("radial_exponent"))
        cfg.radial_exponent = s["radial_exponent"].get<double>();
}

// --------------------------------------------------------------- helpers

std::string read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) die_config("cannot open " + path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ','))
        if (!token.empty()) values.push_back(std::stod(token));
    return values;
}

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> values;
    for (const double v : parse_doubles(text)) values.push_back(static_cast<int>(v));
    return values;
}

struct DataOptions {
    std::string data;
    std::string outcome = "y";
    bool normalize = false;
    bool force_binary = false;
    bool binarize = false;
};

void add_data_options(CLI::App* cmd, DataOptions& opts, bool required = true) {
    auto* data = cmd->add_option("--data", opts.data, "input CSV (header row required)");
    if (required) data->required();
    cmd->add_option("--outcome", opts.outcome, "outcome column name or 0-based index");
    cmd->add_flag("--normalize", opts.normalize,
                  "rescale columns to mean 0, variance 1 before the run");
    cmd->add_flag("--force-binary", opts.force_binary,
                  "treat {0,1} subsets as binary features");
    cmd->add_flag("--binarize-outcome", opts.binarize, "map the outcome to +-1 by sign");
}

void load_data(RunContext& ctx, const DataOptions& opts, DatasetH& d) {
    ctx.record_input(opts.data);
    check(vicl_dataset_load_csv(opts.data.c_str(), opts.outcome.c_str(),
                                opts.force_binary ? 1 : 0, d.out()));
    if (opts.binarize) {
        DatasetH mapped;
        check(vicl_dataset_binarize_outcome(d, mapped.out()));
        d.reset();
        check(vicl_dataset_binarize_outcome(mapped, d.out()));
    }
    if (opts.normalize) {
        DatasetH normalized;
        check(vicl_dataset_normalize(d, normalized.out()));
        std::swap(*d.out(), *normalized.out());
    }
}

// Reads a synthetic spec and returns the population moments it prescribes
// (unit variances, the given correlations).
void moments_from_spec(RunContext& ctx, const std::string& path, CovH& cov) {
    ctx.record_input(path);
    const json spec = json::parse(read_file(path), nullptr, false);
    if (spec.is_discarded()) die_config("spec " + path + " is not valid JSON");
    if (!spec.contains("corr_xx") || !spec.contains("corr_xy"))
        die_config("spec " + path + " needs corr_xx and corr_xy for moment mode");
    const auto corr_xy = spec["corr_xy"].get<std::vector<double>>();
    const auto rows = spec["corr_xx"].get<std::vector<std::vector<double>>>();
    const int32_t p = static_cast<int32_t>(corr_xy.size());
    std::vector<double> flat;
    for (const auto& row : rows)
        for (const double v : row) flat.push_back(v);
    if (static_cast<int32_t>(rows.size()) != p ||
        static_cast<int32_t>(flat.size()) != p * p)
        die_config("spec " + path + ": corr_xx must be p x p");
    check(vicl_cov_create(p, flat.data(), corr_xy.data(), 1.0, 1, cov.out()));
}

std::vector<std::string> cloud_names(const vicl_cloud* cloud) {
    // Names travel inside the cloud; re-derive them from the bounds CSV to
    // keep the C surface narrow.
    Str csv;
    check(vicl_cloud_bounds_csv(cloud, csv.out()));
    std::vector<std::string> names;
    std::stringstream stream(csv.str());
    std::string line;
    std::getline(stream, line);  // header
    while (std::getline(stream, line)) {
        if (line.empty()) continue;
        names.push_back(line.substr(0, line.find(',')));
    }
    return names;
}

void apply_dataset_names(const vicl_dataset* d, vicl_cloud* cloud) {
    const int32_t p = vicl_dataset_cols(d);
    std::vector<const char*> names;
    for (int32_t j = 0; j < p; ++j) names.push_back(vicl_dataset_feature_name(d, j));
    check(vicl_cloud_set_names(cloud, names.data(), p));
}

// Default VID feature selection: everything up to four features, otherwise
// the four with the largest reliance upper bounds.
std::vector<int32_t> default_vid_features(const vicl_cloud* cloud) {
    const int32_t p = vicl_cloud_mr_dim(cloud);
    std::vector<int32_t> all(p);
    for (int32_t j = 0; j < p; ++j) all[j] = j;
    if (p <= 4) return all;

    const int64_t n = vicl_cloud_size(cloud);
    std::vector<double> upper(p, -1e300);
    std::vector<double> mr(p);
    for (int64_t i = 0; i < n; ++i) {
        check(vicl_cloud_point(cloud, i, nullptr, mr.data(), nullptr));
        for (int32_t j = 0; j < p; ++j) upper[j] = std::max(upper[j], mr[j]);
    }
    std::sort(all.begin(), all.end(), [&](int32_t a, int32_t b) {
        if (upper[a] != upper[b]) return upper[a] > upper[b];
        return a < b;
    });
    all.resize(4);
    std::sort(all.begin(), all.end());
    return all;
}

struct VidOptions {
    std::string features;  // 1-based comma list; empty = default selection
    int clusters = 0;
    std::string format = "both";  // svg | csv | both
};

void add_vid_options(CLI::App* cmd, VidOptions& opts) {
    cmd->add_option("--features", opts.features,
                    "1-based feature indices for the panel grid, e.g. 1,2,4");
    cmd->add_option("--clusters", opts.clusters,
                    "number of k-means clusters to color points by");
    cmd->add_option("--format", opts.format, "vid output: svg, csv, or both")
        ->check(CLI::IsMember({"svg", "csv", "both"}));
}

void emit_vid(RunContext& ctx, const vicl_cloud* cloud, const VidOptions& opts,
              const std::string& stem = "vid") {
    std::vector<int32_t> features;
    if (opts.features.empty()) {
        features = default_vid_features(cloud);
    } else {
        for (const int j : parse_ints(opts.features)) {
            if (j < 1 || j > vicl_cloud_mr_dim(cloud))
                die_config("--features: index " + std::to_string(j) + " out of range");
            features.push_back(j - 1);
        }
    }

    std::vector<int32_t> labels;
    const int32_t* labels_ptr = nullptr;
    if (opts.clusters > 0) {
        labels.resize(static_cast<std::size_t>(vicl_cloud_size(cloud)));
        check(vicl_cloud_kmeans(cloud, opts.clusters, ctx.stage_seed("kmeans"),
                                labels.data()));
        labels_ptr = labels.data();
    }

    if (opts.format == "svg" || opts.format == "both") {
        Str svg;
        check(vicl_cloud_render_vid(cloud, features.data(),
                                    static_cast<int32_t>(features.size()), labels_ptr, 1,
                                    svg.out()));
        ctx.write(stem + ".svg", svg.str());
    }
    if (opts.format == "csv" || opts.format == "both") {
        Str csv;
        check(vicl_cloud_render_vid(cloud, features.data(),
                                    static_cast<int32_t>(features.size()), labels_ptr, 0,
                                    csv.out()));
        ctx.write(stem + ".csv", csv.str());
    }

    json selected = json::array();
    for (const int32_t f : features) selected.push_back(f + 1);
    ctx.params["vid_features"] = selected;
}

void emit_bounds(RunContext& ctx, const vicl_cloud* cloud) {
    Str csv;
    check(vicl_cloud_bounds_csv(cloud, csv.out()));
    ctx.write("bounds.csv", csv.str());
}

void emit_cloud(RunContext& ctx, const vicl_cloud* cloud) {
    check(vicl_cloud_save(cloud, ctx.path_of("cloud.csv").c_str(),
                          ctx.path_of("cloud.json").c_str()));
    ctx.outputs.push_back("cloud.csv");
    ctx.outputs.push_back("cloud.json");
}

json vector_json(const std::vector<double>& v) {
    json out = json::array();
    for (const double x : v) out.push_back(x);
    return out;
}

// ------------------------------------------------------------ subcommands

struct CommonArgs {
    std::string out = ".";
    std::uint64_t seed = 42;
};

void resolve_common(const CLI::Option* out_opt, const CLI::Option* seed_opt,
                    CommonArgs& args) {
    config_default(out_opt, "out", args.out);
    config_default(seed_opt, "seed", args.seed);
    if (out_opt->count() == 0 && !g_config.contains("out")) {
        if (const char* root = std::getenv("VIC_OUT_ROOT")) args.out = root;
    }
}

int cmd_ingest(const DataOptions& data_opts, const CommonArgs& common) {
    RunContext ctx = make_context("ingest", common.out, common.seed);
    ctx.params = {{"data", data_opts.data},
                  {"outcome", data_opts.outcome},
                  {"normalize", data_opts.normalize},
                  {"force_binary", data_opts.force_binary}};
    DatasetH d;
    load_data(ctx, data_opts, d);

    check(vicl_dataset_save_csv(d, ctx.path_of("dataset.csv").c_str()));
    ctx.outputs.push_back("dataset.csv");

    CovH cov;
    check(vicl_cov_from_dataset(d, cov.out()));
    Str cov_json;
    check(vicl_cov_to_json(cov, cov_json.out()));
    ctx.write("covariance.json", cov_json.str() + "\n");

    // Joint second-moment matrix as CSV, documented convention up top.
    const json parsed = json::parse(cov_json.str());
    const int32_t p = vicl_cov_dim(cov);
    std::string csv = "# second moments E[.] divide by n (not n-1)\n";
    csv += "name";
    for (int32_t j = 0; j < p; ++j)
        csv += std::string(",") + vicl_dataset_feature_name(d, j);
    csv += ",outcome\n";
    char buf[40];
    for (int32_t i = 0; i < p; ++i) {
        csv += vicl_dataset_feature_name(d, i);
        for (int32_t j = 0; j < p; ++j) {
            std::snprintf(buf, sizeof(buf), ",%.17g",
                          parsed["sigma_xx"][i][j].get<double>());
            csv += buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.17g", parsed["sigma_xy"][i].get<double>());
        csv += buf;
        csv += '\n';
    }
    csv += "outcome";
    for (int32_t j = 0; j < p; ++j) {
        std::snprintf(buf, sizeof(buf), ",%.17g", parsed["sigma_xy"][j].get<double>());
        csv += buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g\n", parsed["sigma_yy"].get<double>());
    csv += buf;
    ctx.write("covariance.csv", csv);

    json summary;
    summary["rows"] = vicl_dataset_rows(d);
    summary["features"] = vicl_dataset_cols(d);
    summary["binary"] = vicl_dataset_is_binary(d) != 0;
    summary["means_removed"] = parsed["means_removed"];
    ctx.write("summary.json", summary.dump(2) + "\n");
    ctx.finish();
    return 0;
}

int cmd_gen(const std::string& spec_path, const CLI::Option* seed_opt, bool binarize,
            bool normalize, const CommonArgs& common) {
    RunContext ctx = make_context("gen", common.out, common.seed);
    ctx.params = {{"spec", spec_path}, {"binarize_outcome", binarize},
                  {"normalize", normalize}};
    ctx.record_input(spec_path);

    const std::string spec = read_file(spec_path);
    DatasetH d;
    if (seed_opt->count() > 0) {
        const std::uint64_t seed = ctx.stage_seed("gen");
        check(vicl_dataset_from_spec_json(spec.c_str(), &seed, d.out()));
        ctx.params["seed_override"] = seed;
    } else {
        check(vicl_dataset_from_spec_json(spec.c_str(), nullptr, d.out()));
    }
    if (binarize) {
        DatasetH mapped;
        check(vicl_dataset_binarize_outcome(d, mapped.out()));
        std::swap(*d.out(), *mapped.out());
    }
    if (normalize) {
        DatasetH normalized;
        check(vicl_dataset_normalize(d, normalized.out()));
        std::swap(*d.out(), *normalized.out());
    }
    check(vicl_dataset_save_csv(d, ctx.path_of("dataset.csv").c_str()));
    ctx.outputs.push_back("dataset.csv");
    ctx.finish();
    return 0;
}

int cmd_fit_linear(const DataOptions& data_opts, double c, const CommonArgs& common) {
    RunContext ctx = make_context("fit-linear", common.out, common.seed);
    ctx.params = {{"data", data_opts.data}, {"c", c}, {"normalize", data_opts.normalize}};
    DatasetH d;
    load_data(ctx, data_opts, d);
    CovH cov;
    check(vicl_cov_from_dataset(d, cov.out()));

    const int32_t p = vicl_cov_dim(cov);
    std::vector<double> beta(p), mr(p);
    double loss = 0.0;
    check(vicl_best_ridge(cov, c, beta.data(), &loss));
    check(vicl_mr_linear_vector(cov, beta.data(), mr.data()));

    json fit;
    fit["beta"] = vector_json(beta);
    fit["loss"] = loss;
    fit["mr_diff"] = vector_json(mr);
    json names = json::array();
    for (int32_t j = 0; j < p; ++j) names.push_back(vicl_dataset_feature_name(d, j));
    fit["features"] = names;
    ctx.write("fit.json", fit.dump(2) + "\n");
    ctx.finish();
    return 0;
}

int cmd_fit_logistic(const DataOptions& data_opts, double tol, int max_iter,
                     const CommonArgs& common) {
    RunContext ctx = make_context("fit-logistic", common.out, common.seed);
    ctx.params = {{"data", data_opts.data}, {"tol", tol}, {"max_iter", max_iter}};
    DatasetH d;
    load_data(ctx, data_opts, d);

    const int32_t p = vicl_dataset_cols(d);
    std::vector<double> beta(p + 1), se(p + 1);
    double loss = 0.0;
    check(vicl_fit_logistic(d, tol, max_iter, beta.data(), &loss, se.data()));

    ModelH model;
    check(vicl_model_logistic(beta.data(), p, model.out()));
    std::vector<double> mr(p);
    for (int32_t j = 0; j < p; ++j)
        check(vicl_mr_permute(model, d, j, 1, 20,
                              ctx.stage_seed("fit-logistic.mr." + std::to_string(j)),
                              &mr[j]));

    json fit;
    fit["beta"] = vector_json(beta);  // intercept first
    fit["loss"] = loss;
    fit["standard_errors"] = vector_json(se);
    fit["mr_ratio"] = vector_json(mr);
    json names = json::array();
    for (int32_t j = 0; j < p; ++j) names.push_back(vicl_dataset_feature_name(d, j));
    fit["features"] = names;
    ctx.write("fit.json", fit.dump(2) + "\n");
    ctx.finish();
    return 0;
}

int cmd_rashomon_linear(const DataOptions& data_opts, const std::string& moments,
                        double epsilon, double c, const std::string& contains,
                        const CommonArgs& common) {
    RunContext ctx = make_context("rashomon-linear", common.out, common.seed);
    ctx.params = {{"epsilon", epsilon}, {"c", c}};
    CovH cov;
    DatasetH d;
    if (!moments.empty()) {
        ctx.params["moments"] = moments;
        moments_from_spec(ctx, moments, cov);
    } else if (!data_opts.data.empty()) {
        ctx.params["data"] = data_opts.data;
        load_data(ctx, data_opts, d);
        check(vicl_cov_from_dataset(d, cov.out()));
    } else {
        die_config("rashomon-linear needs --data or --moments");
    }

    EllipsoidH ellipsoid;
    check(vicl_rashomon_ellipsoid(cov, c, epsilon, ellipsoid.out()));
    Str text;
    check(vicl_ellipsoid_to_json(ellipsoid, text.out()));

    json out = json::parse(text.str());
    if (!contains.empty()) {
        const std::vector<double> beta = parse_doubles(contains);
        if (static_cast<int32_t>(beta.size()) != vicl_cov_dim(cov))
            die_config("--contains needs exactly p coefficients");
        int inside = 0;
        check(vicl_contains_linear(cov, c, epsilon, beta.data(), &inside));
        out["contains_query"] = {{"beta", vector_json(beta)}, {"contained", inside != 0}};
    }
    ctx.write("ellipsoid.json", out.dump(2) + "\n");
    ctx.finish();
    return 0;
}

int cmd_rashomon_logistic(const DataOptions& data_opts, double epsilon,
                          const vicl_sampler_config& cfg, const CommonArgs& common) {
    RunContext ctx = make_context("rashomon-logistic", common.out, common.seed);
    ctx.params = {{"data", data_opts.data},
                  {"epsilon", epsilon},
                  {"n_per_round", cfg.n_per_round},
                  {"box_scale", cfg.box_scale},
                  {"r", cfg.r},
                  {"m_rounds", cfg.m_rounds},
                  {"r_bar", cfg.r_bar},
                  {"mr_shuffles", cfg.mr_shuffles},
                  {"radial_exponent", cfg.radial_exponent}};
    DatasetH d;
    load_data(ctx, data_opts, d);

    vicl_sampler_config seeded = cfg;
    seeded.seed = ctx.stage_seed("sampler");
    CloudH cloud;
    Str report;
    check(vicl_sample_rashomon_logistic(d, epsilon, &seeded, cloud.out(), report.out()));
    apply_dataset_names(d, cloud);
    ctx.write("report.json", report.str() + "\n");
    emit_cloud(ctx, cloud);
    ctx.finish();
    return 0;
}

int cmd_rashomon_tree(const DataOptions& data_opts, double epsilon, int max_features,
                      bool shift_report, const CommonArgs& common) {
    RunContext ctx = make_context("rashomon-tree", common.out, common.seed);
    ctx.params = {{"data", data_opts.data},
                  {"epsilon", epsilon},
                  {"max_features", max_features},
                  {"shift_report", shift_report}};
    DatasetH d;
    load_data(ctx, data_opts, d);

    TreeCloudH trees;
    check(vicl_tree_rashomon(d, epsilon, max_features, trees.out()));
    Str csv;
    check(vicl_tree_cloud_csv(trees, csv.out()));
    ctx.write("trees.csv", csv.str());

    if (shift_report) {
        // Single-flip reliance-shift intervals for every single-feature table.
        std::string shifts = "feature,cell,gap,lo,hi,exact\n";
        char buf[200];
        for (int32_t j = 0; j < vicl_dataset_cols(d); ++j) {
            TreeTableH table;
            check(vicl_tree_table_create(d, &j, 1, table.out()));
            double best_loss = 0.0;
            uint32_t n_cells = 0;
            check(vicl_tree_table_info(table, &n_cells, &best_loss));
            if (best_loss <= 0.0) continue;  // ratio reliance undefined
            double mr_star = 0.0;
            check(vicl_tree_mr_best(table, j, &mr_star));
            for (uint32_t cell = 0; cell < n_cells; ++cell) {
                int64_t pos = 0, neg = 0, gap = 0;
                check(vicl_tree_table_cell(table, cell, &pos, &neg, &gap, nullptr));
                if (pos + neg == 0) continue;
                double lo = 0.0, hi = 0.0, exact = 0.0;
                check(vicl_tree_shift_interval(table, cell, j, mr_star, &lo, &hi));
                check(vicl_tree_shift_exact(table, cell, j, &exact));
                std::snprintf(buf, sizeof(buf), "%s,%u,%lld,%.17g,%.17g,%.17g\n",
                              vicl_dataset_feature_name(d, j), cell,
                              static_cast<long long>(gap), lo, hi, exact);
                shifts += buf;
            }
        }
        ctx.write("shifts.csv", shifts);
    }
    ctx.finish();
    return 0;
}

int cmd_vic_linear(const DataOptions& data_opts, const std::string& moments,
                   const std::string& synthetic, bool estimate, double epsilon, double c,
                   int boundary, int interior, const std::string& mr_point,
                   const VidOptions& vid, const CommonArgs& common) {
    RunContext ctx = make_context("vic linear", common.out, common.seed);
    ctx.params = {{"epsilon", epsilon},   {"c", c},
                  {"boundary", boundary}, {"interior", interior},
                  {"estimate", estimate}};

    CovH cov;
    DatasetH d;
    if (!synthetic.empty()) {
        ctx.params["synthetic"] = synthetic;
        if (estimate) {
            ctx.record_input(synthetic);
            const std::string spec = read_file(synthetic);
            check(vicl_dataset_from_spec_json(spec.c_str(), nullptr, d.out()));
            check(vicl_cov_from_dataset(d, cov.out()));
        } else {
            // Population moments straight from the spec's correlations.
            moments_from_spec(ctx, synthetic, cov);
        }
    } else if (!moments.empty()) {
        ctx.params["moments"] = moments;
        moments_from_spec(ctx, moments, cov);
    } else if (!data_opts.data.empty()) {
        ctx.params["data"] = data_opts.data;
        load_data(ctx, data_opts, d);
        check(vicl_cov_from_dataset(d, cov.out()));
    } else {
        die_config("vic linear needs --data, --moments, or --synthetic");
    }
    const int32_t p = vicl_cov_dim(cov);

    // Exact coefficient ellipsoid.
    EllipsoidH rashomon;
    check(vicl_rashomon_ellipsoid(cov, c, epsilon, rashomon.out()));
    Str rashomon_json;
    check(vicl_ellipsoid_to_json(rashomon, rashomon_json.out()));
    ctx.write("rashomon_ellipsoid.json", rashomon_json.str() + "\n");

    // Reliance ellipsoid: closed form when the features are uncorrelated,
    // the linearized expansion otherwise.
    EllipsoidH vic_ellipsoid;
    std::string vic_kind = "closed_form";
    if (vicl_vic_uncorrelated(cov, c, epsilon, vic_ellipsoid.out()) != VICL_OK) {
        vic_kind = "linearized";
        check(vicl_vic_ellipsoid_approx(cov, c, epsilon, nullptr, vic_ellipsoid.out()));
    }
    {
        Str text;
        check(vicl_ellipsoid_to_json(vic_ellipsoid, text.out()));
        json out = json::parse(text.str());
        out["kind"] = vic_kind;
        ctx.write("vic_ellipsoid.json", out.dump(2) + "\n");
    }

    // Per-feature bounds on the dropped quadratic term.
    {
        std::vector<double> box(p), bounds(p);
        check(vicl_rashomon_box_radii(cov, c, epsilon, box.data()));
        for (int32_t j = 0; j < p; ++j)
            check(vicl_vic_error_bound(cov, j, box.data(), &bounds[j]));
        json out;
        out["box_radii"] = vector_json(box);
        out["bounds"] = vector_json(bounds);
        ctx.write("error_bounds.json", out.dump(2) + "\n");
    }

    CloudH cloud;
    check(vicl_vic_forward_map(cov, c, epsilon, boundary, interior,
                               ctx.stage_seed("vic.forward"), cloud.out()));
    if (d.get()) apply_dataset_names(d, cloud);
    emit_cloud(ctx, cloud);
    emit_bounds(ctx, cloud);
    emit_vid(ctx, cloud, vid);

    if (!mr_point.empty()) {
        const std::vector<double> target = parse_doubles(mr_point);
        if (static_cast<int32_t>(target.size()) != p)
            die_config("--mr-point needs exactly p values");
        int converged = 0, contained = 0;
        std::vector<double> beta(p);
        check(vicl_vic_membership(cov, c, epsilon, target.data(), &converged, beta.data(),
                                  &contained));
        json out;
        out["mr"] = vector_json(target);
        out["converged"] = converged != 0;
        out["contained"] = contained != 0;
        out["beta"] = vector_json(beta);
        ctx.write("membership.json", out.dump(2) + "\n");
    }
    ctx.finish();
    return 0;
}

int cmd_vic_logistic(const DataOptions& data_opts, double epsilon,
                     const vicl_sampler_config& cfg, bool tune,
                     const std::string& r_candidates, const std::string& m_candidates,
                     double stability, const VidOptions& vid, const CommonArgs& common) {
    RunContext ctx = make_context("vic logistic", common.out, common.seed);
    ctx.params = {{"data", data_opts.data}, {"epsilon", epsilon}, {"tune", tune}};
    DatasetH d;
    load_data(ctx, data_opts, d);

    vicl_sampler_config seeded = cfg;
    seeded.seed = ctx.stage_seed("sampler");

    if (tune) {
        const std::vector<double> rs = parse_doubles(r_candidates);
        const std::vector<int> ms = parse_ints(m_candidates);
        if (rs.empty() || ms.empty())
            die_config("--tune needs --r-candidates and --m-candidates");
        double chosen_r = 0.0;
        int chosen_m = 0;
        Str table;
        check(vicl_tune_sampler(d, epsilon, rs.data(), static_cast<int>(rs.size()),
                                ms.data(), static_cast<int>(ms.size()), seeded.r_bar,
                                &seeded, stability, &chosen_r, &chosen_m, table.out()));
        ctx.write("survival.csv", table.str());
        seeded.r = chosen_r;
        seeded.m_rounds = chosen_m;
        ctx.params["chosen_r"] = chosen_r;
        ctx.params["chosen_m"] = chosen_m;
    }

    CloudH cloud;
    Str report;
    check(vicl_sample_rashomon_logistic(d, epsilon, &seeded, cloud.out(), report.out()));
    apply_dataset_names(d, cloud);
    ctx.write("report.json", report.str() + "\n");
    emit_cloud(ctx, cloud);
    emit_bounds(ctx, cloud);
    emit_vid(ctx, cloud, vid);
    ctx.finish();
    return 0;
}

int cmd_vic_tree(const DataOptions& data_opts, double epsilon, int max_features,
                 const VidOptions& vid, const CommonArgs& common) {
    RunContext ctx = make_context("vic tree", common.out, common.seed);
    ctx.params = {{"data", data_opts.data},
                  {"epsilon", epsilon},
                  {"max_features", max_features}};
    DatasetH d;
    load_data(ctx, data_opts, d);

    TreeCloudH trees;
    check(vicl_tree_rashomon(d, epsilon, max_features, trees.out()));
    Str csv;
    check(vicl_tree_cloud_csv(trees, csv.out()));
    ctx.write("trees.csv", csv.str());

    CloudH cloud;
    check(vicl_tree_cloud_as_cloud(trees, cloud.out()));
    emit_bounds(ctx, cloud);
    emit_vid(ctx, cloud, vid);
    ctx.finish();
    return 0;
}

int cmd_vid(const std::string& cloud_path, const VidOptions& vid,
            const CommonArgs& common) {
    RunContext ctx = make_context("vid", common.out, common.seed);
    ctx.params = {{"cloud", cloud_path}};
    ctx.record_input(cloud_path);
    CloudH cloud;
    check(vicl_cloud_load_csv(cloud_path.c_str(), cloud.out()));
    emit_vid(ctx, cloud, vid);
    ctx.finish();
    return 0;
}

int cmd_bounds(const std::string& cloud_path, const CommonArgs& common) {
    RunContext ctx = make_context("bounds", common.out, common.seed);
    ctx.params = {{"cloud", cloud_path}};
    ctx.record_input(cloud_path);
    CloudH cloud;
    check(vicl_cloud_load_csv(cloud_path.c_str(), cloud.out()));
    emit_bounds(ctx, cloud);
    ctx.finish();
    return 0;
}

int cmd_tune(const DataOptions& data_opts, double epsilon,
             const std::string& r_candidates, const std::string& m_candidates,
             double r_bar, double stability, const vicl_sampler_config& cfg,
             const CommonArgs& common) {
    RunContext ctx = make_context("tune", common.out, common.seed);
    ctx.params = {{"data", data_opts.data},
                  {"epsilon", epsilon},
                  {"r_candidates", r_candidates},
                  {"m_candidates", m_candidates},
                  {"r_bar", r_bar},
                  {"stability", stability}};
    DatasetH d;
    load_data(ctx, data_opts, d);

    const std::vector<double> rs = parse_doubles(r_candidates);
    const std::vector<int> ms = parse_ints(m_candidates);
    if (rs.empty() || ms.empty()) die_config("tune needs r and M candidate lists");

    vicl_sampler_config seeded = cfg;
    seeded.seed = ctx.stage_seed("sampler");
    double chosen_r = 0.0;
    int chosen_m = 0;
    Str table;
    check(vicl_tune_sampler(d, epsilon, rs.data(), static_cast<int>(rs.size()), ms.data(),
                            static_cast<int>(ms.size()), r_bar, &seeded, stability,
                            &chosen_r, &chosen_m, table.out()));
    ctx.write("survival.csv", table.str());
    json chosen;
    chosen["chosen_r"] = chosen_r;
    chosen["chosen_m"] = chosen_m;
    ctx.write("tuned.json", chosen.dump(2) + "\n");
    ctx.finish();
    return 0;
}

int cmd_test(const DataOptions& data_opts, int feature, double null_value,
             const CommonArgs& common) {
    RunContext ctx = make_context("test", common.out, common.seed);
    ctx.params = {{"data", data_opts.data}, {"feature", feature}, {"null", null_value}};
    DatasetH d;
    load_data(ctx, data_opts, d);
    if (feature < 1 || feature > vicl_dataset_cols(d))
        die_config("--feature is 1-based and must be within the feature count");

    Str text;
    check(vicl_mr_wald(d, feature - 1, null_value, nullptr, nullptr, nullptr, nullptr,
                       text.out()));
    ctx.write("test.json", text.str() + "\n");
    std::printf("%s\n", text.str().c_str());
    ctx.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rashomon sets, model reliance, and variable importance clouds"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags take precedence)")
        ->immediate_callback()
        ->each([](const std::string& path) { load_config(path); });

    CommonArgs common;
    DataOptions data_opts;
    VidOptions vid_opts;
    vicl_sampler_config sampler;
    vicl_sampler_config_default(&sampler);

    double epsilon = 0.05, c = 0.0, tol = 1e-8, null_value = 0.0;
    double r_bar = 2.0, stability = 0.02;
    int max_iter = 100, max_features = 4, boundary = 1000, interior = 0, feature = 1;
    bool tune_flag = false, estimate = false, shift_report = false;
    bool gen_binarize = false, gen_normalize = false;
    std::string moments, synthetic, mr_point, cloud_path, spec_path;
    std::string r_candidates = "1.05,1.4,2.0", m_candidates = "1,2,3";

    auto add_common = [&](CLI::App* cmd) {
        auto* out_opt = cmd->add_option("--out", common.out, "output directory");
        auto* seed_opt = cmd->add_option("--seed", common.seed, "master seed");
        cmd->parse_complete_callback(
            [out_opt, seed_opt, &common] { resolve_common(out_opt, seed_opt, &common ? common : common); });
        return std::pair{out_opt, seed_opt};
    };

    auto add_sampler_options = [&](CLI::App* cmd) {
        cmd->add_option("--n-per-round", sampler.n_per_round, "draws per round (N)");
        cmd->add_option("--box-scale", sampler.box_scale,
                        "initial box half-width in standard errors (<=0: auto)");
        cmd->add_option("--r", sampler.r, "ellipsoid inflation factor (> 1)");
        cmd->add_option("--m-rounds", sampler.m_rounds, "refit rounds (M)");
        cmd->add_option("--r-bar", sampler.r_bar, "diagnostic inflation bound");
        cmd->add_option("--mr-shuffles", sampler.mr_shuffles,
                        "permutations per feature for reliance");
        cmd->add_option("--radial-exponent", sampler.radial_exponent,
                        "radial draw is uniform^exponent (1 = uniform)");
    };

    // ingest ---------------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "validate a CSV, export moments");
    add_data_options(ingest, data_opts);
    add_common(ingest);
    ingest->callback([&] { std::exit(cmd_ingest(data_opts, common)); });

    // gen ------------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate data from a JSON spec");
    gen->add_option("--spec", spec_path, "synthetic spec JSON")->required();
    gen->add_flag("--binarize-outcome", gen_binarize, "map the outcome to +-1 by sign");
    gen->add_flag("--normalize", gen_normalize, "normalize the generated columns");
    auto gen_opts = add_common(gen);
    gen->callback([&, gen_opts] {
        std::exit(cmd_gen(spec_path, gen_opts.second, gen_binarize, gen_normalize, common));
    });

    // fit-linear -----------------------------------------------------------
    auto* fitl = app.add_subcommand("fit-linear", "least-squares / ridge fit");
    add_data_options(fitl, data_opts);
    fitl->add_option("--c", c, "ridge penalty");
    add_common(fitl);
    fitl->callback([&] { std::exit(cmd_fit_linear(data_opts, c, common)); });

    // fit-logistic ----------------------------------------------------------
    auto* fitg = app.add_subcommand("fit-logistic", "logistic maximum likelihood fit");
    add_data_options(fitg, data_opts);
    fitg->add_option("--tol", tol, "gradient norm tolerance");
    fitg->add_option("--max-iter", max_iter, "iteration cap");
    add_common(fitg);
    fitg->callback([&] { std::exit(cmd_fit_logistic(data_opts, tol, max_iter, common)); });

    // rashomon-linear --------------------------------------------------------
    auto* rl = app.add_subcommand("rashomon-linear",
                                  "exact near-optimal coefficient ellipsoid");
    add_data_options(rl, data_opts, false);
    rl->add_option("--moments", moments, "spec JSON interpreted as exact moments");
    rl->add_option("--epsilon", epsilon, "loss slack factor");
    rl->add_option("--c", c, "ridge penalty");
    std::string contains;
    rl->add_option("--contains", contains, "comma-separated coefficients to test");
    add_common(rl);
    rl->callback([&] {
        std::exit(cmd_rashomon_linear(data_opts, moments, epsilon, c, contains, common));
    });

    // rashomon-logistic -------------------------------------------------------
    auto* rg = app.add_subcommand("rashomon-logistic",
                                  "sample the near-optimal logistic set");
    add_data_options(rg, data_opts);
    rg->add_option("--epsilon", epsilon, "loss slack factor");
    add_sampler_options(rg);
    add_common(rg);
    rg->callback([&] { std::exit(cmd_rashomon_logistic(data_opts, epsilon, sampler, common)); });

    // rashomon-tree -----------------------------------------------------------
    auto* rt = app.add_subcommand("rashomon-tree",
                                  "enumerate near-optimal binary decision tables");
    add_data_options(rt, data_opts);
    rt->add_option("--epsilon", epsilon, "loss slack factor");
    rt->add_option("--max-features", max_features, "largest feature subset (<= 6)");
    rt->add_flag("--shift-report", shift_report,
                 "emit single-flip reliance shift intervals");
    add_common(rt);
    rt->callback([&] {
        std::exit(cmd_rashomon_tree(data_opts, epsilon, max_features, shift_report, common));
    });

    // vic (end-to-end) ---------------------------------------------------------
    auto* vic = app.add_subcommand("vic", "end-to-end reliance cloud pipeline");
    vic->require_subcommand(1);
    auto make_linear = [&](CLI::App* lin) {
        add_data_options(lin, data_opts, false);
        lin->add_option("--moments", moments, "spec JSON interpreted as exact moments");
        lin->add_option("--synthetic", synthetic,
                        "synthetic spec; population moments unless --estimate");
        lin->add_flag("--estimate", estimate,
                      "sample the spec and estimate moments from the draw");
        lin->add_option("--epsilon", epsilon, "loss slack factor");
        lin->add_option("--c", c, "ridge penalty");
        lin->add_option("--boundary", boundary, "surface samples");
        lin->add_option("--interior", interior, "interior samples");
        lin->add_option("--mr-point", mr_point,
                        "reliance vector for a membership diagnostic");
        add_vid_options(lin, vid_opts);
        add_common(lin);
        lin->callback([&] {
            std::exit(cmd_vic_linear(data_opts, moments, synthetic, estimate, epsilon, c,
                                     boundary, interior, mr_point, vid_opts, common));
        });
    };
    auto make_logistic = [&](CLI::App* lg) {
        add_data_options(lg, data_opts);
        lg->add_option("--epsilon", epsilon, "loss slack factor");
        lg->add_flag("--tune", tune_flag, "pick (r, M) from the survival table first");
        lg->add_option("--r-candidates", r_candidates, "comma list for --tune");
        lg->add_option("--m-candidates", m_candidates, "comma list for --tune");
        lg->add_option("--stability", stability, "plateau threshold for --tune");
        add_sampler_options(lg);
        add_vid_options(lg, vid_opts);
        add_common(lg);
        lg->callback([&] {
            std::exit(cmd_vic_logistic(data_opts, epsilon, sampler, tune_flag,
                                       r_candidates, m_candidates, stability, vid_opts,
                                       common));
        });
    };
    auto make_tree = [&](CLI::App* tr) {
        add_data_options(tr, data_opts);
        tr->add_option("--epsilon", epsilon, "loss slack factor");
        tr->add_option("--max-features", max_features, "largest feature subset (<= 6)");
        add_vid_options(tr, vid_opts);
        add_common(tr);
        tr->callback([&] {
            std::exit(cmd_vic_tree(data_opts, epsilon, max_features, vid_opts, common));
        });
    };
    make_linear(vic->add_subcommand("linear", "ridge model class"));
    make_logistic(vic->add_subcommand("logistic", "logistic model class"));
    make_tree(vic->add_subcommand("tree", "binary decision-table class"));
    // Top-level aliases so `vic linear ...` works without the extra token.
    make_linear(app.add_subcommand("linear", "alias for `vic linear`"));
    make_logistic(app.add_subcommand("logistic", "alias for `vic logistic`"));
    make_tree(app.add_subcommand("tree", "alias for `vic tree`"));

    // vid ---------------------------------------------------------------------
    auto* vid = app.add_subcommand("vid", "render panels from a cloud CSV");
    vid->add_option("--cloud", cloud_path, "cloud CSV with mr_* columns")->required();
    add_vid_options(vid, vid_opts);
    add_common(vid);
    vid->callback([&] { std::exit(cmd_vid(cloud_path, vid_opts, common)); });

    // bounds --------------------------------------------------------------------
    auto* bounds = app.add_subcommand("bounds", "per-feature reliance bounds table");
    bounds->add_option("--cloud", cloud_path, "cloud CSV with mr_* columns")->required();
    add_common(bounds);
    bounds->callback([&] { std::exit(cmd_bounds(cloud_path, common)); });

    // tune ------------------------------------------------------------------------
    auto* tune = app.add_subcommand("tune", "survival table over (r, M) candidates");
    add_data_options(tune, data_opts);
    tune->add_option("--epsilon", epsilon, "loss slack factor");
    tune->add_option("--r-candidates", r_candidates, "comma list, ascending");
    tune->add_option("--m-candidates", m_candidates, "comma list, ascending");
    tune->add_option("--r-bar", r_bar, "diagnostic inflation bound");
    tune->add_option("--stability", stability, "plateau threshold");
    add_sampler_options(tune);
    add_common(tune);
    tune->callback([&] {
        std::exit(cmd_tune(data_opts, epsilon, r_candidates, m_candidates, r_bar,
                           stability, sampler, common));
    });

    // test --------------------------------------------------------------------------
    auto* test = app.add_subcommand("test", "zero-reliance hypothesis test");
    add_data_options(test, data_opts);
    test->add_option("--feature", feature, "1-based feature index")->required();
    test->add_option("--null", null_value, "null reliance value");
    add_common(test);
    test->callback([&] { std::exit(cmd_test(data_opts, feature, null_value, common)); });

    CLI11_PARSE(app, argc, argv);
    return 0;
}
