#include "core/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vicloud {

using nlohmann::json;

namespace {

json matrix_to_json_rows(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vector vector_from_json(const json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    Eigen::Index i = 0;
    for (const auto& item : j) v[i++] = item.get<double>();
    return v;
}

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw_config(std::string(what) + ": malformed JSON");
    return j;
}

json ellipsoid_json(const Ellipsoid& e) {
    json j;
    j["center"] = vector_to_json(e.center);
    j["radii"] = vector_to_json(e.radii);
    j["rotation"] = matrix_to_json_rows(e.rotation);  // row-major
    return j;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string ellipsoid_to_json(const Ellipsoid& e) { return ellipsoid_json(e).dump(2); }

Ellipsoid ellipsoid_from_json(const std::string& text) {
    const json j = parse(text, "ellipsoid");
    require(j.contains("center") && j.contains("radii") && j.contains("rotation"),
            ErrorKind::config, "ellipsoid: missing center/radii/rotation");
    Ellipsoid e;
    e.center = vector_from_json(j["center"]);
    e.radii = vector_from_json(j["radii"]);
    const auto& rows = j["rotation"];
    e.rotation.resize(static_cast<Eigen::Index>(rows.size()), e.center.size());
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        require(static_cast<Eigen::Index>(row.size()) == e.center.size(),
                ErrorKind::config, "ellipsoid: ragged rotation matrix");
        Eigen::Index k = 0;
        for (const auto& item : row) e.rotation(i, k++) = item.get<double>();
        ++i;
    }
    e.validate();
    return e;
}

std::string covariance_to_json(const CovarianceStructure& cov) {
    json j;
    j["sigma_xx"] = matrix_to_json_rows(cov.sigma_xx);
    j["sigma_xy"] = vector_to_json(cov.sigma_xy);
    j["sigma_yy"] = cov.sigma_yy;
    j["means_removed"] = cov.means_removed;
    j["moment_convention"] = "second moments divide by n";
    return j.dump(2);
}

std::string reliance_test_to_json(const RelianceTest& t, const std::string& feature_name) {
    json j;
    j["feature"] = feature_name;
    j["feature_index"] = t.j + 1;  // 1-based in reports
    j["mr_hat"] = t.mr_hat;
    j["sigma_hat"] = t.sigma_hat;
    j["z_stat"] = t.z_stat;
    j["p_value"] = t.p_value;
    j["n"] = t.n;
    return j.dump(2);
}

std::string sampler_report_to_json(const SamplerReport& report) {
    json j;
    j["l_star"] = report.l_star;
    j["beta_hat"] = vector_to_json(report.beta_hat);
    j["box_scale_used"] = report.box_scale_used;
    j["survival_rate"] = report.survival_rate;
    j["final_ellipsoid"] = ellipsoid_json(report.final_ellipsoid);
    json rounds = json::array();
    for (const auto& round : report.rounds) {
        json r;
        r["retained_count"] = round.retained_count;
        r["ellipsoid"] = ellipsoid_json(round.ellipsoid);
        rounds.push_back(std::move(r));
    }
    j["rounds"] = std::move(rounds);
    return j.dump(2);
}

std::string tune_table_csv(const TuneResult& tuned) {
    std::string out = "r,M,survival_rate\n";
    for (const auto& row : tuned.table)
        out += fmt17(row.r) + "," + std::to_string(row.m) + "," +
               fmt17(row.survival_rate) + "\n";
    return out;
}

std::string tune_result_to_json(const TuneResult& tuned) {
    json j;
    j["chosen_r"] = tuned.chosen_r;
    j["chosen_m"] = tuned.chosen_m;
    json rows = json::array();
    for (const auto& row : tuned.table)
        rows.push_back({{"r", row.r}, {"M", row.m}, {"survival_rate", row.survival_rate}});
    j["table"] = std::move(rows);
    return j.dump(2);
}

std::string cloud_to_csv(const VICCloud& cloud) {
    require(!cloud.points.empty(), ErrorKind::config, "cloud: nothing to export");
    const Eigen::Index beta_dim = cloud.points.front().beta.size();
    const Eigen::Index mr_dim = cloud.points.front().mr.size();
    std::string out = "loss";
    const bool intercept = beta_dim == mr_dim + 1;
    for (Eigen::Index j = 0; j < beta_dim; ++j)
        out += ",beta_" + std::to_string(intercept ? j : j + 1);
    for (Eigen::Index j = 0; j < mr_dim; ++j) out += ",mr_" + std::to_string(j + 1);
    out += '\n';
    for (const auto& pt : cloud.points) {
        out += fmt17(pt.loss);
        for (Eigen::Index j = 0; j < beta_dim; ++j) out += "," + fmt17(pt.beta[j]);
        for (Eigen::Index j = 0; j < mr_dim; ++j) out += "," + fmt17(pt.mr[j]);
        out += '\n';
    }
    return out;
}

std::string cloud_provenance_json(const VICCloud& cloud) {
    json j;
    j["model_class"] = cloud.model_class;
    j["variant"] = cloud.variant == MRVariant::diff ? "diff" : "ratio";
    j["epsilon"] = cloud.epsilon;
    j["c"] = cloud.c;
    j["seed"] = cloud.seed;
    j["n_points"] = cloud.points.size();
    j["feature_names"] = cloud.feature_names;
    j["moment_convention"] = "second moments divide by n";
    if (!cloud.sampler_settings.empty())
        j["sampler"] = parse(cloud.sampler_settings, "provenance");
    return j.dump(2);
}

VICCloud cloud_from_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw_data("cloud: cannot open file: " + path);
    std::string line;
    if (!std::getline(file, line)) throw_data("cloud: empty file: " + path);

    std::vector<std::string> header;
    {
        std::stringstream stream(line);
        std::string cell;
        while (std::getline(stream, cell, ',')) header.push_back(cell);
    }
    std::vector<int> mr_cols, beta_cols;
    int loss_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j].rfind("mr_", 0) == 0) mr_cols.push_back(static_cast<int>(j));
        if (header[j].rfind("beta_", 0) == 0) beta_cols.push_back(static_cast<int>(j));
        if (header[j] == "loss") loss_col = static_cast<int>(j);
    }
    require(!mr_cols.empty(), ErrorKind::data, "cloud: no mr_* columns in " + path);

    VICCloud cloud;
    for (const int j : mr_cols)
        cloud.feature_names.push_back(header[static_cast<std::size_t>(j)].substr(3));
    while (std::getline(file, line)) {
        if (line.empty()) continue;
        std::vector<double> cells;
        std::stringstream stream(line);
        std::string cell;
        while (std::getline(stream, cell, ',')) {
            try {
                cells.push_back(std::stod(cell));
            } catch (...) {
                throw_data("cloud: non-numeric cell in " + path);
            }
        }
        require(cells.size() == header.size(), ErrorKind::data,
                "cloud: ragged row in " + path);
        ReliancePoint pt;
        pt.mr.resize(static_cast<Eigen::Index>(mr_cols.size()));
        for (std::size_t k = 0; k < mr_cols.size(); ++k)
            pt.mr[static_cast<Eigen::Index>(k)] =
                cells[static_cast<std::size_t>(mr_cols[k])];
        pt.beta.resize(static_cast<Eigen::Index>(beta_cols.size()));
        for (std::size_t k = 0; k < beta_cols.size(); ++k)
            pt.beta[static_cast<Eigen::Index>(k)] =
                cells[static_cast<std::size_t>(beta_cols[k])];
        if (loss_col >= 0) pt.loss = cells[static_cast<std::size_t>(loss_col)];
        cloud.points.push_back(std::move(pt));
    }
    require(!cloud.points.empty(), ErrorKind::data, "cloud: no data rows in " + path);
    return cloud;
}

std::string tree_cloud_to_csv(const TreeCloud& cloud) {
    std::string out = "subset_id,subset,flips,loss";
    const Eigen::Index p = static_cast<Eigen::Index>(cloud.feature_names.size());
    for (Eigen::Index j = 0; j < p; ++j) out += ",mr_" + std::to_string(j + 1);
    out += '\n';
    for (const auto& entry : cloud.entries) {
        out += std::to_string(entry.subset_id);
        out += ',';
        std::string subset;
        for (const Eigen::Index j : entry.feature_subset) {
            if (!subset.empty()) subset += ';';
            subset += std::to_string(j + 1);
        }
        out += subset.empty() ? "-" : subset;
        out += ',' + std::to_string(entry.flip_mask);
        out += ',' + fmt17(entry.loss);
        for (Eigen::Index j = 0; j < entry.mr.size(); ++j) out += ',' + fmt17(entry.mr[j]);
        out += '\n';
    }
    return out;
}

Dataset dataset_from_spec_json(const std::string& text, std::uint64_t seed_override,
                               bool has_seed_override) {
    const json j = parse(text, "spec");
    std::uint64_t seed = 0;
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (has_seed_override) seed = seed_override;

    if (j.contains("cells")) {
        std::map<std::string, std::pair<long, long>> cells;
        for (const auto& [pattern, counts] : j["cells"].items()) {
            require(counts.is_array() && counts.size() == 2, ErrorKind::config,
                    "spec: cells values must be [positive, negative] counts");
            cells[pattern] = {counts[0].get<long>(), counts[1].get<long>()};
        }
        return gen_binary(cells, seed);
    }

    require(j.contains("corr_xx") && j.contains("corr_xy") && j.contains("n"),
            ErrorKind::config, "spec: expected corr_xx, corr_xy, n (or cells)");
    const auto& xy = j["corr_xy"];
    const Eigen::Index p = static_cast<Eigen::Index>(xy.size());
    Vector corr_xy = vector_from_json(xy);
    const auto& xx = j["corr_xx"];
    require(static_cast<Eigen::Index>(xx.size()) == p, ErrorKind::config,
            "spec: corr_xx must be p x p");
    Matrix corr_xx(p, p);
    Eigen::Index i = 0;
    for (const auto& row : xx) {
        require(static_cast<Eigen::Index>(row.size()) == p, ErrorKind::config,
                "spec: corr_xx must be p x p");
        Eigen::Index k = 0;
        for (const auto& item : row) corr_xx(i, k++) = item.get<double>();
        ++i;
    }
    return gen_gaussian(corr_xx, corr_xy, j["n"].get<Eigen::Index>(), seed);
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw_data("hash: cannot open file: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buffer[4096];
    while (file.read(buffer, sizeof(buffer)) || file.gcount() > 0) {
        for (std::streamsize i = 0; i < file.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buffer[i]);
            h *= 0x100000001b3ULL;
        }
        if (!file) break;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace vicloud
