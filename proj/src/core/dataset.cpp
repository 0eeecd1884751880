#include "core/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "core/rng.hpp"

namespace vicloud {

namespace {

bool is_zero_one_set(const std::set<double>& values, bool allow_subset) {
    for (const double v : values)
        if (v != 0.0 && v != 1.0) return false;
    if (allow_subset) return !values.empty();
    return values.size() == 2;  // exactly {0,1}
}

bool is_pm1_set(const std::set<double>& values, bool allow_subset) {
    for (const double v : values)
        if (v != -1.0 && v != 1.0) return false;
    if (allow_subset) return !values.empty();
    return values.size() == 2;  // exactly {-1,+1}
}

DataKind detect_kind(const Dataset& d, bool force_binary) {
    std::set<double> outcome_values(d.outcome.begin(), d.outcome.end());
    if (!is_pm1_set(outcome_values, force_binary)) return DataKind::continuous;
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        std::set<double> column_values(d.features.col(j).begin(), d.features.col(j).end());
        if (!is_zero_one_set(column_values, force_binary)) return DataKind::continuous;
    }
    return DataKind::binary_pm1;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream stream(line);
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& raw, Eigen::Index row, const std::string& column) {
    const std::string text = trim(raw);
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value))
        throw_data("csv: non-numeric cell \"" + text + "\" at row " + std::to_string(row) +
                   ", column " + column);
    return value;
}

void format_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

void Dataset::validate() const {
    require(n() >= 2, ErrorKind::data, "dataset: need at least 2 rows");
    require(p() >= 1, ErrorKind::data, "dataset: need at least 1 feature");
    require(outcome.size() == n(), ErrorKind::data, "dataset: outcome length mismatch");
    require(static_cast<Eigen::Index>(names.size()) == p(), ErrorKind::data,
            "dataset: feature name count mismatch");
    require(features.allFinite() && outcome.allFinite(), ErrorKind::data,
            "dataset: non-finite value");
    if (kind == DataKind::binary_pm1) {
        for (Eigen::Index i = 0; i < n(); ++i) {
            require(outcome[i] == 1.0 || outcome[i] == -1.0, ErrorKind::data,
                    "dataset: binary outcome must be -1 or +1");
            for (Eigen::Index j = 0; j < p(); ++j)
                require(features(i, j) == 0.0 || features(i, j) == 1.0, ErrorKind::data,
                        "dataset: binary feature must be 0 or 1");
        }
    }
}

CovarianceStructure CovarianceStructure::create(Matrix sigma_xx, Vector sigma_xy,
                                                double sigma_yy, bool means_removed) {
    const Eigen::Index p = sigma_xy.size();
    require(sigma_xx.rows() == p && sigma_xx.cols() == p, ErrorKind::config,
            "covariance: dimension mismatch");
    const double scale = std::max(1.0, sigma_xx.cwiseAbs().maxCoeff());
    require((sigma_xx - sigma_xx.transpose()).cwiseAbs().maxCoeff() <= 1e-8 * scale,
            ErrorKind::numeric, "covariance: sigma_xx is not symmetric");
    sigma_xx = 0.5 * (sigma_xx + sigma_xx.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_xx);
    require(eig.info() == Eigen::Success, ErrorKind::numeric,
            "covariance: eigendecomposition failed");
    const double floor = -1e-10 * std::max(sigma_xx.trace(), 1e-300);
    require(eig.eigenvalues().minCoeff() >= floor, ErrorKind::numeric,
            "covariance: sigma_xx is not positive semi-definite");
    require(sigma_yy >= 0.0, ErrorKind::numeric, "covariance: sigma_yy must be >= 0");
    return CovarianceStructure{std::move(sigma_xx), std::move(sigma_xy), sigma_yy,
                               means_removed};
}

Dataset load_csv(const std::string& path, const std::string& outcome_column,
                 bool force_binary) {
    std::ifstream file(path);
    if (!file) throw_data("csv: cannot open file: " + path);

    std::string line;
    if (!std::getline(file, line)) throw_data("csv: empty file: " + path);
    if (line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' && line[2] == '\xBF')
        line.erase(0, 3);  // UTF-8 BOM

    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trim(h);
    require(!header.empty(), ErrorKind::data, "csv: empty header row");
    {
        std::set<std::string> seen;
        for (const auto& h : header)
            require(seen.insert(h).second, ErrorKind::data,
                    "csv: duplicate column name \"" + h + "\"");
    }

    // Outcome selected by name first, by 0-based index as a fallback.
    Eigen::Index outcome_index = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == outcome_column) outcome_index = static_cast<Eigen::Index>(j);
    if (outcome_index < 0) {
        int parsed = -1;
        const auto [ptr, ec] = std::from_chars(
            outcome_column.data(), outcome_column.data() + outcome_column.size(), parsed);
        if (ec == std::errc{} && ptr == outcome_column.data() + outcome_column.size() &&
            parsed >= 0 && parsed < static_cast<int>(header.size()))
            outcome_index = parsed;
    }
    if (outcome_index < 0)
        throw_data("csv: outcome column \"" + outcome_column + "\" not found");

    std::vector<std::vector<double>> rows;
    Eigen::Index row_number = 0;  // 1-based over data rows in error messages
    while (std::getline(file, line)) {
        if (trim(line).empty()) continue;
        ++row_number;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw_data("csv: row " + std::to_string(row_number) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
        std::vector<double> values(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j)
            values[j] = parse_cell(cells[j], row_number, header[j]);
        rows.push_back(std::move(values));
    }
    require(rows.size() >= 2, ErrorKind::data, "csv: need at least 2 data rows");

    Dataset d;
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index p = static_cast<Eigen::Index>(header.size()) - 1;
    require(p >= 1, ErrorKind::data, "csv: need at least one feature column");
    d.features.resize(n, p);
    d.outcome.resize(n);
    for (std::size_t j = 0; j < header.size(); ++j)
        if (static_cast<Eigen::Index>(j) != outcome_index) d.names.push_back(header[j]);
    d.outcome_name = header[outcome_index];
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index k = 0;
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (static_cast<Eigen::Index>(j) == outcome_index)
                d.outcome[i] = rows[i][j];
            else
                d.features(i, k++) = rows[i][j];
        }
    }
    d.kind = detect_kind(d, force_binary);
    if (force_binary && d.kind != DataKind::binary_pm1)
        throw_data("csv: --force-binary set but values are not in {0,1}/{-1,+1}");
    d.validate();
    return d;
}

void save_csv(const Dataset& d, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw_data("csv: cannot write file: " + path);
    std::string out;
    for (const auto& name : d.names) {
        out += name;
        out += ',';
    }
    out += d.outcome_name;
    out += '\n';
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        for (Eigen::Index j = 0; j < d.p(); ++j) {
            format_double(out, d.features(i, j));
            out += ',';
        }
        format_double(out, d.outcome[i]);
        out += '\n';
    }
    file << out;
    if (!file) throw_data("csv: write failed: " + path);
}

Dataset normalize(const Dataset& d) {
    d.validate();
    Dataset out = d;
    const double n = static_cast<double>(d.n());
    auto normalize_column = [&](Eigen::Ref<Vector> column, const std::string& name) {
        const double mean = column.mean();
        const double variance = (column.array() - mean).square().sum() / n;
        require(variance > 0.0, ErrorKind::data,
                "normalize: zero-variance column \"" + name + "\"");
        column = (column.array() - mean) / std::sqrt(variance);
    };
    for (Eigen::Index j = 0; j < out.p(); ++j) {
        Vector column = out.features.col(j);
        normalize_column(column, out.names[static_cast<std::size_t>(j)]);
        out.features.col(j) = column;
    }
    normalize_column(out.outcome, out.outcome_name);
    out.kind = DataKind::continuous;
    return out;
}

Dataset binarize_outcome(const Dataset& d) {
    Dataset out = d;
    for (Eigen::Index i = 0; i < out.n(); ++i)
        out.outcome[i] = out.outcome[i] < 0.0 ? -1.0 : 1.0;
    out.kind = detect_kind(out, false);
    return out;
}

CovarianceStructure covariance_of(const Dataset& d) {
    require(d.n() >= 2, ErrorKind::data, "covariance: need at least 2 rows");
    const double n = static_cast<double>(d.n());
    Matrix sigma_xx = (d.features.transpose() * d.features) / n;
    Vector sigma_xy = (d.features.transpose() * d.outcome) / n;
    const double sigma_yy = d.outcome.squaredNorm() / n;

    const double value_scale =
        std::max({1.0, d.features.cwiseAbs().maxCoeff(), d.outcome.cwiseAbs().maxCoeff()});
    double max_mean = std::abs(d.outcome.mean());
    for (Eigen::Index j = 0; j < d.p(); ++j)
        max_mean = std::max(max_mean, std::abs(d.features.col(j).mean()));
    const bool centered = max_mean <= 1e-8 * value_scale;

    return CovarianceStructure::create(std::move(sigma_xx), std::move(sigma_xy), sigma_yy,
                                       centered);
}

Dataset gen_gaussian(const Matrix& corr_xx, const Vector& corr_xy, Eigen::Index n,
                     std::uint64_t seed) {
    const Eigen::Index p = corr_xy.size();
    require(p >= 1, ErrorKind::config, "gen: need at least one feature");
    require(corr_xx.rows() == p && corr_xx.cols() == p, ErrorKind::config,
            "gen: corr_xx must be p x p with p = len(corr_xy)");
    require(n >= 2, ErrorKind::config, "gen: need n >= 2");

    Matrix joint(p + 1, p + 1);
    joint.topLeftCorner(p, p) = 0.5 * (corr_xx + corr_xx.transpose());
    joint.topRightCorner(p, 1) = corr_xy;
    joint.bottomLeftCorner(1, p) = corr_xy.transpose();
    joint(p, p) = 1.0;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(joint);
    require(eig.info() == Eigen::Success, ErrorKind::numeric, "gen: eigensolver failed");
    require(eig.eigenvalues().minCoeff() > 1e-10, ErrorKind::numeric,
            "gen: joint correlation matrix of (X, Y) is not positive definite");
    Eigen::LLT<Matrix> llt(joint);
    require(llt.info() == Eigen::Success, ErrorKind::numeric,
            "gen: Cholesky factorization failed");
    const Matrix chol = llt.matrixL();

    Dataset d;
    d.features.resize(n, p);
    d.outcome.resize(n);
    Rng rng(seed);
    Vector z(p + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k <= p; ++k) z[k] = rng.normal();
        const Vector row = chol * z;
        d.features.row(i) = row.head(p).transpose();
        d.outcome[i] = row[p];
    }
    for (Eigen::Index j = 0; j < p; ++j) d.names.push_back("x" + std::to_string(j + 1));
    d.kind = DataKind::continuous;
    return d;
}

Dataset gen_binary(const std::map<std::string, std::pair<long, long>>& cell_counts,
                   std::uint64_t seed) {
    require(!cell_counts.empty(), ErrorKind::config, "gen: empty cell specification");
    const std::size_t p = cell_counts.begin()->first.size();
    require(p >= 1, ErrorKind::config, "gen: empty pattern key");

    long total = 0;
    for (const auto& [pattern, counts] : cell_counts) {
        require(pattern.size() == p, ErrorKind::config,
                "gen: pattern \"" + pattern + "\" length differs from others");
        for (const char ch : pattern)
            require(ch == '0' || ch == '1', ErrorKind::config,
                    "gen: pattern \"" + pattern + "\" must consist of 0/1");
        require(counts.first >= 0 && counts.second >= 0, ErrorKind::config,
                "gen: negative count for pattern \"" + pattern + "\"");
        total += counts.first + counts.second;
    }
    require(total > 0, ErrorKind::config, "gen: all cell counts are zero");

    Dataset d;
    d.features.resize(total, static_cast<Eigen::Index>(p));
    d.outcome.resize(total);
    Eigen::Index row = 0;
    for (const auto& [pattern, counts] : cell_counts) {
        auto emit = [&](long count, double y) {
            for (long k = 0; k < count; ++k, ++row) {
                for (std::size_t j = 0; j < p; ++j)
                    d.features(row, static_cast<Eigen::Index>(j)) =
                        pattern[j] == '1' ? 1.0 : 0.0;
                d.outcome[row] = y;
            }
        };
        emit(counts.first, 1.0);
        emit(counts.second, -1.0);
    }

    // Count-preserving Fisher-Yates shuffle of the rows.
    Rng rng(seed);
    for (Eigen::Index i = total - 1; i > 0; --i) {
        const Eigen::Index j =
            static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
        d.features.row(i).swap(d.features.row(j));
        std::swap(d.outcome[i], d.outcome[j]);
    }

    for (std::size_t j = 0; j < p; ++j) d.names.push_back("x" + std::to_string(j + 1));
    d.kind = DataKind::binary_pm1;
    return d;
}

}  // namespace vicloud
