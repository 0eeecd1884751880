#pragma once

#include <string>

#include "core/inference.hpp"
#include "core/linear.hpp"
#include "core/logistic.hpp"
#include "core/tree.hpp"
#include "core/vic.hpp"

namespace vicloud {

std::string ellipsoid_to_json(const Ellipsoid& e);
Ellipsoid ellipsoid_from_json(const std::string& text);

std::string covariance_to_json(const CovarianceStructure& cov);

std::string reliance_test_to_json(const RelianceTest& t,
                                  const std::string& feature_name);

std::string sampler_report_to_json(const SamplerReport& report);

std::string tune_table_csv(const TuneResult& tuned);
std::string tune_result_to_json(const TuneResult& tuned);

/// One row per point: loss, coefficients, reliance values.
std::string cloud_to_csv(const VICCloud& cloud);
std::string cloud_provenance_json(const VICCloud& cloud);

/// Reads back any CSV with mr_* columns (cloud or tree-cloud exports);
/// beta_*/loss columns are kept when present.
VICCloud cloud_from_csv(const std::string& path);

/// One row per table: subset id, flip bitmask, loss, reliance values.
std::string tree_cloud_to_csv(const TreeCloud& cloud);

/// Synthetic-data specs: {"corr_xx": [[..]], "corr_xy": [..], "n": int,
/// "seed": int} for Gaussian data; {"cells": {"01": [pos, neg], ..},
/// "seed": int} for exact-count binary data.
Dataset dataset_from_spec_json(const std::string& text,
                               std::uint64_t seed_override = 0,
                               bool has_seed_override = false);

/// FNV-1a 64 content hash, hex-encoded; used in run manifests.
std::string file_hash_hex(const std::string& path);

}  // namespace vicloud
