#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dminer/pipeline.hpp"
#include "dminer/random_search.hpp"

namespace dminer {

std::string to_json(const SettingsPool& pool);
/// Accepts pools without a plan (fixtures); entries are re-sorted by fitness.
SettingsPool pool_from_json(const std::string& text);
SettingsPool read_pool(const std::filesystem::path& path);

std::string to_json(const PoolEvaluation& evaluation);
PoolEvaluation pool_eval_from_json(const std::string& text);

/// Random-search record of one test case.
std::string to_json(const RsRecord& record, const std::string& manifest_hash = {});
RsRecord rs_from_json(const std::string& text);
/// Every *.json file of `dir`, in path order.
std::vector<RsRecord> read_rs_dir(const std::filesystem::path& dir);

/// File name of a test case's random-search record.
std::string rs_file_name(std::size_t replication, const std::string& dataset);

/// Reads the embedded manifest hash of a JSON artifact ("" when absent).
std::string embedded_manifest_hash(const std::string& json_text);

/// JSON object text with a top-level "manifest_hash" field set.
std::string with_manifest_hash(const std::string& json_text, const std::string& hash);

}  // namespace dminer
