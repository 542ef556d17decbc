#pragma once

// On-disk formats shared by the CLI stages.
//
//   instances JSONL  {"id": .., "polys": [[[num, den, [e1,e2,e3]], ..], ..], "varmap": {..}}
//   labels CSV       id,label   (label 0..5 or DISCARD)
//   feature CSV      id,label,f000..fNNN, plus <stem>.schema.json and
//                    <stem>.meta.json sidecars

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadaug/augmentation.hpp"
#include "cadaug/instance.hpp"

namespace cadaug::io {

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

nlohmann::ordered_json instance_to_json(const ProblemInstance &inst);
ProblemInstance instance_from_json(const nlohmann::json &j);

void write_instances_jsonl(std::ostream &out, const std::vector<ProblemInstance> &instances);
std::vector<ProblemInstance> read_instances_jsonl(std::istream &in);

using LabelMap = std::map<std::string, std::optional<OrderingLabel>>;

void write_labels_csv(std::ostream &out, const std::vector<std::string> &ids,
                      const std::vector<std::optional<OrderingLabel>> &labels);
/// Discarded instances map to nullopt.
LabelMap read_labels_csv(std::istream &in);

/// Shortest-round-trip is not required; values use 17 significant digits.
std::string format_double(double v);

void write_feature_csv(std::ostream &out, const Dataset &ds);
/// Rows only; provenance, role and schema come from the sidecars.
std::vector<Row> read_feature_csv(std::istream &in, std::size_t expected_columns);

std::filesystem::path schema_sidecar(const std::filesystem::path &csv);
std::filesystem::path meta_sidecar(const std::filesystem::path &csv);

/// Writes the CSV and both sidecars. `extra_meta` is merged into the
/// provenance sidecar (seed, mode, ...).
void write_dataset(const std::filesystem::path &csv, const Dataset &ds,
                   const nlohmann::ordered_json &extra_meta = nlohmann::ordered_json::object());
Dataset read_dataset(const std::filesystem::path &csv);

nlohmann::json read_json_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, const std::string &text);

} // namespace cadaug::io
