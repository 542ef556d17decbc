#include "cadaug/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace cadaug::io {

nlohmann::ordered_json instance_to_json(const ProblemInstance &inst) {
  nlohmann::ordered_json polys = nlohmann::ordered_json::array();
  for (const auto &p : inst.polynomials) {
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const auto &t : p.terms()) {
      const auto &e = t.monomial.exponents();
      terms.push_back({t.coeff.get_num().get_str(), t.coeff.get_den().get_str(),
                       {e[0], e[1], e[2]}});
    }
    polys.push_back(std::move(terms));
  }
  nlohmann::ordered_json varmap = nlohmann::ordered_json::object();
  for (const auto &[name, var] : inst.variable_map)
    varmap[name] = var.name();
  return {{"id", inst.id}, {"polys", polys}, {"varmap", varmap}};
}

ProblemInstance instance_from_json(const nlohmann::json &j) {
  ProblemInstance inst;
  inst.id = j.at("id").get<std::string>();
  for (const auto &poly : j.at("polys")) {
    std::vector<Term> terms;
    for (const auto &t : poly) {
      Rational c(Integer(t.at(0).get<std::string>(), 10), Integer(t.at(1).get<std::string>(), 10));
      if (c.get_den() == 0)
        throw FormatError(inst.id + ": zero denominator");
      c.canonicalize();
      auto e = t.at(2).get<std::vector<std::uint32_t>>();
      if (e.size() != kNumVars)
        throw FormatError(inst.id + ": exponent triple expected");
      terms.push_back({Monomial({e[0], e[1], e[2]}), c});
    }
    inst.polynomials.push_back(Polynomial::from_terms(std::move(terms)));
  }
  inst.polynomials = canonical_set(std::move(inst.polynomials));
  if (j.contains("varmap")) {
    // Object key order is not preserved by the parser; canonical variable
    // order recovers declaration order.
    for (const auto &[name, var] : j.at("varmap").items()) {
      auto v = var.get<std::string>();
      if (v.size() != 2 || v[0] != 'x' || v[1] < '1' || v[1] > '3')
        throw FormatError(inst.id + ": bad variable '" + v + "' in varmap");
      inst.variable_map.emplace_back(name, Variable(v[1] - '0'));
    }
    std::sort(inst.variable_map.begin(), inst.variable_map.end(),
              [](const auto &a, const auto &b) { return a.second < b.second; });
  }
  try {
    inst.validate();
  } catch (const std::invalid_argument &ex) {
    throw FormatError(ex.what());
  }
  return inst;
}

void write_instances_jsonl(std::ostream &out, const std::vector<ProblemInstance> &instances) {
  for (const auto &inst : instances)
    out << instance_to_json(inst).dump() << '\n';
}

std::vector<ProblemInstance> read_instances_jsonl(std::istream &in) {
  std::vector<ProblemInstance> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      out.push_back(instance_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception &ex) {
      throw FormatError("instances line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

void write_labels_csv(std::ostream &out, const std::vector<std::string> &ids,
                      const std::vector<std::optional<OrderingLabel>> &labels) {
  out << "id,label\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    out << ids[i] << ',' << (labels[i] ? std::to_string(labels[i]->index()) : "DISCARD") << '\n';
}

LabelMap read_labels_csv(std::istream &in) {
  LabelMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("id,", 0) == 0))
      continue;
    auto comma = line.rfind(',');
    if (comma == std::string::npos)
      throw FormatError("labels line " + std::to_string(lineno) + ": expected id,label");
    std::string id = line.substr(0, comma);
    std::string label = line.substr(comma + 1);
    if (label == "DISCARD") {
      out[id] = std::nullopt;
      continue;
    }
    if (label.size() != 1 || label[0] < '0' || label[0] > '5')
      throw FormatError("labels line " + std::to_string(lineno) + ": label must be 0..5");
    out[id] = OrderingLabel(label[0] - '0');
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_feature_csv(std::ostream &out, const Dataset &ds) {
  out << "id,label";
  char name[32];
  for (std::size_t i = 0; i < ds.schema.size(); ++i) {
    std::snprintf(name, sizeof name, ",f%03zu", i);
    out << name;
  }
  out << '\n';
  for (const auto &r : ds.rows) {
    out << r.id << ',' << r.label.index();
    for (double v : r.features)
      out << ',' << format_double(v);
    out << '\n';
  }
}

std::vector<Row> read_feature_csv(std::istream &in, std::size_t expected_columns) {
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      cells.push_back(cell);
    if (lineno == 1) {
      if (cells.size() < 2 || cells[0] != "id" || cells[1] != "label")
        throw FormatError("feature CSV must start with an id,label header");
      if (cells.size() - 2 != expected_columns)
        throw FormatError("feature CSV has " + std::to_string(cells.size() - 2) +
                          " columns, schema has " + std::to_string(expected_columns));
      continue;
    }
    if (cells.size() != expected_columns + 2)
      throw FormatError("feature CSV line " + std::to_string(lineno) + ": wrong number of cells");
    Row r;
    r.id = cells[0];
    try {
      r.label = OrderingLabel(std::stoi(cells[1]));
      r.features.reserve(expected_columns);
      for (std::size_t i = 2; i < cells.size(); ++i)
        r.features.push_back(std::stod(cells[i]));
    } catch (const std::exception &ex) {
      throw FormatError("feature CSV line " + std::to_string(lineno) + ": " + ex.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::filesystem::path schema_sidecar(const std::filesystem::path &csv) {
  auto p = csv;
  return p.replace_extension(".schema.json");
}

std::filesystem::path meta_sidecar(const std::filesystem::path &csv) {
  auto p = csv;
  return p.replace_extension(".meta.json");
}

void write_text_file(const std::filesystem::path &path, const std::string &text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out)
    throw std::runtime_error("write failed for " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FormatError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &ex) {
    throw FormatError(path.string() + ": " + ex.what());
  }
}

void write_dataset(const std::filesystem::path &csv, const Dataset &ds,
                   const nlohmann::ordered_json &extra_meta) {
  std::ostringstream body;
  write_feature_csv(body, ds);
  write_text_file(csv, body.str());
  write_text_file(schema_sidecar(csv), ds.schema.to_json().dump(2) + "\n");
  nlohmann::ordered_json meta = {{"provenance", to_string(ds.provenance)},
                                 {"role", to_string(ds.role)},
                                 {"rows", ds.rows.size()},
                                 {"class_counts", ds.class_counts()}};
  for (const auto &[k, v] : extra_meta.items())
    meta[k] = v;
  write_text_file(meta_sidecar(csv), meta.dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path &csv) {
  Dataset ds;
  ds.schema = FeatureSchema::from_json(read_json_file(schema_sidecar(csv)));
  auto meta = read_json_file(meta_sidecar(csv));
  ds.provenance = parse_provenance(meta.at("provenance").get<std::string>());
  ds.role = parse_role(meta.at("role").get<std::string>());
  std::ifstream in(csv, std::ios::binary);
  if (!in)
    throw FormatError("cannot open " + csv.string());
  ds.rows = read_feature_csv(in, ds.schema.size());
  return ds;
}

} // namespace cadaug::io
