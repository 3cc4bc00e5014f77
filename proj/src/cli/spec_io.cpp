#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "affdim/cli.hpp"

namespace affdim::cli {

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw InvalidInput("spec: " + path + " must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw InvalidInput("spec: " + path + " is not finite");
  return x;
}

Vector vector_at(const json& j, int d, const std::string& path) {
  if (!j.is_array()) throw InvalidInput("spec: " + path + " must be an array");
  if (static_cast<int>(j.size()) != d)
    throw InvalidInput("spec: " + path + " has " + std::to_string(j.size()) + " entries, expected " + std::to_string(d));
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = number_at(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
  return v;
}

}  // namespace

IFSSpec parse_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput("spec: malformed JSON at " + line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  if (!doc.is_object()) throw InvalidInput("spec: top level must be an object");
  for (const auto& [key, _] : doc.items())
    if (key != "dimension" && key != "maps" && key != "meta") throw InvalidInput("spec: unknown field '" + key + "'");

  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer())
    throw InvalidInput("spec: dimension must be an integer");
  const int d = doc["dimension"].get<int>();
  if (d < 1 || d > 6) throw InvalidInput("spec: dimension must lie in 1..6");
  if (!doc.contains("maps") || !doc["maps"].is_array()) throw InvalidInput("spec: maps must be an array");
  const auto& maps = doc["maps"];
  if (maps.size() < 2) throw InvalidInput("spec: maps needs at least two entries");

  std::vector<Matrix> mats;
  std::vector<Vector> trans;
  std::vector<double> weights;
  std::size_t weighted = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::string at = "maps[" + std::to_string(i) + "]";
    const auto& m = maps[i];
    if (!m.is_object()) throw InvalidInput("spec: " + at + " must be an object");
    for (const auto& [key, _] : m.items())
      if (key != "matrix" && key != "translation" && key != "weight")
        throw InvalidInput("spec: " + at + " has unknown field '" + key + "'");
    if (!m.contains("matrix")) throw InvalidInput("spec: " + at + ".matrix is missing");
    if (!m.contains("translation")) throw InvalidInput("spec: " + at + ".translation is missing");
    const auto& rows = m["matrix"];
    if (!rows.is_array() || static_cast<int>(rows.size()) != d)
      throw InvalidInput("spec: " + at + ".matrix must have " + std::to_string(d) + " rows");
    Matrix a(d, d);
    for (int r = 0; r < d; ++r) a.row(r) = vector_at(rows[static_cast<std::size_t>(r)], d, at + ".matrix[" + std::to_string(r) + "]");
    mats.push_back(std::move(a));
    trans.push_back(vector_at(m["translation"], d, at + ".translation"));
    if (m.contains("weight")) {
      const double w = number_at(m["weight"], at + ".weight");
      if (!(w > 0.0)) throw InvalidInput("spec: " + at + ".weight must be positive");
      weights.push_back(w);
      ++weighted;
    }
  }

  std::optional<std::vector<double>> p;
  if (weighted != 0) {
    if (weighted != maps.size()) throw InvalidInput("spec: weights must be given on all maps or none");
    double total = 0.0;
    for (double w : weights) total += w;
    if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("spec: weights sum to " + std::to_string(total) + ", not 1");
    if (std::abs(total - 1.0) > 1e-12)
      for (double& w : weights) w /= total;
    p = std::move(weights);
  }

  std::map<std::string, std::string> meta;
  if (doc.contains("meta")) {
    if (!doc["meta"].is_object()) throw InvalidInput("spec: meta must be an object of strings");
    for (const auto& [key, value] : doc["meta"].items()) {
      if (!value.is_string()) throw InvalidInput("spec: meta." + key + " must be a string");
      meta[key] = value.get<std::string>();
    }
  }
  return IFSSpec{AffineIFS(std::move(mats), std::move(trans), std::move(p)), std::move(meta)};
}

IFSSpec read_spec_file(const std::string& path) { return parse_spec(read_file(path)); }

json spec_to_json(const IFSSpec& spec) {
  const auto& ifs = spec.ifs;
  const int d = ifs.dim();
  json maps = json::array();
  for (int i = 0; i < ifs.branches(); ++i) {
    json rows = json::array();
    for (int r = 0; r < d; ++r) {
      json row = json::array();
      for (int c = 0; c < d; ++c) row.push_back(ifs.matrix(i)(r, c));
      rows.push_back(row);
    }
    json t = json::array();
    for (int r = 0; r < d; ++r) t.push_back(ifs.translation(i)[r]);
    json m{{"matrix", rows}, {"translation", t}};
    if (ifs.weights()) m["weight"] = (*ifs.weights())[static_cast<std::size_t>(i)];
    maps.push_back(m);
  }
  json out{{"dimension", d}, {"maps", maps}};
  if (!spec.meta.empty()) out["meta"] = spec.meta;
  return out;
}

std::string spec_hash(const IFSSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : spec_to_json(spec).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for " + path);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kIoError;
  if (dynamic_cast<const ResourceError*>(&e)) return kBudget;
  if (dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const UnsupportedDimension*>(&e) ||
      dynamic_cast<const PreconditionError*>(&e))
    return kInputError;
  return kFail;
}

json make_report(const std::string& command, json inputs, json results, double seconds) {
  return json{{"version", kSchemaVersion},
              {"command", command},
              {"inputs", std::move(inputs)},
              {"results", std::move(results)},
              {"timing", {{"wall_seconds", seconds}}}};
}

}  // namespace affdim::cli
