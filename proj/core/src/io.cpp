#include "steer/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace steer {

namespace {

using nlohmann::json;

json matrix_to_json(const HermitianOperator& h) {
  json rows = json::array();
  for (std::size_t r = 0; r < h.dim(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < h.dim(); ++c) row.push_back(json::array({h(r, c).real(), h(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string where(const std::string& path) { return path.empty() ? "document" : path; }

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(std::string("missing field \"") + key + "\"");
  return *it;
}

std::size_t count_field(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
    throw FormatError(std::string("field \"") + key + "\" must be a positive integer");
  }
  return v.get<std::size_t>();
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw FormatError(path + ": expected a number");
  return v.get<double>();
}

HermitianOperator matrix_from_json(const json& rows, std::size_t dim, const std::string& path) {
  if (!rows.is_array() || rows.size() != dim) {
    throw FormatError(where(path) + ": expected " + std::to_string(dim) + " rows");
  }
  ComplexMatrix m(dim, dim);
  for (std::size_t r = 0; r < dim; ++r) {
    const json& row = rows[r];
    if (!row.is_array() || row.size() != dim) {
      throw FormatError(path + "[" + std::to_string(r) + "]: expected " + std::to_string(dim) + " entries");
    }
    for (std::size_t c = 0; c < dim; ++c) {
      const std::string at = path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]";
      const json& e = row[c];
      if (!e.is_array() || e.size() != 2) throw FormatError(at + ": expected [re, im]");
      m(r, c) = complex(number(e[0], at), number(e[1], at));
    }
  }
  return HermitianOperator(m);
}

json parse(std::string_view text) {
  try {
    json doc = json::parse(text.begin(), text.end());
    if (!doc.is_object()) throw FormatError("document root must be an object");
    const json& version = field(doc, "version");
    if (!version.is_string() || version.get<std::string>() != kDocumentVersion) {
      throw FormatError(std::string("unsupported document version, expected \"") + kDocumentVersion + "\"");
    }
    return doc;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string assemblage_to_json(const Assemblage& assemblage, int indent) {
  json doc;
  doc["version"] = kDocumentVersion;
  doc["n_inputs"] = assemblage.n_inputs();
  doc["n_outcomes"] = assemblage.n_outcomes();
  doc["dim_b"] = assemblage.dim_b();
  json elements = json::array();
  for (std::size_t x = 0; x < assemblage.n_inputs(); ++x) {
    json row = json::array();
    for (std::size_t a = 0; a < assemblage.n_outcomes(); ++a) row.push_back(matrix_to_json(assemblage.element(x, a)));
    elements.push_back(std::move(row));
  }
  doc["elements"] = std::move(elements);
  return doc.dump(indent);
}

Assemblage assemblage_from_json(std::string_view text) {
  const json doc = parse(text);
  const std::size_t nx = count_field(doc, "n_inputs");
  const std::size_t na = count_field(doc, "n_outcomes");
  const std::size_t d = count_field(doc, "dim_b");
  const json& el = field(doc, "elements");
  if (!el.is_array() || el.size() != nx) throw FormatError("elements: expected n_inputs rows");
  std::vector<HermitianOperator> elements;
  for (std::size_t x = 0; x < nx; ++x) {
    if (!el[x].is_array() || el[x].size() != na) {
      throw FormatError("elements[" + std::to_string(x) + "]: expected n_outcomes matrices");
    }
    for (std::size_t a = 0; a < na; ++a) {
      elements.push_back(
          matrix_from_json(el[x][a], d, "elements[" + std::to_string(x) + "][" + std::to_string(a) + "]"));
    }
  }
  return Assemblage(nx, na, d, std::move(elements));
}

std::string model_to_json(const LhsModel& model, int indent) {
  json doc;
  doc["version"] = kDocumentVersion;
  doc["n_inputs"] = model.n_inputs();
  doc["n_outcomes"] = model.n_outcomes();
  doc["dim_b"] = model.dim_b();
  json sig = json::array();
  for (const auto& s : model.sigmas()) sig.push_back(matrix_to_json(s));
  doc["sigma_lambdas"] = std::move(sig);
  return doc.dump(indent);
}

LhsModel model_from_json(std::string_view text) {
  const json doc = parse(text);
  const std::size_t nx = count_field(doc, "n_inputs");
  const std::size_t na = count_field(doc, "n_outcomes");
  const std::size_t d = count_field(doc, "dim_b");
  const json& sig = field(doc, "sigma_lambdas");
  if (!sig.is_array()) throw FormatError("sigma_lambdas: expected an array");
  std::vector<HermitianOperator> s;
  for (std::size_t l = 0; l < sig.size(); ++l) {
    s.push_back(matrix_from_json(sig[l], d, "sigma_lambdas[" + std::to_string(l) + "]"));
  }
  return LhsModel(nx, na, d, std::move(s));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

}  // namespace steer
