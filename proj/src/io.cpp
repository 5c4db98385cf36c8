#include "cohort/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace cohort {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == delimiter) {
      fields.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_number(const std::string& raw, std::size_t line_no, const std::string& column) {
  const std::string s = trim(raw);
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw Error("line " + std::to_string(line_no) + ": cannot parse '" + s +
                "' as a number for attribute '" + column + "'");
  return value;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

std::vector<AttributeSpec> load_schema(std::istream& in) {
  std::vector<AttributeSpec> specs;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (read_line(in, line)) {
    ++line_no;
    const std::string content = trim(line);
    if (content.empty() || content[0] == '#') continue;
    const auto fields = split(content, ',');
    if (fields.size() != 3)
      throw Error("schema line " + std::to_string(line_no) + ": expected name,kind,role");
    const std::string name = trim(fields[0]);
    const std::string kind = trim(fields[1]);
    const std::string role = trim(fields[2]);
    if (first_content) {
      first_content = false;
      if (name == "name" && kind == "kind" && role == "role") continue;  // optional header
    }
    if (name.empty())
      throw Error("schema line " + std::to_string(line_no) + ": empty attribute name");
    try {
      specs.push_back({name, attribute_kind_from_string(kind), attribute_role_from_string(role)});
    } catch (const Error& e) {
      throw Error("schema line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (specs.empty()) throw Error("schema defines no attributes");
  return specs;
}

std::vector<AttributeSpec> load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open schema file '" + path + "'");
  try {
    return load_schema(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

Dataset load_dataset(std::istream& in, const std::vector<AttributeSpec>& schema,
                     const LoadOptions& options) {
  std::size_t id_column = schema.size();  // sentinel: none
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema[j].role != AttributeRole::Identifier) continue;
    if (id_column != schema.size()) throw Error("schema has more than one identifier column");
    id_column = j;
  }

  std::vector<AttributeSpec> kept;
  for (std::size_t j = 0; j < schema.size(); ++j)
    if (j != id_column) kept.push_back(schema[j]);
  if (kept.empty()) throw Error("schema has no non-identifier attributes");

  std::string line;
  std::size_t line_no = 0;
  if (!read_line(in, line)) throw Error("dataset is empty; expected a header row");
  ++line_no;
  const auto header = split(line, options.delimiter);
  if (header.size() != schema.size())
    throw Error("line 1: header has " + std::to_string(header.size()) +
                " columns, schema defines " + std::to_string(schema.size()));
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (trim(header[j]) != schema[j].name)
      throw Error("line 1: header column " + std::to_string(j + 1) + " is '" +
                  trim(header[j]) + "', schema says '" + schema[j].name + "'");
  }

  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> ids;
  while (read_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, options.delimiter);
    if (fields.size() != schema.size())
      throw Error("line " + std::to_string(line_no) + ": expected " +
                  std::to_string(schema.size()) + " fields, got " +
                  std::to_string(fields.size()));
    std::vector<Cell> row;
    row.reserve(kept.size());
    std::string id = std::to_string(rows.size() + 1);
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const std::string value = trim(fields[j]);
      if (j == id_column) {
        if (value.empty())
          throw Error("line " + std::to_string(line_no) + ": empty patient id");
        id = value;
        continue;
      }
      if (value.empty() || value == options.missing_token) {
        row.push_back(std::nullopt);
        continue;
      }
      const double v = parse_number(value, line_no, schema[j].name);
      if (schema[j].kind == AttributeKind::Binary && v != 0.0 && v != 1.0)
        throw Error("line " + std::to_string(line_no) + ": binary attribute '" +
                    schema[j].name + "' has value " + value);
      row.push_back(v);
    }
    rows.push_back(std::move(row));
    ids.push_back(std::move(id));
  }
  if (rows.empty()) throw Error("dataset has a header but no patient rows");
  return Dataset(std::move(kept), std::move(rows), std::move(ids));
}

Dataset load_dataset_file(const std::string& path, const std::string& schema_path,
                          const LoadOptions& options) {
  const auto schema = load_schema_file(schema_path);
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file '" + path + "'");
  try {
    return load_dataset(in, schema, options);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_dataset_csv(std::ostream& out, const Dataset& d, const LoadOptions& options) {
  out << "patient_id";
  for (const auto& spec : d.specs()) out << options.delimiter << spec.name;
  out << '\n';
  for (std::size_t i = 0; i < d.n_patients(); ++i) {
    out << d.patient_ids()[i];
    for (std::size_t j = 0; j < d.n_attributes(); ++j) {
      const Cell& c = d.cell(i, j);
      out << options.delimiter << (c ? format_number(*c) : options.missing_token);
    }
    out << '\n';
  }
}

void write_schema(std::ostream& out, const Dataset& d) {
  out << "name,kind,role\n";
  out << "patient_id,categorical,identifier\n";
  for (const auto& spec : d.specs())
    out << spec.name << ',' << to_string(spec.kind) << ',' << to_string(spec.role) << '\n';
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace cohort
