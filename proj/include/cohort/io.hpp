#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cohort/dataset.hpp"

namespace cohort {

struct LoadOptions {
  char delimiter = ',';
  /// Token (besides the empty cell) read as missing.
  std::string missing_token = "NA";
};

/// Schema sidecar: one `name,kind,role` line per attribute; `#` comments and
/// an optional `name,kind,role` header are skipped. Kinds: binary,
/// continuous, categorical. Roles: marker, clinical, outcome, identifier.
std::vector<AttributeSpec> load_schema(std::istream& in);
std::vector<AttributeSpec> load_schema_file(const std::string& path);

/// Parses a delimited table whose header row matches the schema names in
/// order. At most one identifier column is allowed; its raw text supplies the
/// patient ids and it is not kept as a numeric attribute. Errors carry
/// 1-based line numbers.
Dataset load_dataset(std::istream& in, const std::vector<AttributeSpec>& schema,
                     const LoadOptions& options = {});
Dataset load_dataset_file(const std::string& path, const std::string& schema_path,
                          const LoadOptions& options = {});

/// Writes the dataset in the same delimited format load_dataset consumes,
/// with a leading patient_id identifier column. Missing cells are written as
/// the missing token.
void write_dataset_csv(std::ostream& out, const Dataset& d, const LoadOptions& options = {});
/// Matching schema sidecar, including a patient_id identifier line.
void write_schema(std::ostream& out, const Dataset& d);

/// Shortest round-trip decimal representation; locale-free and deterministic,
/// used for every numeric cell the tool serializes.
std::string format_number(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace cohort
