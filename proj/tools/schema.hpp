#pragma once

// Validation against the JSON Schema subset used by the scenario schema:
// type, enum, properties, required, additionalProperties, items, minItems,
// maxItems, minimum, maximum, exclusiveMinimum, exclusiveMaximum and local
// $ref pointers. Annotation keywords are ignored.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace peapod::cli {

struct SchemaViolation {
  std::string path;  // JSON pointer into the instance
  std::string message;
};

std::vector<SchemaViolation> validate_schema(const nlohmann::json& schema, const nlohmann::json& instance);

/// The scenario schema compiled in from schemas/scenario.schema.json.
const nlohmann::json& scenario_schema();

}  // namespace peapod::cli
