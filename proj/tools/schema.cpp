#include "schema.hpp"

#include <cmath>

#include "peapod/errors.hpp"
#include "schema_embedded.hpp"

namespace peapod::cli {

namespace {

using nlohmann::json;

bool is_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (!v.is_number_float()) return false;
    const double d = v.get<double>();
    return std::isfinite(d) && std::floor(d) == d;
  }
  throw InvalidInput("schema uses unsupported type '" + type + "'");
}

std::string describe(const json& v) {
  std::string s = v.dump();
  return s.size() > 60 ? s.substr(0, 57) + "..." : s;
}

class Validator {
 public:
  explicit Validator(const json& root) : root_(root) {}

  void check(const json& schema, const json& v, const std::string& path) {
    if (schema.is_boolean()) {
      if (!schema.get<bool>()) fail(path, "no value is allowed here");
      return;
    }
    if (auto ref = schema.find("$ref"); ref != schema.end()) {
      check(resolve(ref->get<std::string>()), v, path);
    }
    if (auto t = schema.find("type"); t != schema.end()) {
      bool ok = false;
      if (t->is_array()) {
        for (const auto& name : *t) ok = ok || is_type(v, name.get<std::string>());
      } else {
        ok = is_type(v, t->get<std::string>());
      }
      if (!ok) {
        fail(path, "expected type " + t->dump() + ", got " + describe(v));
        return;
      }
    }
    if (auto e = schema.find("enum"); e != schema.end()) {
      bool ok = false;
      for (const auto& option : *e) ok = ok || option == v;
      if (!ok) fail(path, describe(v) + " is not one of " + e->dump());
    }
    if (v.is_number()) numeric(schema, v.get<double>(), path);
    if (v.is_object()) object(schema, v, path);
    if (v.is_array()) array(schema, v, path);
  }

  std::vector<SchemaViolation> violations;

 private:
  void fail(const std::string& path, std::string message) {
    violations.push_back({path.empty() ? "/" : path, std::move(message)});
  }

  const json& resolve(const std::string& ref) const {
    if (ref.rfind("#", 0) != 0) throw InvalidInput("only local schema references are supported: " + ref);
    const auto pointer = ref.substr(1);
    if (pointer.empty()) return root_;
    return root_.at(json::json_pointer(pointer));
  }

  void numeric(const json& schema, double x, const std::string& path) {
    if (auto m = schema.find("minimum"); m != schema.end() && x < m->get<double>()) {
      fail(path, "must be >= " + m->dump());
    }
    if (auto m = schema.find("maximum"); m != schema.end() && x > m->get<double>()) {
      fail(path, "must be <= " + m->dump());
    }
    if (auto m = schema.find("exclusiveMinimum"); m != schema.end() && !(x > m->get<double>())) {
      fail(path, "must be > " + m->dump());
    }
    if (auto m = schema.find("exclusiveMaximum"); m != schema.end() && !(x < m->get<double>())) {
      fail(path, "must be < " + m->dump());
    }
  }

  void object(const json& schema, const json& v, const std::string& path) {
    if (auto req = schema.find("required"); req != schema.end()) {
      for (const auto& key : *req) {
        if (!v.contains(key.get<std::string>())) fail(path, "missing required key '" + key.get<std::string>() + "'");
      }
    }
    const auto props = schema.find("properties");
    const auto extra = schema.find("additionalProperties");
    for (auto it = v.begin(); it != v.end(); ++it) {
      const std::string child = path + "/" + it.key();
      if (props != schema.end() && props->contains(it.key())) {
        check((*props)[it.key()], it.value(), child);
      } else if (extra != schema.end()) {
        if (extra->is_boolean() && !extra->get<bool>()) {
          fail(child, "unknown key '" + it.key() + "'");
        } else if (extra->is_object()) {
          check(*extra, it.value(), child);
        }
      }
    }
  }

  void array(const json& schema, const json& v, const std::string& path) {
    if (auto m = schema.find("minItems"); m != schema.end() && v.size() < m->get<std::size_t>()) {
      fail(path, "needs at least " + m->dump() + " items");
    }
    if (auto m = schema.find("maxItems"); m != schema.end() && v.size() > m->get<std::size_t>()) {
      fail(path, "allows at most " + m->dump() + " items");
    }
    if (auto items = schema.find("items"); items != schema.end()) {
      for (std::size_t k = 0; k < v.size(); ++k) check(*items, v[k], path + "/" + std::to_string(k));
    }
  }

  const json& root_;
};

}  // namespace

std::vector<SchemaViolation> validate_schema(const nlohmann::json& schema, const nlohmann::json& instance) {
  Validator v(schema);
  v.check(schema, instance, "");
  return std::move(v.violations);
}

const nlohmann::json& scenario_schema() {
  static const nlohmann::json schema = nlohmann::json::parse(embedded::kScenarioSchemaJson);
  return schema;
}

}  // namespace peapod::cli
