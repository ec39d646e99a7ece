#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

namespace cpegraph {

using json = nlohmann::json;

enum class errc {
  malformed_cpe,
  feed_schema,
  unknown_vendor,
  conflicting_groups,
  unresolvable_name,
  unrecognized_descriptor,
  dangling_ucpe,
  integrity_violation,
  storage_io,
  inventory_schema,
  stale_state,
  ground_truth_missing,
  config_error,
};

const char* errc_name(errc code);

// Carries a machine-readable error: {code, module, message, context}.
// This is the shape the CLI prints on stderr for any failed command.
class Error : public std::runtime_error {
 public:
  Error(errc code, std::string module, const std::string& message,
        json context = json::object())
      : std::runtime_error(message),
        code_(code),
        module_(std::move(module)),
        context_(std::move(context)) {}

  errc code() const { return code_; }
  const std::string& module() const { return module_; }
  const json& context() const { return context_; }

  json to_json() const {
    return json{{"code", errc_name(code_)},
                {"module", module_},
                {"message", what()},
                {"context", context_}};
  }

 private:
  errc code_;
  std::string module_;
  json context_;
};

inline const char* errc_name(errc code) {
  switch (code) {
    case errc::malformed_cpe: return "MalformedCpe";
    case errc::feed_schema: return "FeedSchemaError";
    case errc::unknown_vendor: return "UnknownVendor";
    case errc::conflicting_groups: return "ConflictingGroups";
    case errc::unresolvable_name: return "UnresolvableName";
    case errc::unrecognized_descriptor: return "UnrecognizedDescriptor";
    case errc::dangling_ucpe: return "DanglingUcpe";
    case errc::integrity_violation: return "IntegrityViolation";
    case errc::storage_io: return "StorageIo";
    case errc::inventory_schema: return "InventorySchemaError";
    case errc::stale_state: return "StaleState";
    case errc::ground_truth_missing: return "GroundTruthMissing";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace cpegraph
