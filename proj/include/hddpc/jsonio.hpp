#pragma once

#include <string>

#include <json.hpp>

// Deterministic JSON serialization: object keys sorted, floating-point
// values printed with %.17g so that repeated runs produce byte-identical
// files and values round-trip exactly.

namespace hddpc {

using Json = nlohmann::json;

std::string dump_deterministic(const Json& j, int indent = 0);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

// %.17g rendering used for both JSON and CSV output.
std::string format_double(double v);

}  // namespace hddpc
