#include "hddpc/jsonio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hddpc/errors.hpp"

namespace hddpc {

std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void escape_string(const std::string& s, std::string& out) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

void dump_rec(const Json& j, std::string& out, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent <= 0) return;
    out.push_back('\n');
    out.append(static_cast<size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      // nlohmann::json already stores object keys sorted (std::map).
      out.push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        escape_string(it.key(), out);
        out.push_back(':');
        if (indent > 0) out.push_back(' ');
        dump_rec(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out.push_back('}');
      break;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out.push_back('[');
      bool first = true;
      for (const auto& v : j) {
        if (!first) out.push_back(',');
        first = false;
        if (indent > 0 && (v.is_object() || v.is_array())) newline(depth + 1);
        dump_rec(v, out, indent, depth + 1);
      }
      if (indent > 0 && (j.front().is_object() || j.front().is_array())) newline(depth);
      out.push_back(']');
      break;
    }
    case Json::value_t::string:
      escape_string(j.get<std::string>(), out);
      break;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<long long>());
      break;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<unsigned long long>());
      break;
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    case Json::value_t::null:
    default:
      out += "null";
      break;
  }
}

}  // namespace

std::string dump_deterministic(const Json& j, int indent) {
  std::string out;
  dump_rec(j, out, indent, 0);
  if (indent > 0) out.push_back('\n');
  return out;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f.good()) throw Error(ErrorKind::IoError, "cannot open for writing: " + path);
  f << dump_deterministic(j, 1);
  if (!f.good()) throw Error(ErrorKind::IoError, "write failed: " + path);
}

Json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f.good()) throw Error(ErrorKind::IoError, "cannot open: " + path);
  Json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::IoError, "parse error in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace hddpc
