#include "lalec/toyml/registry.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "lalec/error.hpp"
#include "lalec/toyml/operators.hpp"

namespace lalec::toyml {

namespace {

constexpr std::string_view kSuffix = ".schema.json";

const std::pair<const char*, const char*> kAliases[] = {
    {"Scaler", "StandardScaler"},
    {"ConcatFeatures", "Concat"},
};

}  // namespace

Registry load_registry(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::Io, "schema directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > kSuffix.size() &&
        name.compare(name.size() - kSuffix.size(), kSuffix.size(), kSuffix) == 0) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());

  Registry reg;
  std::map<std::string, SchemaPtr> schemas;
  for (const auto& f : files) {
    auto file = f.filename().string();
    auto name = file.substr(0, file.size() - kSuffix.size());
    std::ifstream in(f, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    SchemaPtr schema;
    try {
      schema = parse_schema(buf.str());
    } catch (const Error& e) {
      throw Error(e.code(), file + ": " + e.what());
    }
    schemas[name] = schema;
    reg.add(Operator::individual(name, schema, make_implementation(name)));
  }
  for (const auto& [alias, target] : kAliases) {
    auto it = schemas.find(target);
    if (it != schemas.end() && !reg.contains(alias)) {
      reg.add(Operator::individual(alias, it->second, make_implementation(alias)));
    }
  }
  return reg;
}

std::string schema_dir(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("LALEC_SCHEMA_PATH"); env && *env) return env;
  return "schemas";
}

}  // namespace lalec::toyml
