#include "sft/config_file.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace sft {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    kv.set(key, value);
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  return parse(read_file(path), path);
}

std::string KeyValueFile::dump() const {
  // Group dotted keys back into sections for readability.
  std::string out, current_section;
  for (const auto& [key, value] : entries_) {
    const auto dot = key.rfind('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
    if (section != current_section) {
      if (!out.empty()) out += "\n";
      out += "[" + section + "]\n";
      current_section = section;
    }
    out += leaf + " = " + value + "\n";
  }
  return out;
}

void KeyValueFile::save(const std::string& path) const { write_file_atomic(path, dump()); }

const std::string* KeyValueFile::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

bool KeyValueFile::has(const std::string& key) const { return find(key) != nullptr; }

std::vector<std::string> KeyValueFile::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void KeyValueFile::set_scalar(const std::string& key, double v) { set(key, format_double(v)); }
void KeyValueFile::set_int(const std::string& key, long long v) { set(key, std::to_string(v)); }
void KeyValueFile::set_bool(const std::string& key, bool v) { set(key, v ? "true" : "false"); }

void KeyValueFile::set_vector(const std::string& key, const Eigen::Ref<const VecX>& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += " ";
    s += format_double(v[i]);
  }
  set(key, s);
}

std::string KeyValueFile::get_string(const std::string& key) const {
  const auto* v = find(key);
  if (!v) throw ParseError("missing key '" + key + "'");
  return *v;
}

double KeyValueFile::get_scalar(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': not a number: '" + v + "'");
  }
}

long long KeyValueFile::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': not an integer: '" + v + "'");
  }
}

bool KeyValueFile::get_bool(const std::string& key) const {
  const std::string v = get_string(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParseError("key '" + key + "': not a boolean: '" + v + "'");
}

VecX KeyValueFile::get_vector(const std::string& key) const {
  const std::string v = get_string(key);
  std::istringstream in(v);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ParseError("key '" + key + "': not a number: '" + tok + "'");
    }
  }
  return Eigen::Map<VecX>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Vec3 KeyValueFile::get_vec3(const std::string& key) const {
  const VecX v = get_vector(key);
  if (v.size() != 3) throw ParseError("key '" + key + "': expected 3 components");
  return Vec3(v[0], v[1], v[2]);
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  return v ? *v : fallback;
}
double KeyValueFile::get_scalar(const std::string& key, double fallback) const {
  return has(key) ? get_scalar(key) : fallback;
}
long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}
bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}
Vec3 KeyValueFile::get_vec3(const std::string& key, const Vec3& fallback) const {
  return has(key) ? get_vec3(key) : fallback;
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sft
