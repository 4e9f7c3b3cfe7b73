#pragma once

#include "sft/common.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sft {

// Line-oriented configuration format used by every on-disk config in the
// project: `[section.subsection]` headers followed by `key = value` lines.
// Keys are addressed with dotted paths ("simulation.step"). Values are
// whitespace-separated tokens, so scalars and small vectors share one
// representation. '#' starts a comment.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueFile load(const std::string& path);

  std::string dump() const;
  void save(const std::string& path) const;

  bool has(const std::string& key) const;
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  void set(const std::string& key, const std::string& value);
  void set_scalar(const std::string& key, double v);
  void set_int(const std::string& key, long long v);
  void set_bool(const std::string& key, bool v);
  void set_vector(const std::string& key, const Eigen::Ref<const VecX>& v);

  std::string get_string(const std::string& key) const;
  double get_scalar(const std::string& key) const;
  long long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  VecX get_vector(const std::string& key) const;
  Vec3 get_vec3(const std::string& key) const;

  // Fallback variants for optional keys.
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_scalar(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  Vec3 get_vec3(const std::string& key, const Vec3& fallback) const;

 private:
  const std::string* find(const std::string& key) const;
  // Insertion-ordered so dumps are stable and diffable.
  std::vector<std::pair<std::string, std::string>> entries_;
};

// write-temp-then-rename so interrupted runs never leave partial files.
void write_file_atomic(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

}  // namespace sft
