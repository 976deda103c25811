// Machine-readable outputs with reproducible formatting: ordered JSON with
// floats at 17 significant digits, RFC-4180-style CSV, and an FNV-1a config
// hash.  Identical inputs must produce byte-identical files.
#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace emm {

class Json {
 public:
  Json() : value_(nullptr) {}
  Json(double v) : value_(v) {}
  Json(int v) : value_(static_cast<double>(v)) {}
  Json(bool v) : value_(v) {}
  Json(const char* v) : value_(std::string(v)) {}
  Json(std::string v) : value_(std::move(v)) {}

  static Json object() {
    Json j;
    j.value_ = Object{};
    return j;
  }
  static Json array() {
    Json j;
    j.value_ = Array{};
    return j;
  }

  Json& set(const std::string& key, Json v);
  Json& push(Json v);

  // Serialized with stable field order and "%.17g" floats.
  std::string dump(int indent = 2) const;

 private:
  using Object = std::vector<std::pair<std::string, Json>>;
  using Array = std::vector<Json>;
  std::variant<std::nullptr_t, bool, double, std::string, Object, Array> value_;

  void write(std::string& out, int indent, int depth) const;
};

std::string format_double(double v);  // %.17g

// 64-bit FNV-1a of a byte string, hex-encoded.
std::string fnv1a_hex(const std::string& bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// CSV with %.17g numeric cells.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(const std::vector<double>& values);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace emm
