#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace hclgp {

using Json = nlohmann::ordered_json;

class Value;

using List = std::vector<Value>;
// Records keep their fields sorted by key so equality and printing are stable.
using Record = std::vector<std::pair<std::string, Value>>;

// Dynamic value shared by the policy interpreter, the simulated world and
// parameter bindings.
class Value {
 public:
  enum class Kind { kNull, kNumber, kString, kBoolean, kList, kRecord };

  Value() = default;
  Value(double v) : data_(v) {}
  Value(int v) : data_(static_cast<double>(v)) {}
  Value(std::int64_t v) : data_(static_cast<double>(v)) {}
  Value(bool v) : data_(v) {}
  Value(std::string v) : data_(std::move(v)) {}
  Value(const char* v) : data_(std::string(v)) {}
  Value(List v) : data_(std::move(v)) {}
  Value(Record v);

  Kind kind() const { return static_cast<Kind>(data_.index()); }
  bool is_null() const { return kind() == Kind::kNull; }
  bool is_number() const { return kind() == Kind::kNumber; }
  bool is_string() const { return kind() == Kind::kString; }
  bool is_bool() const { return kind() == Kind::kBoolean; }
  bool is_list() const { return kind() == Kind::kList; }
  bool is_record() const { return kind() == Kind::kRecord; }

  double as_number() const { return std::get<double>(data_); }
  const std::string& as_string() const { return std::get<std::string>(data_); }
  bool as_bool() const { return std::get<bool>(data_); }
  const List& as_list() const { return std::get<List>(data_); }
  const Record& as_record() const { return std::get<Record>(data_); }
  List& as_list() { return std::get<List>(data_); }
  Record& as_record() { return std::get<Record>(data_); }

  // Field lookup on records; nullptr when absent or not a record.
  const Value* field(std::string_view key) const;
  // Insert or overwrite a record field, keeping keys sorted.
  void set_field(const std::string& key, Value v);

  friend bool operator==(const Value& a, const Value& b);
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

 private:
  std::variant<std::monostate, double, std::string, bool, List, Record> data_;
};

std::string_view kind_name(Value::Kind kind);

// Shortest round-trip decimal form; integral values print without a point.
std::string format_number(double v);

// Renders a value in policy-language literal syntax. Records use a
// brace form that the parser does not accept; they only appear in traces.
std::string to_literal(const Value& v);

Json to_json_value(const Value& v);
Value from_json_value(const Json& j);

// Builds a record from unsorted pairs.
Value make_record(std::vector<std::pair<std::string, Value>> fields);

}  // namespace hclgp
