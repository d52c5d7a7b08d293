#include "hclgp/core/value.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace hclgp {

namespace {

bool key_less(const std::pair<std::string, Value>& a,
              const std::pair<std::string, Value>& b) {
  return a.first < b.first;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

}  // namespace

Value::Value(Record v) {
  std::stable_sort(v.begin(), v.end(), key_less);
  data_ = std::move(v);
}

const Value* Value::field(std::string_view key) const {
  if (!is_record()) return nullptr;
  const auto& rec = as_record();
  auto it = std::lower_bound(
      rec.begin(), rec.end(), key,
      [](const auto& entry, std::string_view k) { return entry.first < k; });
  if (it == rec.end() || it->first != key) return nullptr;
  return &it->second;
}

void Value::set_field(const std::string& key, Value v) {
  if (!is_record()) data_ = Record{};
  auto& rec = as_record();
  auto it = std::lower_bound(
      rec.begin(), rec.end(), key,
      [](const auto& entry, const std::string& k) { return entry.first < k; });
  if (it != rec.end() && it->first == key) {
    it->second = std::move(v);
  } else {
    rec.insert(it, {key, std::move(v)});
  }
}

bool operator==(const Value& a, const Value& b) { return a.data_ == b.data_; }

std::string_view kind_name(Value::Kind kind) {
  switch (kind) {
    case Value::Kind::kNull: return "null";
    case Value::Kind::kNumber: return "number";
    case Value::Kind::kString: return "string";
    case Value::Kind::kBoolean: return "boolean";
    case Value::Kind::kList: return "list";
    case Value::Kind::kRecord: return "record";
  }
  return "?";
}

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_literal(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::kNull: return "null";
    case Value::Kind::kNumber: return format_number(v.as_number());
    case Value::Kind::kString: return quote(v.as_string());
    case Value::Kind::kBoolean: return v.as_bool() ? "true" : "false";
    case Value::Kind::kList: {
      std::string out = "[";
      bool first = true;
      for (const auto& item : v.as_list()) {
        if (!first) out += ", ";
        first = false;
        out += to_literal(item);
      }
      return out + "]";
    }
    case Value::Kind::kRecord: {
      std::string out = "{";
      bool first = true;
      for (const auto& [k, item] : v.as_record()) {
        if (!first) out += ", ";
        first = false;
        out += k + ": " + to_literal(item);
      }
      return out + "}";
    }
  }
  return {};
}

Json to_json_value(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::kNull: return nullptr;
    case Value::Kind::kNumber: {
      double d = v.as_number();
      if (d == std::floor(d) && std::fabs(d) < 9e15) {
        return static_cast<std::int64_t>(d);
      }
      return d;
    }
    case Value::Kind::kString: return v.as_string();
    case Value::Kind::kBoolean: return v.as_bool();
    case Value::Kind::kList: {
      Json arr = Json::array();
      for (const auto& item : v.as_list()) arr.push_back(to_json_value(item));
      return arr;
    }
    case Value::Kind::kRecord: {
      Json obj = Json::object();
      for (const auto& [k, item] : v.as_record()) obj[k] = to_json_value(item);
      return obj;
    }
  }
  return nullptr;
}

Value from_json_value(const Json& j) {
  if (j.is_null()) return Value();
  if (j.is_boolean()) return Value(j.get<bool>());
  if (j.is_number()) return Value(j.get<double>());
  if (j.is_string()) return Value(j.get<std::string>());
  if (j.is_array()) {
    List items;
    for (const auto& item : j) items.push_back(from_json_value(item));
    return Value(std::move(items));
  }
  if (j.is_object()) {
    Record rec;
    for (auto it = j.begin(); it != j.end(); ++it) {
      rec.emplace_back(it.key(), from_json_value(it.value()));
    }
    return Value(std::move(rec));
  }
  throw std::invalid_argument("unsupported JSON value");
}

Value make_record(std::vector<std::pair<std::string, Value>> fields) {
  return Value(Record(std::move(fields)));
}

}  // namespace hclgp
