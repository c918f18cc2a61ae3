#ifndef PSIW_RECORDS_HPP
#define PSIW_RECORDS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace psiw
{

inline constexpr const char *version = "1.0.0";

using FieldValue = std::variant<double, std::int64_t, bool, std::string>;

/// One self-describing output row: a schema tag and ordered key/value pairs.
struct OutputRecord {
    std::string schema; // point, curve, region, event, check
    std::vector<std::pair<std::string, FieldValue>> fields;

    OutputRecord &set(std::string key, FieldValue v)
    {
        for (auto &[k, old] : fields) {
            if (k == key) {
                old = std::move(v);
                return *this;
            }
        }
        fields.emplace_back(std::move(key), std::move(v));
        return *this;
    }

    OutputRecord &set(std::string key, const char *v) { return set(std::move(key), FieldValue{std::string(v)}); }
    OutputRecord &set(std::string key, std::string v) { return set(std::move(key), FieldValue{std::move(v)}); }
    OutputRecord &set(std::string key, double v) { return set(std::move(key), FieldValue{v}); }
    OutputRecord &set(std::string key, bool v) { return set(std::move(key), FieldValue{v}); }

    template <class T>
        requires std::is_integral_v<T> && (!std::is_same_v<T, bool>)
    OutputRecord &set(std::string key, T v)
    {
        return set(std::move(key), FieldValue{static_cast<std::int64_t>(v)});
    }
};

enum class Format { Csv, Json };

/// Header metadata written as `#` lines in CSV and as a "meta" object in JSON.
using Metadata = std::vector<std::pair<std::string, std::string>>;

inline std::string format_number(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail
{

inline std::string csv_cell(const FieldValue &v)
{
    return std::visit(
        [](const auto &x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, double>) {
                return format_number(x);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(x);
            } else if constexpr (std::is_same_v<T, bool>) {
                return x ? "true" : "false";
            } else {
                if (x.find_first_of(",\"\n") == std::string::npos) {
                    return x;
                }
                std::string out = "\"";
                for (char c : x) {
                    out += c;
                    if (c == '"') {
                        out += '"';
                    }
                }
                return out + "\"";
            }
        },
        v);
}

} // namespace detail

/// CSV: metadata comment lines, a header naming every column (union of all keys
/// in first-seen order), then one row per record.
inline void write_csv(std::ostream &os, const Metadata &meta, const std::vector<OutputRecord> &records)
{
    for (const auto &[k, v] : meta) {
        os << "# " << k << ": " << v << '\n';
    }
    std::vector<std::string> columns{"schema"};
    for (const auto &r : records) {
        for (const auto &[k, v] : r.fields) {
            if (std::find(columns.begin(), columns.end(), k) == columns.end()) {
                columns.push_back(k);
            }
        }
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        os << (i ? "," : "") << columns[i];
    }
    os << '\n';
    for (const auto &r : records) {
        os << r.schema;
        for (std::size_t i = 1; i < columns.size(); ++i) {
            os << ',';
            for (const auto &[k, v] : r.fields) {
                if (k == columns[i]) {
                    os << detail::csv_cell(v);
                    break;
                }
            }
        }
        os << '\n';
    }
}

inline nlohmann::ordered_json to_json(const OutputRecord &r)
{
    nlohmann::ordered_json j;
    j["schema"] = r.schema;
    for (const auto &[k, v] : r.fields) {
        std::visit([&, key = k](const auto &x) { j[key] = x; }, v);
    }
    return j;
}

inline void write_json(std::ostream &os, const Metadata &meta, const std::vector<OutputRecord> &records)
{
    nlohmann::ordered_json doc;
    doc["meta"] = nlohmann::ordered_json::object();
    for (const auto &[k, v] : meta) {
        doc["meta"][k] = v;
    }
    doc["records"] = nlohmann::ordered_json::array();
    for (const auto &r : records) {
        doc["records"].push_back(to_json(r));
    }
    os << doc.dump(1) << '\n';
}

inline void write_records(std::ostream &os, Format f, const Metadata &meta, const std::vector<OutputRecord> &records)
{
    if (f == Format::Json) {
        write_json(os, meta, records);
    } else {
        write_csv(os, meta, records);
    }
}

} // namespace psiw

#endif
