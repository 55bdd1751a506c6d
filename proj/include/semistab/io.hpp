#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include <json.hpp>

#include "errors.hpp"
#include "matrix.hpp"
#include "semigroup.hpp"
#include "spectral.hpp"
#include "stability.hpp"

namespace semistab::io {

using json = nlohmann::json;

/// 17 significant digits, lowercase scientific ("-1.0000000000000000e+00").
/// Round-trips every finite binary64 value.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::scientific, 16);
    return std::string(buf.data(), r.ptr);
}

/// JSON number for a possibly infinite value; infinities become null.
inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json complex_json(complex z) { return json::array({z.real(), z.imag()}); }

namespace detail {

inline void write_indent(std::ostream& os, int indent, int depth) {
    os << '\n' << std::string(static_cast<std::size_t>(indent * depth), ' ');
}

inline void write_value(const json& j, std::ostream& os, int indent, int depth) {
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) { // keys are kept sorted
            if (!first) os << ',';
            first = false;
            write_indent(os, indent, depth + 1);
            os << json(it.key()).dump() << ": ";
            write_value(it.value(), os, indent, depth + 1);
        }
        write_indent(os, indent, depth);
        os << '}';
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        // short numeric arrays ([re, im] pairs) stay on one line
        const bool inline_array = j.size() <= 2 && std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_number(); });
        os << '[';
        bool first = true;
        for (const auto& e : j) {
            if (!first) os << (inline_array ? ", " : ",");
            first = false;
            if (!inline_array) write_indent(os, indent, depth + 1);
            write_value(e, os, indent, depth + 1);
        }
        if (!inline_array) write_indent(os, indent, depth);
        os << ']';
        return;
    }
    case json::value_t::number_float: {
        const double x = j.get<double>();
        if (std::isfinite(x))
            os << format_double(x);
        else
            os << "null";
        return;
    }
    default: os << j.dump(); return;
    }
}

} // namespace detail

/// Deterministic serialisation: sorted keys, two-space indent, fixed float format, trailing newline.
inline void write_json(const json& j, std::ostream& os) {
    detail::write_value(j, os, 2, 0);
    os << '\n';
}

inline std::string to_json_string(const json& j) {
    std::ostringstream os;
    write_json(j, os);
    return os.str();
}

// ---------------------------------------------------------------------------
// Input files
// ---------------------------------------------------------------------------

struct DiagonalRule {
    std::string name;
    std::optional<std::int64_t> count;
};

/// A parsed MatrixFile or DiagonalFile.
struct OperatorInput {
    enum class Kind { Matrix, Diagonal };
    Kind kind = Kind::Matrix;
    ComplexMatrix matrix;
    std::optional<std::string> label;
    std::optional<DiagonalRule> rule;
    /// eigenvalues as listed in a DiagonalFile
    ComplexVector diagonal;
};

namespace detail {

inline complex parse_pair(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InputError(where + ": expected a [re, im] pair of numbers");
    const complex z(j[0].get<double>(), j[1].get<double>());
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InputError(where + ": entry is not finite");
    return z;
}

} // namespace detail

inline OperatorInput operator_from_json(const json& doc) {
    if (!doc.is_object()) throw InputError("input: top level must be a JSON object");
    OperatorInput in;
    if (doc.contains("label")) {
        if (!doc["label"].is_string()) throw InputError("label: expected a string");
        in.label = doc["label"].get<std::string>();
    }

    if (doc.contains("eigenvalues")) {
        in.kind = OperatorInput::Kind::Diagonal;
        const auto& ev = doc["eigenvalues"];
        if (!ev.is_array() || ev.empty()) throw InputError("eigenvalues: expected a non-empty array");
        for (std::size_t k = 0; k < ev.size(); ++k)
            in.diagonal.push_back(detail::parse_pair(ev[k], "eigenvalues[" + std::to_string(k) + "]"));
        if (doc.contains("rule")) {
            const auto& r = doc["rule"];
            if (!r.is_object()) throw InputError("rule: expected an object");
            DiagonalRule rule;
            if (r.contains("name")) {
                if (!r["name"].is_string()) throw InputError("rule.name: expected a string");
                rule.name = r["name"].get<std::string>();
            }
            if (r.contains("N")) {
                if (!r["N"].is_number_integer()) throw InputError("rule.N: expected an integer");
                rule.count = r["N"].get<std::int64_t>();
            }
            in.rule = rule;
        }
        in.matrix = ComplexMatrix::diagonal(in.diagonal);
        return in;
    }

    if (!doc.contains("n")) throw InputError("n: missing (expected a MatrixFile or a DiagonalFile)");
    if (!doc["n"].is_number_integer() || doc["n"].get<std::int64_t>() < 1)
        throw InputError("n: expected a positive integer");
    const auto n = static_cast<std::size_t>(doc["n"].get<std::int64_t>());
    if (!doc.contains("data")) throw InputError("data: missing");
    const auto& data = doc["data"];
    if (!data.is_array() || data.size() != n)
        throw InputError("data: expected " + std::to_string(n) + " rows");
    in.matrix = ComplexMatrix(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = data[i];
        const std::string where = "data[" + std::to_string(i) + "]";
        if (!row.is_array() || row.size() != n) throw InputError(where + ": expected " + std::to_string(n) + " entries");
        for (std::size_t j = 0; j < n; ++j)
            in.matrix(i, j) = detail::parse_pair(row[j], where + "[" + std::to_string(j) + "]");
    }
    return in;
}

inline OperatorInput parse_operator(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
    return operator_from_json(doc);
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path + "'");
    f << content;
    if (!f) throw InputError("failed writing '" + path + "'");
}

inline OperatorInput load_operator(const std::string& path) { return parse_operator(read_file(path)); }

inline json matrix_file_json(const ComplexMatrix& m, const std::optional<std::string>& label = std::nullopt) {
    json data = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
        data.push_back(std::move(row));
    }
    json doc{{"n", m.rows()}, {"data", std::move(data)}};
    if (label) doc["label"] = *label;
    return doc;
}

inline json diagonal_file_json(const DiagonalOperator& d, const std::optional<DiagonalRule>& rule = std::nullopt) {
    json ev = json::array();
    for (const auto& z : d.eigenvalues) ev.push_back(complex_json(z));
    json doc{{"eigenvalues", std::move(ev)}};
    if (!d.label.empty()) doc["label"] = d.label;
    if (rule) {
        json r{{"name", rule->name}};
        if (rule->count) r["N"] = *rule->count;
        doc["rule"] = std::move(r);
    }
    return doc;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline void write_growth_csv(const GrowthCurve& c, std::ostream& os) {
    os << "t,norm,rate\n";
    for (const auto& s : c.samples) os << format_double(s.t) << ',' << format_double(s.norm) << ',' << format_double(s.rate) << '\n';
}

inline void write_axis_csv(const ResolventScan& scan, std::ostream& os) {
    os << "omega,norm\n";
    for (const auto& p : scan.axis_points) os << format_double(p.omega) << ',' << format_double(p.norm) << '\n';
}

} // namespace semistab::io
