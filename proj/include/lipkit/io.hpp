#ifndef LIPKIT_IO_HPP
#define LIPKIT_IO_HPP

#include "lipkit/error.hpp"
#include "lipkit/format.hpp"
#include "lipkit/metric.hpp"
#include "lipkit/partition.hpp"
#include "lipkit/verify.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

/**
 * @file io.hpp
 *
 * @brief CSV and JSON ingestion and deterministic CSV emission.
 *
 * Anchor CSV: `x1,...,xd,value[,lambda]` on a continuum, `index,value[,lambda]` or
 * `label,value[,lambda]` on an explicit domain. Query CSV: `x1,...,xd` or `index` / `label`.
 * Explicit domain JSON: `{"labels": [...], "matrix": [[...]]}`.
 */

namespace lipkit::io {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

/// Blank lines and lines starting with '#' are skipped.
inline CsvTable read_csv(std::istream& in, const std::string& origin = "<stream>") {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        auto fields = split_csv_line(s);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw ArgumentError("csv.row_width", origin + ":" + std::to_string(lineno) + ": " +
                                                     std::to_string(fields.size()) + " fields, header has " +
                                                     std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    if (!have_header) throw ArgumentError("csv.header", origin + ": missing header line");
    return t;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_csv(in, path);
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ArgumentError("json.syntax", path + ": " + e.what());
    }
}

inline double parse_double(const std::string& s, const std::string& where) {
    double v = 0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (!s.empty() && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || s.empty()) {
        throw ArgumentError("csv.number", where + ": '" + s + "' is not a number");
    }
    return v;
}

inline std::size_t parse_index(const std::string& s, const std::string& where) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ArgumentError("csv.index", where + ": '" + s + "' is not a point index");
    }
    return v;
}

inline std::string where(const std::string& origin, std::size_t row) {
    return origin + " row " + std::to_string(row + 1);
}

/// Explicit domain from `{"labels": [...], "matrix": [[...]]}`; labels are optional.
inline MetricDomain domain_from_json(const nlohmann::json& j, Transform transform = Transform::identity) {
    if (!j.is_object() || !j.contains("matrix")) {
        throw ArgumentError("MetricDomain.json", "expected an object with a \"matrix\" field");
    }
    std::vector<std::vector<double>> m;
    std::vector<std::string> labels;
    try {
        m = j.at("matrix").get<std::vector<std::vector<double>>>();
        if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError("MetricDomain.json", e.what());
    }
    return MetricDomain::explicit_matrix(std::move(m), std::move(labels), transform);
}

namespace detail {

inline Point explicit_point(const MetricDomain& dom, const CsvTable& t, std::size_t row, const std::string& origin) {
    if (auto c = t.column("index")) return Point::at(parse_index(t.rows[row][*c], where(origin, row)));
    if (auto c = t.column("label")) {
        const auto& labels = dom.labels();
        const auto& name = t.rows[row][*c];
        auto it = std::find(labels.begin(), labels.end(), name);
        if (it == labels.end()) throw ArgumentError("csv.label", where(origin, row) + ": unknown label '" + name + "'");
        return Point::at(static_cast<std::size_t>(it - labels.begin()));
    }
    throw ArgumentError("csv.header", origin + ": explicit domains need an 'index' or 'label' column");
}

inline std::vector<std::size_t> coordinate_columns(const CsvTable& t, const std::string& origin) {
    std::vector<std::size_t> cols;
    for (std::size_t d = 1;; ++d) {
        auto c = t.column("x" + std::to_string(d));
        if (!c) break;
        cols.push_back(*c);
    }
    if (cols.empty()) throw ArgumentError("csv.header", origin + ": no coordinate columns x1, x2, ...");
    return cols;
}

inline Point coordinate_point(const CsvTable& t, std::span<const std::size_t> cols, std::size_t row,
                              const std::string& origin) {
    std::vector<double> x;
    for (auto c : cols) x.push_back(parse_double(t.rows[row][c], where(origin, row)));
    return Point::coords(std::move(x));
}

} // namespace detail

/// Anchored function from an anchor table. Without `domain`, a Euclidean domain of the table's dimension is used.
inline AnchoredFunction anchors_from_csv(const CsvTable& t, const std::optional<MetricDomain>& domain,
                                         Transform transform = Transform::identity,
                                         const std::string& origin = "anchors") {
    const auto vcol = t.column("value");
    if (!vcol) throw ArgumentError("csv.header", origin + ": missing 'value' column");
    const auto lcol = t.column("lambda");
    if (t.rows.empty()) throw ArgumentError("AnchoredFunction.nonempty", origin + ": no anchors");

    std::vector<Point> anchors;
    std::vector<double> values;
    std::vector<double> lambdas;
    std::optional<MetricDomain> dom = domain;
    std::vector<std::size_t> cols;
    if (!dom) {
        cols = detail::coordinate_columns(t, origin);
        dom = MetricDomain::euclidean(cols.size(), transform);
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        anchors.push_back(dom->is_explicit() ? detail::explicit_point(*dom, t, r, origin)
                                             : detail::coordinate_point(t, cols, r, origin));
        values.push_back(parse_double(t.rows[r][*vcol], where(origin, r)));
        if (lcol) lambdas.push_back(parse_double(t.rows[r][*lcol], where(origin, r)));
    }
    std::optional<std::vector<double>> constants;
    if (lcol) constants = std::move(lambdas);
    return AnchoredFunction(*dom, std::move(anchors), std::move(values), std::move(constants));
}

inline std::vector<Point> queries_from_csv(const CsvTable& t, const MetricDomain& domain,
                                           const std::string& origin = "queries") {
    std::vector<Point> out;
    std::vector<std::size_t> cols;
    if (!domain.is_explicit()) {
        cols = detail::coordinate_columns(t, origin);
        if (cols.size() != domain.dimension()) {
            throw DomainError("Point.dimension", origin + ": " + std::to_string(cols.size()) +
                                                     " coordinates for dimension " + std::to_string(domain.dimension()));
        }
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        Point p = domain.is_explicit() ? detail::explicit_point(domain, t, r, origin)
                                       : detail::coordinate_point(t, cols, r, origin);
        domain.validate(p);
        out.push_back(std::move(p));
    }
    return out;
}

/**
 * Cover from `{"sets": [...]}`. Set types: `whole`, `ball` (center coordinates or index, radius),
 * `subset` (indices), `sublevel` (k: carrier > -k), `preimage` (center, radius: |carrier - center| < radius).
 */
inline Cover cover_from_json(const nlohmann::json& j, const MetricDomain& domain,
                             const std::optional<EvaluableFunction>& carrier = std::nullopt,
                             std::vector<Point> samples = {}) {
    if (!j.is_object() || !j.contains("sets") || !j.at("sets").is_array()) {
        throw ArgumentError("Cover.json", "expected an object with a \"sets\" array");
    }
    const auto need_carrier = [&](const std::string& type) -> const EvaluableFunction& {
        if (!carrier) throw ArgumentError("Cover.carrier", type + " sets need a carrier function");
        return *carrier;
    };
    std::vector<CoverSet> sets;
    try {
        for (const auto& s : j.at("sets")) {
            const auto type = s.at("type").get<std::string>();
            if (type == "whole") {
                sets.push_back(whole_space());
            } else if (type == "ball") {
                const auto& c = s.at("center");
                Point center = c.is_array() ? Point::coords(c.get<std::vector<double>>())
                                            : Point::at(c.get<std::size_t>());
                sets.push_back(ball_set(std::move(center), s.at("radius").get<double>()));
            } else if (type == "subset") {
                sets.push_back(subset_set(s.at("indices").get<std::vector<std::size_t>>()));
            } else if (type == "sublevel") {
                sets.push_back(sublevel_set(need_carrier(type), s.at("k").get<double>()));
            } else if (type == "preimage") {
                sets.push_back(preimage_set(need_carrier(type), s.at("center").get<double>(), s.at("radius").get<double>()));
            } else {
                throw ArgumentError("Cover.json", "unknown set type '" + type + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError("Cover.json", e.what());
    }
    return Cover(domain, std::move(sets), std::move(samples));
}

/// Rows of formatted fields; written with '\n' line ends and no trailing spaces.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    template <class... Fields>
    void row(const Fields&... fields) {
        std::vector<std::string> r;
        (r.push_back(field(fields)), ...);
        rows_.push_back(std::move(r));
    }

    std::string str() const {
        std::string out = join(header_);
        for (const auto& r : rows_) out += join(r);
        return out;
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path);
        out << str();
        if (!out) throw IoError("write failed for " + path);
    }

private:
    static std::string field(double v) { return format_double(v); }
    static std::string field(const std::string& s) { return s; }
    static std::string field(const char* s) { return s; }
    template <class I>
        requires std::is_integral_v<I>
    static std::string field(I v) { return std::to_string(v); }

    static std::string join(const std::vector<std::string>& r) {
        std::string line;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) line += ',';
            line += r[i];
        }
        return line + '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct PlotRow {
    double x;
    std::string series;
    double value;
};

/// Long-format `x,series,value`, sorted by (series, x); ties keep input order.
inline std::string plot_csv(std::vector<PlotRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const PlotRow& a, const PlotRow& b) {
        return std::tie(a.series, a.x) < std::tie(b.series, b.x);
    });
    CsvWriter w({"x", "series", "value"});
    for (const auto& r : rows) w.row(r.x, r.series, r.value);
    return w.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

namespace detail {

inline nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

inline nlohmann::json point_json(const Point& p) {
    if (p.is_index()) return p.index();
    auto c = p.coords();
    return std::vector<double>(c.begin(), c.end());
}

inline nlohmann::json violation_json(const Violation& w) {
    nlohmann::json x;
    x["first"] = w.first;
    if (w.second) x["second"] = *w.second;
    x["lhs"] = number(w.lhs);
    x["rhs"] = number(w.rhs);
    return x;
}

inline nlohmann::json verdict_json(const Verdict& v) {
    nlohmann::json j;
    j["status"] = to_string(v.status);
    j["checked"] = v.checked;
    j["subsampled"] = v.subsampled;
    j["violation_count"] = v.violation_count;
    auto arr = nlohmann::json::array();
    for (const auto& w : v.violations) arr.push_back(violation_json(w));
    j["violations"] = std::move(arr);
    if (v.worst) j["worst"] = violation_json(*v.worst);
    return j;
}

} // namespace detail

/// `{global_constant, witness: [p, q], pointwise: [...], verdicts: {...}, seed}`.
inline nlohmann::json report_json(const LipschitzReport& r, const std::vector<std::pair<std::string, Verdict>>& extra = {}) {
    nlohmann::json j;
    j["global_constant"] = detail::number(r.global.constant);
    j["witness"] = {detail::point_json(r.witness_first), detail::point_json(r.witness_second)};
    j["pairs"] = r.global.pairs;
    j["subsampled"] = r.global.subsampled;
    j["radius"] = detail::number(r.radius);
    auto pw = nlohmann::json::array();
    for (double v : r.pointwise) pw.push_back(detail::number(v));
    j["pointwise"] = std::move(pw);
    nlohmann::json verdicts = nlohmann::json::object();
    for (const auto& s : r.small_scale) {
        auto v = detail::verdict_json(s.verdict);
        v["delta"] = detail::number(s.delta);
        v["K"] = detail::number(s.K);
        verdicts["small_scale(delta=" + format_double(s.delta) + ",K=" + format_double(s.K) + ")"] = std::move(v);
    }
    for (const auto& [name, v] : extra) verdicts[name] = detail::verdict_json(v);
    j["verdicts"] = std::move(verdicts);
    j["seed"] = r.global.seed;
    return j;
}

} // namespace lipkit::io

#endif
