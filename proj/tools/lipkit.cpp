// lipkit: batch front end for envelopes, extensions, partitions of unity, approximations and checks.

#include "lipkit/io.hpp"
#include "lipkit/lipkit.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace lipkit;
using nlohmann::json;

struct RunConfig {
    std::string command;
    std::string approx_kind;

    std::optional<std::string> anchors;
    std::optional<std::string> queries;
    std::optional<std::string> out;
    std::optional<std::string> domain;
    std::optional<std::string> cover;
    std::optional<std::string> upper;
    std::optional<std::string> plot;
    std::optional<std::string> metric;
    std::optional<std::uint64_t> seed;

    std::optional<std::string> mode;
    std::optional<std::string> lambda;
    std::optional<double> bound;
    std::optional<std::string> subsets;
    std::optional<std::string> kappa;
    std::optional<std::string> side;
    std::optional<double> window;
    std::optional<std::string> n;
    std::optional<double> eps;
    std::optional<double> delta;
    std::optional<int> k;
    std::optional<double> spacing;
    std::optional<double> radius;
    std::optional<std::string> small_scale;
    std::optional<std::size_t> pair_budget;
};

[[noreturn]] void invalid(const std::string& invariant, const std::string& detail) {
    throw ArgumentError("RunConfig." + invariant, detail);
}

template <class T>
const T& require(const std::optional<T>& v, const char* flag) {
    if (!v) invalid(std::string(flag) + "_required", std::string("--") + flag + " is required for this command");
    return *v;
}

double require_positive(const std::optional<double>& v, const char* flag) {
    const double x = require(v, flag);
    if (!(x > 0) || !std::isfinite(x)) invalid(std::string(flag) + "_positive", std::string("--") + flag + " = " + format_double(x));
    return x;
}

std::vector<double> parse_list(const std::string& s, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(io::parse_double(io::trim(item), std::string("--") + flag));
    if (out.empty()) invalid(std::string(flag) + "_nonempty", std::string("--") + flag + " is empty");
    return out;
}

/// "0,1;1,2" -> {{0,1},{1,2}}
std::vector<std::vector<std::size_t>> parse_subsets(const std::string& s) {
    std::vector<std::vector<std::size_t>> out;
    std::stringstream ss(s);
    std::string group;
    while (std::getline(ss, group, ';')) {
        std::vector<std::size_t> g;
        std::stringstream gs(group);
        std::string item;
        while (std::getline(gs, item, ',')) g.push_back(io::parse_index(io::trim(item), "--subsets"));
        out.push_back(std::move(g));
    }
    return out;
}

/// Fills options that were not given on the command line from a JSON config file.
void apply_config(RunConfig& c, const std::string& path, const CLI::App& sub) {
    const json j = io::read_json_file(path);
    if (!j.is_object()) invalid("config_object", path + " must hold a JSON object");
    const auto base = std::filesystem::path(path).parent_path();
    const auto given = [&](const std::string& name) {
        try {
            return sub.get_option("--" + name)->count() > 0;
        } catch (const CLI::OptionNotFound&) {
            return false;
        }
    };
    const auto as_string = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    const auto path_opt = [&](std::optional<std::string>& dst, const char* key) {
        if (!j.contains(key) || given(key)) return;
        std::filesystem::path p(j.at(key).get<std::string>());
        dst = (p.is_absolute() || base.empty() ? p : base / p).string();
    };
    const auto str_opt = [&](std::optional<std::string>& dst, const char* key) {
        if (!j.contains(key) || given(key)) return;
        const auto& v = j.at(key);
        if (v.is_array()) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) s += ',';
                s += as_string(v[i]);
            }
            dst = s;
        } else {
            dst = as_string(v);
        }
    };
    const auto num_opt = [&](auto& dst, const char* key) {
        if (!j.contains(key) || given(key)) return;
        dst = j.at(key).get<typename std::decay_t<decltype(dst)>::value_type>();
    };
    try {
        path_opt(c.anchors, "anchors");
        path_opt(c.queries, "queries");
        path_opt(c.out, "out");
        path_opt(c.domain, "domain");
        path_opt(c.cover, "cover");
        path_opt(c.upper, "upper");
        path_opt(c.plot, "plot");
        str_opt(c.metric, "metric");
        num_opt(c.seed, "seed");
        str_opt(c.mode, "mode");
        str_opt(c.lambda, "lambda");
        num_opt(c.bound, "bound");
        if (j.contains("subsets") && !given("subsets")) {
            const auto& v = j.at("subsets");
            if (v.is_array()) {
                std::string s;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) s += ';';
                    for (std::size_t t = 0; t < v[i].size(); ++t) s += (t ? "," : "") + v[i][t].dump();
                }
                c.subsets = s;
            } else {
                c.subsets = v.get<std::string>();
            }
        }
        str_opt(c.kappa, "kappa");
        str_opt(c.side, "side");
        num_opt(c.window, "window");
        str_opt(c.n, "n");
        num_opt(c.eps, "eps");
        num_opt(c.delta, "delta");
        num_opt(c.k, "k");
        num_opt(c.spacing, "spacing");
        num_opt(c.radius, "radius");
        str_opt(c.small_scale, "small-scale");
        num_opt(c.pair_budget, "pair-budget");
    } catch (const json::exception& e) {
        invalid("config_types", path + ": " + e.what());
    }
}

Transform metric_transform(const RunConfig& c) {
    if (!c.metric || *c.metric == "identity") return Transform::identity;
    if (*c.metric == "bounded") return Transform::bounded;
    invalid("metric", "--metric must be identity or bounded, got '" + *c.metric + "'");
}

struct Inputs {
    MetricDomain domain;
    AnchoredFunction source;
    std::vector<Point> queries;
    std::optional<io::CsvTable> anchor_table;
};

std::optional<MetricDomain> explicit_domain(const RunConfig& c) {
    if (!c.domain) return std::nullopt;
    return io::domain_from_json(io::read_json_file(*c.domain), metric_transform(c));
}

Inputs load_inputs(const RunConfig& c) {
    auto dom = explicit_domain(c);
    auto table = io::read_csv_file(require(c.anchors, "anchors"));
    auto source = io::anchors_from_csv(table, dom, metric_transform(c), *c.anchors);
    const auto& domain = source.domain();
    std::vector<Point> queries;
    if (c.queries) {
        queries = io::queries_from_csv(io::read_csv_file(*c.queries), domain, *c.queries);
    } else if (domain.is_explicit()) {
        queries = domain.points();
    } else {
        queries = source.anchors();
    }
    return {domain, source, std::move(queries), std::move(table)};
}

/// x coordinate for plot output: the abscissa on a line, the index on an explicit domain, else the row id.
double plot_x(const Point& p, std::size_t id) {
    if (p.is_index()) return static_cast<double>(p.index());
    if (p.coords().size() == 1) return p.coords()[0];
    return static_cast<double>(id);
}

void emit(const RunConfig& c, const std::string& text) {
    if (c.out) {
        io::write_text(*c.out, text);
    } else {
        std::cout << text;
    }
}

LambdaPolicy lambda_policy(const RunConfig& c) {
    const std::string v = c.lambda.value_or("auto");
    if (v == "auto") return LambdaPolicy::automatic();
    if (v == "per-anchor") return LambdaPolicy::per_anchor();
    if (v == "auto-per-anchor") return LambdaPolicy::automatic_per_anchor();
    const double x = io::parse_double(v, "--lambda");
    if (!(x >= 0)) invalid("lambda_nonnegative", "--lambda = " + v);
    return LambdaPolicy::constant(x);
}

int run_extend(const RunConfig& c) {
    auto in = load_inputs(c);
    const std::string mode = c.mode.value_or("midpoint");
    const unsigned threads = thread_cap_from_env();

    if (mode == "local" || mode == "unbounded") {
        std::vector<std::vector<std::size_t>> subsets =
            c.subsets ? parse_subsets(*c.subsets) : whole_anchor_subset(in.source);
        std::optional<Cover> cover;
        if (c.cover) {
            cover = io::cover_from_json(io::read_json_file(*c.cover), in.domain, as_evaluable(in.source),
                                        in.domain.is_explicit() ? std::vector<Point>{} : in.source.anchors());
        }
        EvaluableFunction f;
        if (mode == "unbounded") {
            auto e = std::make_shared<const LocallyLipschitzExtension>(in.source, subsets, std::move(cover), in.queries);
            f = [e](const Point& p) { return (*e)(p); };
        } else if (c.bound) {
            auto e = std::make_shared<const RangeBoundedExtension>(in.source, *c.bound, subsets, std::move(cover),
                                                                   in.queries);
            f = [e](const Point& p) { return (*e)(p); };
        } else {
            f = extend_locally_lipschitz(in.source, subsets, std::move(cover));
        }
        const auto values = evaluate_batch(f, in.queries, threads);
        io::CsvWriter w({"query_id", "value"});
        for (std::size_t q = 0; q < values.size(); ++q) w.row(q, values[q]);
        emit(c, w.str());
        return 0;
    }

    if (mode != "minimal" && mode != "maximal" && mode != "midpoint" && mode != "bounded") {
        invalid("mode", "--mode must be minimal, maximal, midpoint, bounded, local or unbounded; got '" + mode + "'");
    }
    if (mode == "bounded" && !c.bound) invalid("bound_required", "--mode bounded needs --bound");
    Extension ext(ExtensionSpec{in.source, mode == "bounded" ? ExtensionMode::bounded_range : ExtensionMode::midpoint,
                                lambda_policy(c), c.bound});
    io::CsvWriter w({"query_id", "phi_minus", "phi_plus", "mid", "bounded", "lambda_used"});
    const auto lo = evaluate_batch([&](const Point& p) { return ext.minimal(p); }, in.queries, threads);
    const auto hi = evaluate_batch([&](const Point& p) { return ext.maximal(p); }, in.queries, threads);
    for (std::size_t q = 0; q < in.queries.size(); ++q) {
        const auto& p = in.queries[q];
        const std::string bounded = c.bound ? format_double(ext.bounded(p)) : "";
        double lam = ext.lambdas()[0];
        if (!ext.uniform()) {
            // Constant of the anchor attaining Phi_+ (lowest index on ties).
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < in.source.size(); ++a) {
                const double v = in.source.value(a) + ext.lambdas()[a] * in.domain.distance(in.source.anchor(a), p);
                if (v < best) {
                    best = v;
                    lam = ext.lambdas()[a];
                }
            }
        }
        w.row(q, lo[q], hi[q], (lo[q] + hi[q]) / 2, bounded, lam);
    }
    emit(c, w.str());
    return 0;
}

int run_envelope(const RunConfig& c) {
    const auto kappas = parse_list(require(c.kappa, "kappa"), "kappa");
    for (double k : kappas) {
        if (!(k > 0)) invalid("kappa_positive", "--kappa = " + format_double(k));
    }
    const std::string side_name = c.side.value_or("lower");
    if (side_name != "lower" && side_name != "upper") invalid("side", "--side must be lower or upper");
    const Side side = side_name == "lower" ? Side::lower : Side::upper;
    auto in = load_inputs(c);

    io::CsvWriter w({"query_id", "kappa", "value", "argmin_anchor"});
    std::vector<io::PlotRow> plot;
    for (std::size_t q = 0; q < in.queries.size(); ++q) {
        for (double k : kappas) {
            const auto r = envelope_eval_detailed(EnvelopeSpec{in.source, k, side, c.window}, in.queries[q]);
            w.row(q, k, r.value, r.anchor);
            plot.push_back({plot_x(in.queries[q], q), "kappa=" + format_double(k), r.value});
        }
    }
    emit(c, w.str());
    if (c.plot) io::write_text(*c.plot, io::plot_csv(std::move(plot)));
    return 0;
}

struct ApproxRow {
    double value;
    double phi;
    double bound;
};

int write_approx(const RunConfig& c, const std::vector<Point>& queries, const std::vector<ApproxRow>& rows,
                 std::size_t per_query) {
    io::CsvWriter w({"query_id", "value", "phi", "abs_err", "bound"});
    std::vector<io::PlotRow> plot;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t q = i % per_query;
        const auto& r = rows[i];
        const double err = std::abs(r.value - r.phi);
        w.row(q, r.value, r.phi, err, r.bound);
        const double x = plot_x(queries[q], q);
        const std::string suffix = rows.size() > per_query ? "@" + format_double(r.bound) : "";
        plot.push_back({x, "value" + suffix, r.value});
        plot.push_back({x, "phi" + suffix, r.phi});
        plot.push_back({x, "abs_err" + suffix, err});
    }
    emit(c, w.str());
    if (c.plot) io::write_text(*c.plot, io::plot_csv(std::move(plot)));
    return 0;
}

int run_approx(const RunConfig& c) {
    const auto& kind = c.approx_kind;
    auto in = load_inputs(c);
    const unsigned threads = thread_cap_from_env();
    std::vector<ApproxRow> rows;
    const auto phi = [&in](const Point& p) { return in.source.at(p); };

    if (kind == "monotone") {
        if (!in.domain.is_explicit()) {
            // Finite space made of the anchors themselves.
            std::vector<std::vector<double>> m(in.source.size(), std::vector<double>(in.source.size(), 0.0));
            std::vector<std::string> labels;
            for (std::size_t i = 0; i < in.source.size(); ++i) {
                labels.push_back(in.source.anchor(i).to_string());
                for (std::size_t j = 0; j < in.source.size(); ++j) {
                    m[i][j] = in.domain.distance(in.source.anchor(i), in.source.anchor(j));
                }
            }
            auto finite = MetricDomain::explicit_matrix(std::move(m), std::move(labels));
            std::vector<Point> pts;
            for (const auto& q : in.queries) {
                auto idx = in.source.find(q);
                if (!idx) invalid("monotone_queries", "query " + q.to_string() + " is not an anchor");
                pts.push_back(Point::at(*idx));
            }
            in.source = AnchoredFunction(finite, finite.points(), in.source.values());
            in.domain = finite;
            in.queries = std::move(pts);
        }
        const auto ns_raw = parse_list(require(c.n, "n"), "n");
        std::vector<int> ns;
        for (double v : ns_raw) {
            if (v != std::floor(v) || v < 1) invalid("n_positive_integer", "--n entries must be positive integers");
            ns.push_back(static_cast<int>(v));
        }
        const auto members = monotone_approximation(in.source, ns);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const auto v = evaluate_batch(members[i], in.queries, threads);
            for (std::size_t q = 0; q < in.queries.size(); ++q) {
                rows.push_back({v[q], phi(in.queries[q]), static_cast<double>(ns[i])});
            }
        }
    } else if (kind == "uniform") {
        const double eps = require_positive(c.eps, "eps");
        UniformApproximation f(SampledFunction::from_anchored(in.source), eps,
                               c.spacing ? std::optional<LevelGrid>(LevelGrid::spanning(
                                               *std::min_element(in.source.values().begin(), in.source.values().end()),
                                               *std::max_element(in.source.values().begin(), in.source.values().end()),
                                               require_positive(c.spacing, "spacing")))
                                         : std::nullopt);
        const auto v = evaluate_batch([&](const Point& p) { return f(p); }, in.queries, threads);
        for (std::size_t q = 0; q < in.queries.size(); ++q) rows.push_back({v[q], phi(in.queries[q]), eps});
    } else if (kind == "fine") {
        const auto tcol = in.anchor_table->column("tol");
        std::optional<ToleranceField> tol;
        std::optional<AnchoredFunction> tol_fn;
        if (tcol) {
            std::vector<double> t;
            for (std::size_t r = 0; r < in.anchor_table->rows.size(); ++r) {
                t.push_back(io::parse_double(in.anchor_table->rows[r][*tcol], "tol"));
            }
            tol_fn = in.source.with_values(std::move(t));
            tol = ToleranceField::anchored(*tol_fn);
        } else {
            tol = ToleranceField::constant(require_positive(c.eps, "eps"));
        }
        FineApproximation f(SampledFunction::from_anchored(in.source), *tol);
        const auto v = evaluate_batch([&](const Point& p) { return f(p); }, in.queries, threads);
        for (std::size_t q = 0; q < in.queries.size(); ++q) rows.push_back({v[q], phi(in.queries[q]), (*tol)(in.queries[q])});
    } else if (kind == "insert") {
        auto upper_table = io::read_csv_file(require(c.upper, "upper"));
        auto upper = io::anchors_from_csv(upper_table, explicit_domain(c), metric_transform(c), *c.upper);
        if (!upper.domain().is_explicit()) upper = AnchoredFunction(in.domain, upper.anchors(), upper.values());
        const double lo = *std::min_element(in.source.values().begin(), in.source.values().end());
        const double hi = *std::max_element(upper.values().begin(), upper.values().end());
        Insertion f(in.source, upper, LevelGrid::spanning(lo, hi, require_positive(c.spacing, "spacing")));
        const auto hi_fn = as_evaluable(upper);
        const auto v = evaluate_batch([&](const Point& p) { return f(p); }, in.queries, threads);
        for (std::size_t q = 0; q < in.queries.size(); ++q) {
            rows.push_back({v[q], phi(in.queries[q]), hi_fn(in.queries[q])});
        }
    } else if (kind == "small") {
        const double eps = require_positive(c.eps, "eps");
        SmallScaleSpec spec = choose_small_scale(in.source, eps);
        if (c.delta) spec.delta = require_positive(c.delta, "delta");
        if (c.k) spec.k = *c.k;
        if (c.delta && !c.k) {
            spec.k = static_cast<int>(std::floor(eps / spec.delta)) + 1;
        }
        SmallScaleApproximation f(in.source, spec);
        const auto v = evaluate_batch([&](const Point& p) { return f(p); }, in.queries, threads);
        for (std::size_t q = 0; q < in.queries.size(); ++q) rows.push_back({v[q], phi(in.queries[q]), eps});
    } else {
        invalid("approx_kind", "approx needs one of monotone, uniform, fine, insert, small");
    }
    return write_approx(c, in.queries, rows, in.queries.size());
}

int run_pou(const RunConfig& c) {
    auto in = load_inputs(c);
    const auto& samples = in.domain.is_explicit() ? std::vector<Point>{} : in.source.anchors();
    PartitionOfUnity pou(io::cover_from_json(io::read_json_file(require(c.cover, "cover")), in.domain,
                                             as_evaluable(in.source), samples));
    io::CsvWriter w({"point_id", "set_index", "eta_n", "gamma_n", "xi"});
    for (std::size_t q = 0; q < in.queries.size(); ++q) {
        const auto wt = pou.weights(in.queries[q]);
        for (std::size_t n = 0; n < pou.size(); ++n) w.row(q, n + 1, wt.eta_n[n], wt.gamma_n[n], wt.xi[n]);
    }
    emit(c, w.str());
    return 0;
}

int run_check(const RunConfig& c) {
    auto in = load_inputs(c);
    ScanOptions opt;
    if (c.seed) opt.seed = *c.seed;
    if (c.pair_budget) opt.pair_budget = *c.pair_budget;
    std::vector<std::pair<double, double>> small;
    if (c.small_scale) {
        const auto v = parse_list(*c.small_scale, "small-scale");
        if (v.size() % 2) invalid("small_scale_pairs", "--small-scale takes delta,K pairs");
        for (std::size_t i = 0; i < v.size(); i += 2) small.emplace_back(v[i], v[i + 1]);
    }
    const double radius = c.radius ? require_positive(c.radius, "radius") : 1.0;
    const auto report = make_report(in.source.values(), in.domain, in.source.anchors(), radius, small, opt);
    emit(c, io::report_json(report).dump(2) + "\n");
    return 0;
}

void add_shared(CLI::App* sub, RunConfig& c, std::string& config) {
    sub->add_option("--anchors", c.anchors, "anchor CSV");
    sub->add_option("--queries", c.queries, "query CSV (default: anchors, or every point of an explicit domain)");
    sub->add_option("--out", c.out, "output path (default: stdout)");
    sub->add_option("--seed", c.seed, "seed for sampled scans");
    sub->add_option("--config", config, "JSON file with option values; flags take precedence");
    sub->add_option("--domain", c.domain, "explicit domain JSON");
    sub->add_option("--metric", c.metric, "identity or bounded (t -> t/(1+t))");
    sub->add_option("--plot", c.plot, "long-format plot data CSV");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lipschitz envelopes, extensions, partitions of unity and approximations"};
    app.require_subcommand(1);
    RunConfig c;
    std::string config;

    auto* extend = app.add_subcommand("extend", "McShane-Whitney and locally Lipschitz extensions");
    add_shared(extend, c, config);
    extend->add_option("--mode", c.mode, "minimal|maximal|midpoint|bounded|local|unbounded");
    extend->add_option("--lambda", c.lambda, "auto|per-anchor|auto-per-anchor|<number>");
    extend->add_option("--bound", c.bound, "range bound M");
    extend->add_option("--subsets", c.subsets, "anchor subsets for --mode local, e.g. 0,1;1,2");
    extend->add_option("--cover", c.cover, "cover JSON for --mode local");

    auto* envelope = app.add_subcommand("envelope", "Pasch-Hausdorff envelopes");
    add_shared(envelope, c, config);
    envelope->add_option("--kappa", c.kappa, "slope or comma-separated increasing slopes");
    envelope->add_option("--side", c.side, "lower|upper");
    envelope->add_option("--window", c.window, "restrict to anchors closer than this");

    auto* approx = app.add_subcommand("approx", "locally Lipschitz approximations");
    add_shared(approx, c, config);
    approx->add_option("kind", c.approx_kind, "monotone|uniform|fine|insert|small")->required();
    approx->add_option("--n", c.n, "envelope indices for monotone, e.g. 1,2,5");
    approx->add_option("--eps", c.eps, "tolerance");
    approx->add_option("--delta", c.delta, "small-scale radius");
    approx->add_option("--k", c.k, "small-scale slope");
    approx->add_option("--spacing", c.spacing, "level grid spacing");
    approx->add_option("--upper", c.upper, "anchor CSV of the upper function for insert");

    auto* pou = app.add_subcommand("pou", "partition of unity dump");
    add_shared(pou, c, config);
    pou->add_option("--cover", c.cover, "cover JSON");

    auto* check = app.add_subcommand("check", "empirical Lipschitz report");
    add_shared(check, c, config);
    check->add_option("--radius", c.radius, "radius for pointwise moduli");
    check->add_option("--small-scale", c.small_scale, "delta,K pairs");
    check->add_option("--pair-budget", c.pair_budget, "pairs scanned before subsampling");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    c.command = sub->get_name();
    try {
        if (!config.empty()) apply_config(c, config, *sub);
        if (c.command == "extend") return run_extend(c);
        if (c.command == "envelope") return run_envelope(c);
        if (c.command == "approx") return run_approx(c);
        if (c.command == "pou") return run_pou(c);
        return run_check(c);
    } catch (const IoError& e) {
        std::cerr << "lipkit: I/O error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "lipkit: invalid input: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "lipkit: invalid input (json): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "lipkit: error: " << e.what() << "\n";
        return 1;
    }
}
