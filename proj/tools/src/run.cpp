#include "invset/cli/run.hpp"

#include "invset/cli/bundle.hpp"
#include "invset/elliptic_fd.hpp"
#include "invset/halfspace_fourier.hpp"
#include "invset/integral_transform.hpp"
#include "invset/matrix_structure.hpp"
#include "invset/system_conditions.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace invset::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::pair<Subcommand, std::string_view> kNames[] = {
    {Subcommand::CheckConditions, "check-conditions"},
    {Subcommand::Classify, "classify"},
    {Subcommand::DetectFactorization, "detect-factorization"},
    {Subcommand::CheckTransform, "check-transform"},
    {Subcommand::Witness, "witness"},
    {Subcommand::SolveBox, "solve-box"},
    {Subcommand::SolveHalfspace, "solve-halfspace"},
    {Subcommand::Audit, "audit"},
    {Subcommand::NormalizationCheck, "normalization-check"},
};

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out + '\n';
}

void append_vector(std::vector<std::string>& cells, const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) cells.push_back(num(v(i)));
}

std::vector<std::string> indexed_header(const std::string& prefix, Eigen::Index count) {
    std::vector<std::string> h;
    for (Eigen::Index i = 0; i < count; ++i) h.push_back(prefix + std::to_string(i + 1));
    return h;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string slot_name(const CoefficientSlot& s) {
    return s.first_order() ? "A_" + std::to_string(s.j + 1) : "A_" + std::to_string(s.j + 1) + std::to_string(s.k + 1);
}

struct Artifacts {
    fs::path dir;
    std::vector<std::string> files;
    std::ostringstream report;

    std::uint64_t seed = 1;

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / name).string());
        if (name.ends_with(".csv")) out << "# seed " << seed << '\n';
        out << content;
        files.push_back(name);
    }
};

struct Result {
    bool pass = false;
    json numbers = json::object();
};

template <class T>
const T& require(const std::optional<T>& value, const char* what) {
    if (!value) throw BundleError(std::string("bundle has no '") + what + "' block, required by this subcommand");
    return *value;
}

std::vector<Vector> grid_points(const BoxGrid& grid) {
    std::vector<Vector> xs;
    for (std::size_t i = 0; i < grid.size(); ++i) xs.push_back(grid.coordinate(i));
    return xs;
}

BoxGrid effective_grid(const Bundle& b, const RunConfig& c) {
    const BoxGrid& g = require(b.grid, "grid");
    if (!c.grid) return g;
    return {g.lower(), g.upper(), std::vector<int>(static_cast<std::size_t>(g.n()), *c.grid)};
}

GridField boundary_field(const Bundle& b, const BoxGrid& grid, int m) {
    if (static_cast<int>(b.boundary.size()) != m) throw BundleError("boundary: expected one expression per component");
    return GridField::from_function(grid, m, [&](const Vector& x) {
        Vector v(m);
        for (int s = 0; s < m; ++s) v(s) = b.boundary[static_cast<std::size_t>(s)].eval(x);
        return v;
    });
}

std::string box_field_csv(const GridField& u) {
    const BoxGrid& g = u.grid();
    std::string out = row(concat(concat({"node"}, indexed_header("x", g.n())), indexed_header("u", u.m())));
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::vector<std::string> cells{std::to_string(i)};
        append_vector(cells, g.coordinate(i));
        append_vector(cells, u.at(i));
        out += row(cells);
    }
    return out;
}

// Nodes whose last coordinate index is the middle one: a line for n = 2, a plane for n = 3.
std::string box_slice_csv(const GridField& u) {
    const BoxGrid& g = u.grid();
    const int mid = g.nodes(g.n() - 1) / 2;
    std::string out = row(concat(indexed_header("x", g.n()), indexed_header("u", u.m())));
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.multi_index(i).back() != mid) continue;
        std::vector<std::string> cells;
        append_vector(cells, g.coordinate(i));
        append_vector(cells, u.at(i));
        out += row(cells);
    }
    return out;
}

std::string periodic_csv(const PeriodicField& u, std::optional<double> height) {
    const TangentialGrid& g = u.grid();
    std::vector<std::string> header = concat({"node"}, indexed_header("x", g.d));
    if (height) header.push_back("x" + std::to_string(g.d + 1));
    std::string out = row(concat(header, indexed_header("u", u.m())));
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::vector<std::string> cells{std::to_string(i)};
        append_vector(cells, g.coordinate(i));
        if (height) cells.push_back(num(*height));
        append_vector(cells, u.at(i));
        out += row(cells);
    }
    return out;
}

json audit_json(const AuditRecord& a) {
    return {{"passed", a.passed},          {"max_margin", a.max_margin}, {"worst_node", a.worst_node},
            {"worst_point", vector_json(a.worst_point)}, {"dmp_margin", a.dmp_margin},
            {"boundary_margin", a.boundary_margin},      {"audit_tol", a.audit_tol}, {"h", a.h}};
}

Result check_conditions(const Bundle& b, const RunConfig& c, Artifacts& art) {
    const auto& body = require(b.body, "body");
    const auto& coeffs = require(b.coefficients, "coefficients");
    std::vector<Vector> xs = b.x_samples;
    if (xs.empty()) xs = b.grid ? grid_points(*b.grid) : std::vector<Vector>{Vector::Zero(coeffs.n())};
    ConditionOptions opts;
    if (c.budget) opts.normal_budget = static_cast<std::size_t>(*c.budget);
    if (c.tol) opts.tol = *c.tol;
    const ConditionReport rep = coeffs.is_quasilinear()
                                    ? check_quasilinear_conditions(coeffs, body, xs, default_eta_samples(coeffs.m(), coeffs.n()), opts)
                                    : check_linear_conditions(coeffs, body, xs, opts);

    std::string failures = row(concat({"kind", "x_index", "eta_index", "normal_index", "slot", "residual"},
                                      indexed_header("nu", body.dim())));
    for (const auto& f : rep.failures) {
        std::vector<std::string> cells{to_string(f.kind), std::to_string(f.x_index),
                                       f.eta_index ? std::to_string(*f.eta_index) : "", std::to_string(f.normal_index),
                                       f.kind == FailureKind::EigenResidual ? slot_name(f.slot) : "", num(f.residual)};
        append_vector(cells, f.normal.size() == body.dim() ? f.normal : Vector::Zero(body.dim()));
        failures += row(cells);
    }
    art.write("failures.csv", failures);
    std::string scalars = row({"x_index", "eta_index", "normal_index", "slot", "value"});
    for (const auto& s : rep.scalar_fields) {
        scalars += row({std::to_string(s.x_index), s.eta_index ? std::to_string(*s.eta_index) : "",
                        std::to_string(s.normal_index), slot_name(s.slot), num(s.value)});
    }
    art.write("scalar_fields.csv", scalars);

    art.report << "body: " << body.describe() << '\n'
               << "system: n = " << coeffs.n() << ", m = " << coeffs.m()
               << (coeffs.is_quasilinear() ? " (quasilinear)" : "") << '\n'
               << "ellipticity estimate: " << num(rep.delta_estimate) << '\n'
               << "reduced ellipticity: " << num(rep.reduced_delta) << '\n'
               << "failures: " << rep.failures.size() << " (see failures.csv)\n";
    for (const auto& note : rep.notes) art.report << "note: " << note << '\n';
    return {rep.passed,
            {{"delta_estimate", rep.delta_estimate},
             {"reduced_delta", rep.reduced_delta},
             {"failures", rep.failures.size()},
             {"normals", rep.normals.size()},
             {"x_samples", xs.size()},
             {"sampled", rep.sampled}}};
}

Result classify(const Bundle& b, const RunConfig& c, Artifacts& art) {
    const auto& body = require(b.body, "body");
    const std::size_t budget = c.budget ? static_cast<std::size_t>(*c.budget) : 64;
    const StructureClass cls = admissible_family(body, budget);
    Result r;
    r.numbers["family"] = to_string(cls.tag);
    r.numbers["rows"] = cls.rows;
    art.report << "body: " << body.describe() << '\n' << "admissible family: " << to_string(cls.tag) << '\n'
               << cls.explanation << '\n';
    if (!b.matrix) {
        r.pass = true;
        return r;
    }
    const Matrix& M = *b.matrix;
    const auto result = classify_matrix(M, body, c.tol.value_or(kEigenTol), budget);
    std::string csv = row(concat(concat({"normal_index"}, indexed_header("nu", body.dim())), {"g", "residual_norm"}));
    const auto normals = normal_samples(body, budget);
    for (std::size_t i = 0; i < normals.size(); ++i) {
        const ResidualSplit split = residual_split(M, normals[i].normal);
        std::vector<std::string> cells{std::to_string(i)};
        append_vector(cells, normals[i].normal);
        cells.push_back(num(split.g));
        cells.push_back(num(split.f.norm()));
        csv += row(cells);
    }
    art.write("normals.csv", csv);
    r.pass = result.has_value();
    r.numbers["matrix_admissible"] = r.pass;
    r.numbers["normals_checked"] = normals.size();
    art.report << "matrix: " << (r.pass ? "admissible" : "not admissible") << " (see normals.csv)\n";
    return r;
}

Result detect(const Bundle& b, const RunConfig& c, Artifacts& art) {
    const auto& coeffs = require(b.coefficients, "coefficients");
    FactorizationOptions opts;
    if (c.tol) opts.rank_tol = *c.tol;
    const Factorization f = detect_factorization(coeffs, opts);
    std::string csv = row({"item", "row", "col", "value"});
    for (Eigen::Index i = 0; i < f.b.rows(); ++i) {
        for (Eigen::Index j = 0; j < f.b.cols(); ++j) csv += row({"b", std::to_string(i + 1), std::to_string(j + 1), num(f.b(i, j))});
    }
    for (std::size_t s = 0; s < f.forms.size(); ++s) {
        for (Eigen::Index i = 0; i < f.forms[s].rows(); ++i) {
            for (Eigen::Index j = 0; j < f.forms[s].cols(); ++j) {
                csv += row({"form" + std::to_string(s + 1), std::to_string(i + 1), std::to_string(j + 1), num(f.forms[s](i, j))});
            }
        }
    }
    art.write("factorization.csv", csv);
    art.report << "factorization: " << to_string(f.kind) << '\n'
               << "column rank ratio sigma2/sigma1: " << num(f.column_rank_ratio) << '\n'
               << "tensor rank ratio sigma2/sigma1: " << num(f.tensor_rank_ratio) << '\n'
               << "reconstruction residual: " << num(f.residual) << '\n'
               << f.diagnostic << '\n';
    return {f.kind != FactorizationKind::None,
            {{"kind", to_string(f.kind)},
             {"residual", f.residual},
             {"column_rank_ratio", f.column_rank_ratio},
             {"tensor_rank_ratio", f.tensor_rank_ratio},
             {"delta_estimate", f.delta_estimate}}};
}

std::string kernel_failures_csv(const KernelReport& rep, int m) {
    std::string csv = row(concat(concat({"x_index", "node_index", "normal_index", "g", "negative_g", "residual_norm"},
                                        indexed_header("nu", m)),
                                 {}));
    for (const auto& f : rep.failures) {
        std::vector<std::string> cells{std::to_string(f.x_index), std::to_string(f.node_index),
                                       std::to_string(f.normal_index), num(f.g), f.negative_g ? "1" : "0",
                                       num(f.residual.norm())};
        append_vector(cells, f.normal);
        csv += row(cells);
    }
    return csv;
}

Result check_transform(const Bundle& b, const RunConfig& c, Artifacts& art) {
    const auto& kernel = require(b.kernel, "kernel");
    const auto& body = require(b.body, "body");
    const KernelReport rep = check_kernel_invariance(kernel, body, c.budget ? static_cast<std::size_t>(*c.budget) : 64,
                                                     c.tol.value_or(kEigenTol));
    art.write("failures.csv", kernel_failures_csv(rep, kernel.m()));
    std::string g = row({"x_index", "node_index", "normal_index", "g"});
    for (const auto& e : rep.g_table) {
        g += row({std::to_string(e.x_index), std::to_string(e.node_index), std::to_string(e.normal_index), num(e.g)});
    }
    art.write("g_table.csv", g);
    art.report << "body: " << body.describe() << '\n'
               << "kernel points: " << kernel.points().size() << ", normalization defect " << num(kernel.normalization_defect())
               << '\n'
               << "failures: " << rep.failures.size() << " (see failures.csv)\n";
    return {rep.passed,
            {{"failures", rep.failures.size()},
             {"normals", rep.normals.size()},
             {"normalization_defect", kernel.normalization_defect()}}};
}

Result witness(const Bundle& b, const RunConfig& c, Artifacts& art) {
    const auto& kernel = require(b.kernel, "kernel");
    const auto& body = require(b.body, "body");
    std::size_t x = 0;
    Vector nu;
    if (b.witness) {
        x = b.witness->x_index;
        nu = b.witness->normal;
        if (x >= kernel.points().size()) {
            throw BundleError("witness.point: the kernel has " + std::to_string(kernel.points().size()) + " points");
        }
    } else {
        const KernelReport rep = check_kernel_invariance(kernel, body, c.budget ? static_cast<std::size_t>(*c.budget) : 64,
                                                         c.tol.value_or(kEigenTol));
        if (rep.failures.empty()) {
            art.report << "the kernel keeps the body invariant on all sampled normals; no witness exists\n";
            return {false, {{"witness_found", false}}};
        }
        x = rep.failures.front().x_index;
        nu = rep.failures.front().normal;
    }
    const auto a = smooth_boundary_point(body, nu);
    if (!a) throw InvalidArgument("the requested normal is not a normal of the body");
    WitnessOptions opts;
    if (c.tol) opts.tol = *c.tol;
    const Witness w = build_witness(kernel, body, x, *a, nu, opts);
    std::string csv = row(concat({"node_index", "weight"}, indexed_header("u", kernel.m())));
    const auto& nodes = kernel.point(x).nodes;
    for (std::size_t i = 0; i < w.values.size(); ++i) {
        std::vector<std::string> cells{std::to_string(i), num(nodes[i].weight)};
        append_vector(cells, w.values[i]);
        csv += row(cells);
    }
    art.write("witness.csv", csv);
    art.report << "witness at point " << x << " for normal " << vector_json(nu).dump() << '\n'
               << "alpha = " << num(w.alpha) << ", beta = " << num(w.beta) << '\n'
               << "image margin: " << num(w.image_margin) << " (values in witness.csv)\n";
    return {w.image_margin > 0.0,
            {{"witness_found", true},
             {"x_index", x},
             {"normal", vector_json(nu)},
             {"alpha", w.alpha},
             {"beta", w.beta},
             {"predicted_excess", w.predicted_excess},
             {"image_margin", w.image_margin},
             {"image", vector_json(w.image)},
             {"from_negative_g", w.from_negative_g}}};
}

Result solve_box(const Bundle& b, const RunConfig& c, Artifacts& art) {
    const auto& coeffs = require(b.coefficients, "coefficients");
    const BoxGrid grid = effective_grid(b, c);
    const GridField boundary = boundary_field(b, grid, coeffs.m());
    SolveResult sol = [&] {
        if (coeffs.is_quasilinear()) {
            PicardConfig p = b.picard;
            if (c.tol) p.linear.rtol = *c.tol;
            return solve_quasilinear(coeffs, grid, boundary, p);
        }
        SolverConfig s = b.solver;
        if (c.tol) s.rtol = *c.tol;
        return solve_linear(assemble_linear(coeffs, grid, boundary), s);
    }();
    art.write("solution.csv", box_field_csv(sol.field));
    art.write("slice.csv", box_slice_csv(sol.field));
    Result r;
    r.pass = true;
    r.numbers = {{"iterations", sol.report.iterations},
                 {"linear_residual", sol.report.linear_residual},
                 {"picard_residual", sol.report.picard_residual},
                 {"max_abs", sol.field.max_abs()},
                 {"nodes", grid.size()}};
    art.report << "grid: " << grid.size() << " nodes, h = " << num(grid.max_spacing()) << '\n'
               << "iterations: " << sol.report.iterations << ", relative residual " << num(sol.report.linear_residual) << '\n';
    if (b.body) {
        const AuditRecord a = audit_invariance(sol.field, *b.body);
        r.pass = a.passed;
        r.numbers["audit"] = audit_json(a);
        art.report << "audit: max margin " << num(a.max_margin) << " at node " << a.worst_node << ", tolerance "
                   << num(a.audit_tol) << '\n';
    }
    return r;
}

PeriodicField halfspace_data(const HalfSpaceBlock& hs, const TangentialGrid& grid, int m) {
    if (static_cast<int>(hs.boundary.size()) != m) throw BundleError("halfspace.boundary: expected one expression per component");
    PeriodicField f(grid, m);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vector x = grid.coordinate(i);
        Vector v(m);
        for (int s = 0; s < m; ++s) v(s) = hs.boundary[static_cast<std::size_t>(s)].eval(x);
        f.set(i, v);
    }
    return f;
}

Result solve_halfspace_cmd(const Bundle& b, const RunConfig& c, Artifacts& art, bool audit_only) {
    const auto& coeffs = require(b.coefficients, "coefficients");
    const auto& hs = require(b.halfspace, "halfspace");
    const TangentialGrid grid(coeffs.n() - 1, hs.L, c.grid.value_or(hs.N));
    const std::vector<double> heights = c.heights.value_or(hs.heights);
    const HalfSpaceSolver solver(coeffs, grid, heights);
    const PeriodicField f = halfspace_data(hs, grid, coeffs.m());
    Result r;
    r.pass = true;
    r.numbers = {{"delta_estimate", solver.delta_estimate()}, {"min_abs_real", solver.min_abs_real()},
                 {"N", grid.N}, {"L", grid.L}, {"heights", heights}};
    if (!audit_only) {
        double imag = 0.0;
        const auto fields = solver.solve(f, &imag);
        for (std::size_t h = 0; h < fields.size(); ++h) {
            art.write("halfspace_h" + std::to_string(h) + ".csv", periodic_csv(fields[h], heights[h]));
        }
        r.numbers["max_imaginary"] = imag;
        art.report << "solved at " << heights.size() << " heights, max imaginary part " << num(imag) << '\n';
    }
    if (b.body) {
        const double tol = c.tol.value_or(1e-6);
        const HalfSpaceAudit a = audit_halfspace_invariance(solver, *b.body, {f}, tol);
        r.pass = a.passed;
        r.numbers["audit"] = {{"passed", a.passed}, {"max_margin", a.max_margin}, {"tol", a.tol},
                              {"worst_height", a.worst_height}, {"worst_node", a.worst_node}};
        art.report << "audit: max margin " << num(a.max_margin) << " (height index " << a.worst_height << ", node "
                   << a.worst_node << "), tolerance " << num(tol) << '\n';
        if (audit_only && b.search) {
            HalfSpaceSearchConfig sc;
            sc.seed = c.seed;
            if (c.budget) sc.max_solves = *c.budget;
            const HalfSpaceSearchResult s = search_halfspace_counterexample(solver, *b.body, sc);
            art.write("counterexample.csv", periodic_csv(s.boundary, std::nullopt));
            r.numbers["search"] = {{"max_margin", s.max_margin}, {"solves", s.solves},
                                   {"worst_height", s.worst_height}, {"worst_node", s.worst_node}};
            const bool found = s.max_margin > tol;
            r.pass = r.pass && !found;
            art.report << "search: best margin " << num(s.max_margin) << " after " << s.solves
                       << " solves (boundary data in counterexample.csv)\n";
        }
    } else if (audit_only) {
        require(b.body, "body");
    }
    return r;
}

Result audit(const Bundle& b, const RunConfig& c, Artifacts& art) {
    const auto& body = require(b.body, "body");
    if (b.halfspace) return solve_halfspace_cmd(b, c, art, true);
    const auto& coeffs = require(b.coefficients, "coefficients");
    const BoxGrid grid = effective_grid(b, c);
    AuditOptions opts;
    if (c.tol) opts.tol_factor = *c.tol;
    Result r;
    const GridField boundary = boundary_field(b, grid, coeffs.m());
    const SolveResult sol = coeffs.is_quasilinear() ? solve_quasilinear(coeffs, grid, boundary, b.picard)
                                                    : solve_linear(assemble_linear(coeffs, grid, boundary), b.solver);
    const AuditRecord a = audit_invariance(sol.field, body, opts);
    r.pass = a.passed;
    r.numbers["audit"] = audit_json(a);
    art.write("solution.csv", box_field_csv(sol.field));
    art.report << "body: " << body.describe() << '\n'
               << "audit: max margin " << num(a.max_margin) << " at node " << a.worst_node << ", tolerance "
               << num(a.audit_tol) << ", discrete maximum principle margin " << num(a.dmp_margin) << '\n';
    if (b.search) {
        BoxSearchConfig sc;
        sc.seed = c.seed;
        sc.audit = opts;
        if (c.budget) sc.max_solves = *c.budget;
        const BoxSearchResult s = search_box_counterexample(coeffs, grid, body, sc);
        art.write("counterexample.csv", box_field_csv(s.boundary));
        r.numbers["search"] = audit_json(s.audit);
        r.numbers["search"]["solves"] = s.solves;
        r.pass = r.pass && !s.exceeds_tolerance;
        art.report << "search: best margin " << num(s.audit.max_margin) << " at node " << s.audit.worst_node
                   << " after " << s.solves << " solves (boundary data in counterexample.csv)\n";
    }
    return r;
}

Result normalization(const Bundle& b, const RunConfig& c, Artifacts& art) {
    const auto& coeffs = require(b.coefficients, "coefficients");
    const int resolution = c.grid.value_or(64);
    const double tol = c.tol.value_or(1e-10);
    const double defect = kernel_normalization_check(coeffs, resolution);
    art.report << "normalization defect: " << num(defect) << " (tolerance " << num(tol) << ")\n";
    return {defect <= tol, {{"defect", defect}, {"tol", tol}, {"resolution", resolution}}};
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

std::optional<Subcommand> parse_subcommand(std::string_view name) {
    for (const auto& [sub, n] : kNames) {
        if (n == name) return sub;
    }
    return std::nullopt;
}

std::string to_string(Subcommand sub) {
    for (const auto& [s, n] : kNames) {
        if (s == sub) return std::string(n);
    }
    return "unknown";
}

std::vector<std::string> subcommand_names() {
    std::vector<std::string> out;
    for (const auto& [s, n] : kNames) out.emplace_back(n);
    return out;
}

RunOutcome run(const RunConfig& config) {
    RunOutcome outcome;
    Artifacts art;
    art.dir = config.out_dir;
    art.seed = config.seed;
    std::ostringstream log;
    log << timestamp() << " start " << to_string(config.subcommand) << " input=" << config.input
        << " seed=" << config.seed << '\n';

    json& v = outcome.verdict;
    v["subcommand"] = to_string(config.subcommand);
    v["seed"] = config.seed;
    v["input"] = config.input;
    std::error_code ec;
    fs::create_directories(art.dir, ec);
    try {
        if (ec) throw Error("cannot create output directory " + art.dir.string() + ": " + ec.message());
        const Bundle bundle = load_bundle(config.input);
        Result r;
        switch (config.subcommand) {
            case Subcommand::CheckConditions: r = check_conditions(bundle, config, art); break;
            case Subcommand::Classify: r = classify(bundle, config, art); break;
            case Subcommand::DetectFactorization: r = detect(bundle, config, art); break;
            case Subcommand::CheckTransform: r = check_transform(bundle, config, art); break;
            case Subcommand::Witness: r = witness(bundle, config, art); break;
            case Subcommand::SolveBox: r = solve_box(bundle, config, art); break;
            case Subcommand::SolveHalfspace: r = solve_halfspace_cmd(bundle, config, art, false); break;
            case Subcommand::Audit: r = audit(bundle, config, art); break;
            case Subcommand::NormalizationCheck: r = normalization(bundle, config, art); break;
        }
        v["pass"] = r.pass;
        v["status"] = r.pass ? "pass" : "fail";
        v["numbers"] = r.numbers;
        outcome.exit_code = r.pass ? kExitPass : kExitCheckedFailure;
    } catch (const std::exception& e) {
        v["pass"] = false;
        v["status"] = "error";
        v["error"] = e.what();
        art.report << "error: " << e.what() << '\n';
        outcome.exit_code = kExitError;
        log << timestamp() << " error " << e.what() << '\n';
    }
    try {
        std::ostringstream head;
        head << "invset " << to_string(config.subcommand) << " (seed " << config.seed << ")\n"
             << "verdict: " << v["status"].get<std::string>() << '\n';
        art.write("report.txt", head.str() + art.report.str());
        std::vector<std::string> details = art.files;
        std::sort(details.begin(), details.end());
        v["details"] = details;
        art.write("verdict.json", v.dump(2) + '\n');
        log << timestamp() << " exit " << outcome.exit_code << '\n';
        std::ofstream(art.dir / "run.log", std::ios::app) << log.str();
    } catch (const std::exception& e) {
        v["error"] = e.what();
        outcome.exit_code = kExitError;
    }
    return outcome;
}

}  // namespace invset::cli
