#include "invset/cli/bundle.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace invset::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw BundleError(path + ": " + message);
}

const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(path, "missing field '" + key + "'");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

Vector vector_of(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

std::vector<double> doubles(const json& j, const std::string& path) {
    const Vector v = vector_of(j, path);
    return {v.data(), v.data() + v.size()};
}

Matrix matrix_of(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Matrix M;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Vector row = vector_of(j[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
        if (r == 0) M.resize(rows, row.size());
        if (row.size() != M.cols()) fail(path, "rows have different lengths");
        M.row(r) = row.transpose();
    }
    return M;
}

Vector unit(const json& j, const std::string& path) {
    const Vector v = vector_of(j, path);
    if (v.size() == 0 || !(v.norm() > 0.0)) fail(path, "normal must be a non-zero vector");
    return v / v.norm();
}

std::vector<int> indices_of(const json& j, int dim, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of coordinate indices");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const int k = integer(j[i], path + "[" + std::to_string(i) + "]");
        if (k < 1 || k > dim) fail(path, "coordinate indices are 1-based and must lie in 1.." + std::to_string(dim));
        out.push_back(k - 1);
    }
    return out;
}

// A table entry is a number or an expression string.
struct Entry {
    std::optional<double> value;
    std::optional<Expression> expression;

    [[nodiscard]] double eval(const Vector& x, const Vector& eta) const {
        return value ? *value : expression->eval(x, eta);
    }
    [[nodiscard]] bool constant() const { return value.has_value(); }
};

Entry entry_of(const json& j, const ExpressionScope& scope, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), std::nullopt};
    if (!j.is_string()) fail(path, "expected a number or an expression string");
    try {
        Expression e(j.get<std::string>(), scope);
        if (e.is_constant()) return {e.eval(Vector()), std::nullopt};
        return {std::nullopt, std::move(e)};
    } catch (const ExpressionError& e) {
        fail(path, e.what());
    }
}

struct EntryMatrix {
    int m = 0;
    std::vector<Entry> entries;

    [[nodiscard]] Matrix eval(const Vector& x, const Vector& eta) const {
        Matrix M(m, m);
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) M(r, c) = entries[static_cast<std::size_t>(r * m + c)].eval(x, eta);
        }
        return M;
    }
    [[nodiscard]] bool constant() const {
        return std::all_of(entries.begin(), entries.end(), [](const Entry& e) { return e.constant(); });
    }
};

EntryMatrix entry_matrix(const json& j, int m, const ExpressionScope& scope, const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != m) fail(path, "expected " + std::to_string(m) + " rows");
    EntryMatrix out{m, {}};
    for (int r = 0; r < m; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!row.is_array() || static_cast<int>(row.size()) != m) fail(rp, "expected " + std::to_string(m) + " entries");
        for (int c = 0; c < m; ++c) out.entries.push_back(entry_of(row[static_cast<std::size_t>(c)], scope, rp + "[" + std::to_string(c) + "]"));
    }
    return out;
}

EntryMatrix zero_matrix(int m) {
    EntryMatrix z{m, {}};
    z.entries.assign(static_cast<std::size_t>(m * m), Entry{0.0, std::nullopt});
    return z;
}

// Either [M_11, M_12, ..., M_nn] in packed j <= k order, or an object {"11": M, "12": M, ...}
// (1-based, "j,k" also accepted, missing pairs are zero).
std::vector<EntryMatrix> pair_table(const json& j, int n, int m, const ExpressionScope& scope, const std::string& path) {
    std::vector<EntryMatrix> out(static_cast<std::size_t>(n * (n + 1) / 2), zero_matrix(m));
    if (j.is_array()) {
        if (j.size() != out.size()) fail(path, "expected " + std::to_string(out.size()) + " matrices in packed j <= k order");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = entry_matrix(j[i], m, scope, path + "[" + std::to_string(i) + "]");
        return out;
    }
    if (!j.is_object()) fail(path, "expected an array in packed j <= k order or an object keyed by index pairs such as \"12\"");
    std::vector<std::optional<json>> seen(out.size());
    for (const auto& [key, value] : j.items()) {
        std::string digits;
        for (const char c : key) {
            if (c != ',' && c != ' ') digits.push_back(c);
        }
        if (digits.size() != 2 || !std::isdigit(static_cast<unsigned char>(digits[0])) ||
            !std::isdigit(static_cast<unsigned char>(digits[1]))) {
            fail(path + "." + key, "keys are index pairs such as \"12\"");
        }
        int a = digits[0] - '0';
        int b = digits[1] - '0';
        if (a < 1 || b < 1 || a > n || b > n) fail(path + "." + key, "index out of range 1.." + std::to_string(n));
        if (a > b) std::swap(a, b);
        const auto idx = static_cast<std::size_t>(SystemCoefficients::pair_index(n, a - 1, b - 1));
        if (seen[idx] && *seen[idx] != value) fail(path + "." + key, "A_jk and A_kj must be equal");
        seen[idx] = value;
        out[idx] = entry_matrix(value, m, scope, path + "." + key);
    }
    return out;
}

std::vector<EntryMatrix> axis_table(const json& j, int n, int m, const ExpressionScope& scope, const std::string& path) {
    std::vector<EntryMatrix> out(static_cast<std::size_t>(n), zero_matrix(m));
    if (j.is_array()) {
        if (static_cast<int>(j.size()) != n) fail(path, "expected " + std::to_string(n) + " matrices");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = entry_matrix(j[i], m, scope, path + "[" + std::to_string(i) + "]");
        return out;
    }
    if (!j.is_object()) fail(path, "expected an array of n matrices or an object keyed by axis such as \"1\"");
    for (const auto& [key, value] : j.items()) {
        if (key.size() != 1 || key[0] < '1' || key[0] - '0' > n) fail(path + "." + key, "axis keys are 1.." + std::to_string(n));
        out[static_cast<std::size_t>(key[0] - '1')] = entry_matrix(value, m, scope, path + "." + key);
    }
    return out;
}

SystemCoefficients::MatrixList evaluate_all(const std::vector<EntryMatrix>& table, const Vector& x, const Vector& eta) {
    SystemCoefficients::MatrixList out;
    out.reserve(table.size());
    for (const auto& e : table) out.push_back(e.eval(x, eta));
    return out;
}

std::vector<Expression> expression_list(const json& j, int count, const ExpressionScope& scope, const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != count) fail(path, "expected " + std::to_string(count) + " expressions");
    std::vector<Expression> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        std::string text;
        if (j[i].is_number()) {
            std::ostringstream os;
            os.precision(17);
            os << j[i].get<double>();
            text = os.str();
        } else if (j[i].is_string()) {
            text = j[i].get<std::string>();
        } else {
            fail(p, "expected a number or an expression string");
        }
        try {
            out.emplace_back(text, scope);
        } catch (const ExpressionError& e) {
            fail(p, e.what());
        }
    }
    return out;
}

std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ConvexBody parse_body(const json& j, const std::string& path) {
    const json& kind_j = field(j, "kind", path);
    if (!kind_j.is_string()) fail(path + ".kind", "expected a string");
    const std::string kind = kind_j.get<std::string>();
    const auto f = [&](const char* key) -> const json& { return field(j, key, path); };
    const auto p = [&](const char* key) { return path + "." + key; };
    try {
        if (kind == "half_space") return ConvexBody::half_space(unit(f("normal"), p("normal")), vector_of(f("anchor"), p("anchor")));
        if (kind == "orthant") return ConvexBody::orthant(vector_of(f("lower"), p("lower")));
        if (kind == "polyhedral_angle") {
            const int dim = integer(f("dim"), p("dim"));
            return ConvexBody::polyhedral_angle(dim, indices_of(f("indices"), dim, p("indices")), doubles(f("lower"), p("lower")));
        }
        if (kind == "polyhedral_cylinder") {
            const int dim = integer(f("dim"), p("dim"));
            return ConvexBody::polyhedral_cylinder(dim, indices_of(f("indices"), dim, p("indices")),
                                                   doubles(f("lower"), p("lower")), doubles(f("upper"), p("upper")));
        }
        if (kind == "spherical_cylinder") {
            return ConvexBody::spherical_cylinder(integer(f("dim"), p("dim")), integer(f("trailing"), p("trailing")),
                                                  number(f("radius"), p("radius")));
        }
        if (kind == "polyhedral_cone") {
            const json& nj = f("normals");
            if (!nj.is_array()) fail(p("normals"), "expected an array of vectors");
            std::vector<Vector> normals;
            for (std::size_t i = 0; i < nj.size(); ++i) normals.push_back(unit(nj[i], p("normals") + "[" + std::to_string(i) + "]"));
            return ConvexBody::polyhedral_cone(vector_of(f("vertex"), p("vertex")), std::move(normals));
        }
        if (kind == "polytope") {
            const json& cj = f("constraints");
            if (!cj.is_array()) fail(p("constraints"), "expected an array of {normal, anchor}");
            std::vector<BoundaryNormal> cons;
            for (std::size_t i = 0; i < cj.size(); ++i) {
                const std::string cp = p("constraints") + "[" + std::to_string(i) + "]";
                cons.push_back({vector_of(field(cj[i], "anchor", cp), cp + ".anchor"), unit(field(cj[i], "normal", cp), cp + ".normal")});
            }
            return ConvexBody::polytope(std::move(cons));
        }
        if (kind == "ball") return ConvexBody::ball(vector_of(f("center"), p("center")), number(f("radius"), p("radius")));
    } catch (const BundleError&) {
        throw;
    } catch (const Error& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "unknown body kind '" + kind + "'");
}

SystemCoefficients parse_coefficients(const json& j, const std::string& path) {
    const int n = integer(field(j, "n", path), path + ".n");
    const int m = integer(field(j, "m", path), path + ".m");
    if (n < 1 || m < 1) fail(path, "n and m must be positive");
    try {
        if (j.contains("B2")) {
            const ExpressionScope scope{n, m * n};
            auto table = pair_table(j["B2"], n, m, scope, path + ".B2");
            return SystemCoefficients::quasilinear(
                n, m, [table = std::move(table)](const Vector& x, const Vector& eta) { return evaluate_all(table, x, eta); });
        }
        const ExpressionScope scope{n, 0};
        auto second = pair_table(field(j, "A2", path), n, m, scope, path + ".A2");
        std::vector<EntryMatrix> first;
        if (j.contains("A1")) first = axis_table(j["A1"], n, m, scope, path + ".A1");
        const bool constant = std::all_of(second.begin(), second.end(), [](const auto& e) { return e.constant(); }) &&
                              std::all_of(first.begin(), first.end(), [](const auto& e) { return e.constant(); });
        if (constant) {
            return SystemCoefficients::constant(n, m, evaluate_all(second, Vector(), Vector()),
                                                first.empty() ? SystemCoefficients::MatrixList{} : evaluate_all(first, Vector(), Vector()));
        }
        SystemCoefficients::FieldSampler first_sampler;
        if (!first.empty()) {
            first_sampler = [first](const Vector& x) { return evaluate_all(first, x, Vector()); };
        }
        return SystemCoefficients::sampled(
            n, m, [second = std::move(second)](const Vector& x) { return evaluate_all(second, x, Vector()); },
            std::move(first_sampler));
    } catch (const BundleError&) {
        throw;
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

DiscreteKernel parse_kernel(const json& j, const std::string& path) {
    const int m = integer(field(j, "m", path), path + ".m");
    const json& pts = field(j, "points", path);
    if (!pts.is_array()) fail(path + ".points", "expected an array");
    std::vector<KernelPoint> points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string pp = path + ".points[" + std::to_string(i) + "]";
        KernelPoint kp;
        if (pts[i].contains("x")) {
            kp.label = pts[i]["x"].is_string() ? pts[i]["x"].get<std::string>() : pts[i]["x"].dump();
        }
        const json& nodes = field(pts[i], "nodes", pp);
        if (!nodes.is_array()) fail(pp + ".nodes", "expected an array");
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const std::string np = pp + ".nodes[" + std::to_string(k) + "]";
            const Vector flat = vector_of(field(nodes[k], "K", np), np + ".K");
            if (flat.size() != static_cast<Eigen::Index>(m) * m) fail(np + ".K", "expected m*m row-major entries");
            Matrix K(m, m);
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < m; ++c) K(r, c) = flat(r * m + c);
            }
            kp.nodes.push_back({number(field(nodes[k], "w", np), np + ".w"), K});
        }
        points.push_back(std::move(kp));
    }
    try {
        return DiscreteKernel(m, std::move(points));
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

Bundle parse_bundle(const std::string& text) {
    Bundle b;
    try {
        b.raw = json::parse(text);
    } catch (const json::parse_error& e) {
        throw BundleError("malformed JSON at " + line_column(text, e.byte) + ": " + e.what());
    }
    const json& r = b.raw;
    if (!r.is_object()) fail("(root)", "expected an object");
    if (r.contains("body")) b.body = parse_body(r["body"]);
    if (r.contains("coefficients")) b.coefficients = parse_coefficients(r["coefficients"]);
    if (r.contains("kernel")) b.kernel = parse_kernel(r["kernel"]);
    if (r.contains("matrix")) b.matrix = matrix_of(r["matrix"], "matrix");
    if (r.contains("grid")) {
        const json& g = r["grid"];
        const Vector lo = vector_of(field(g, "lower", "grid"), "grid.lower");
        const Vector hi = vector_of(field(g, "upper", "grid"), "grid.upper");
        const json& nj = field(g, "nodes", "grid");
        std::vector<int> nodes;
        if (nj.is_array()) {
            for (std::size_t i = 0; i < nj.size(); ++i) nodes.push_back(integer(nj[i], "grid.nodes[" + std::to_string(i) + "]"));
        } else {
            nodes.assign(static_cast<std::size_t>(lo.size()), integer(nj, "grid.nodes"));
        }
        try {
            b.grid = BoxGrid(lo, hi, nodes);
        } catch (const Error& e) {
            fail("grid", e.what());
        }
    }
    const int n = b.coefficients ? b.coefficients->n() : (b.grid ? b.grid->n() : 0);
    const int m = b.coefficients ? b.coefficients->m() : (b.body ? b.body->dim() : 0);
    if (r.contains("boundary")) b.boundary = expression_list(r["boundary"], m, {n, 0}, "boundary");
    if (r.contains("halfspace")) {
        const json& h = r["halfspace"];
        HalfSpaceBlock hs;
        hs.L = number(field(h, "L", "halfspace"), "halfspace.L");
        hs.N = integer(field(h, "N", "halfspace"), "halfspace.N");
        hs.heights = doubles(field(h, "heights", "halfspace"), "halfspace.heights");
        hs.boundary = expression_list(field(h, "boundary", "halfspace"), m, {std::max(n - 1, 1), 0}, "halfspace.boundary");
        b.halfspace = std::move(hs);
    }
    if (r.contains("x_samples")) {
        const json& xs = r["x_samples"];
        if (!xs.is_array()) fail("x_samples", "expected an array of points");
        for (std::size_t i = 0; i < xs.size(); ++i) b.x_samples.push_back(vector_of(xs[i], "x_samples[" + std::to_string(i) + "]"));
    }
    if (r.contains("witness")) {
        const json& w = r["witness"];
        const int point = integer(field(w, "point", "witness"), "witness.point");
        if (point < 1) fail("witness.point", "kernel points are numbered from 1");
        b.witness = WitnessRequest{static_cast<std::size_t>(point - 1), unit(field(w, "normal", "witness"), "witness.normal")};
    }
    if (r.contains("solver")) {
        const json& s = r["solver"];
        if (s.contains("kind")) {
            const std::string kind = s["kind"].is_string() ? s["kind"].get<std::string>() : "";
            if (kind == "bicgstab") {
                b.solver.kind = SolverKind::BiCGSTAB;
            } else if (kind == "sparselu") {
                b.solver.kind = SolverKind::SparseLU;
            } else {
                fail("solver.kind", "expected \"bicgstab\" or \"sparselu\"");
            }
        }
        if (s.contains("rtol")) b.solver.rtol = number(s["rtol"], "solver.rtol");
        if (s.contains("max_iterations")) b.solver.max_iterations = integer(s["max_iterations"], "solver.max_iterations");
    }
    b.picard.linear = b.solver;
    if (r.contains("picard")) {
        const json& p = r["picard"];
        if (p.contains("omega")) b.picard.omega = number(p["omega"], "picard.omega");
        if (p.contains("ptol")) b.picard.ptol = number(p["ptol"], "picard.ptol");
        if (p.contains("max_iterations")) b.picard.max_iterations = integer(p["max_iterations"], "picard.max_iterations");
    }
    if (r.contains("search")) {
        if (!r["search"].is_boolean()) fail("search", "expected true or false");
        b.search = r["search"].get<bool>();
    }
    return b;
}

Bundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BundleError("cannot open bundle '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_bundle(os.str());
}

}  // namespace invset::cli
