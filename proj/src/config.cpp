#include "geomflux/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "geomflux/errors.hpp"
#include "geomflux/util.hpp"

namespace geomflux {

namespace {

using nlohmann::ordered_json;

struct Collector {
    std::vector<std::string> issues;
    void add(const std::string& path, const std::string& reason) {
        issues.push_back(path + ": " + reason);
    }
};

const ordered_json* find_key(const ordered_json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void reject_unknown_keys(Collector& c, const ordered_json& obj, const std::string& path,
                         const std::vector<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& key = it.key();
        if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
        std::string best;
        std::size_t best_dist = std::numeric_limits<std::size_t>::max();
        for (const std::string& cand : allowed) {
            const std::size_t dist = levenshtein(key, cand);
            if (dist < best_dist) {
                best_dist = dist;
                best = cand;
            }
        }
        std::ostringstream os;
        os << "unknown key \"" << key << "\"";
        if (!best.empty() && best_dist <= 3) os << " (did you mean \"" << best << "\"?)";
        c.add(path, os.str());
    }
}

bool finite_number(const ordered_json& v, double& out) {
    if (!v.is_number()) return false;
    out = v.get<double>();
    return std::isfinite(out);
}

// Reads an optional numeric key into `out` (canonical json), falling back to
// the default. Returns the resolved value, NaN when invalid.
double resolve_number(Collector& c, const ordered_json& obj, const std::string& path,
                      const char* key, double fallback, ordered_json& out) {
    const ordered_json* v = find_key(obj, key);
    if (!v) {
        out[key] = fallback;
        return fallback;
    }
    double x;
    if (!finite_number(*v, x)) {
        c.add(path + "." + key, "must be a finite number");
        return std::numeric_limits<double>::quiet_NaN();
    }
    out[key] = *v;
    return x;
}

double resolve_positive(Collector& c, const ordered_json& obj, const std::string& path,
                        const char* key, double fallback, ordered_json& out) {
    const double x = resolve_number(c, obj, path, key, fallback, out);
    if (std::isfinite(x) && !(x > 0.0)) {
        c.add(path + "." + key, "must be positive");
        return std::numeric_limits<double>::quiet_NaN();
    }
    return x;
}

long resolve_integer(Collector& c, const ordered_json& obj, const std::string& path,
                     const char* key, long fallback, long minimum, ordered_json& out) {
    const ordered_json* v = find_key(obj, key);
    if (!v) {
        out[key] = fallback;
        return fallback;
    }
    if (!v->is_number_integer() && !v->is_number_unsigned()) {
        c.add(path + "." + key, "must be an integer");
        return -1;
    }
    const long x = v->get<long>();
    if (x < minimum) {
        std::ostringstream os;
        os << "must be at least " << minimum;
        c.add(path + "." + key, os.str());
        return -1;
    }
    out[key] = *v;
    return x;
}

// Validates a real vector of expected length (-1 to skip the length check)
// and copies it into the canonical document.
bool validate_point(Collector& c, const ordered_json& v, const std::string& path,
                    int expected_len, const char* against) {
    if (!v.is_array() || v.empty()) {
        c.add(path, "must be a nonempty array of numbers");
        return false;
    }
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double x;
        if (!finite_number(v[i], x)) {
            std::ostringstream os;
            os << "[" << i << "] must be a finite number";
            c.add(path, os.str());
            ok = false;
        }
    }
    if (ok && expected_len >= 0 && static_cast<int>(v.size()) != expected_len) {
        std::ostringstream os;
        os << "length " << v.size() << " does not match " << against << " (" << expected_len
           << ")";
        c.add(path, os.str());
        ok = false;
    }
    return ok;
}

// Complex entries are written as [re, im] pairs; a matrix is a square nested
// array of them.
bool validate_complex_matrix(Collector& c, const ordered_json& v, const std::string& path,
                             int dim) {
    if (!v.is_array() || static_cast<int>(v.size()) != dim) {
        std::ostringstream os;
        os << "must be a " << dim << "x" << dim << " matrix of [re, im] pairs";
        c.add(path, os.str());
        return false;
    }
    for (int r = 0; r < dim; ++r) {
        const ordered_json& row = v[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != dim) {
            std::ostringstream os;
            os << "row " << r << " must have " << dim << " entries";
            c.add(path, os.str());
            return false;
        }
        for (int col = 0; col < dim; ++col) {
            const ordered_json& e = row[static_cast<std::size_t>(col)];
            double re, im;
            if (!e.is_array() || e.size() != 2 || !finite_number(e[0], re) ||
                !finite_number(e[1], im)) {
                std::ostringstream os;
                os << "entry (" << r << "," << col << ") must be a finite [re, im] pair";
                c.add(path, os.str());
                return false;
            }
        }
    }
    return true;
}

Matrix parse_complex_matrix(const ordered_json& v) {
    const int dim = static_cast<int>(v.size());
    Matrix out(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int col = 0; col < dim; ++col) {
            const ordered_json& e = v[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
            out(r, col) = Complex(e[0].get<double>(), e[1].get<double>());
        }
    return out;
}

bool hermitian_enough(const Matrix& m) {
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

struct FamilyInfo {
    int dim = -1;      // -1 while unknown (family block invalid)
    int param_dim = -1;
};

FamilyInfo validate_family(Collector& c, const ordered_json& fam, ordered_json& out) {
    FamilyInfo info;
    const std::string path = "$.family";
    if (!fam.is_object()) {
        c.add(path, "must be an object");
        return info;
    }
    const ordered_json* kind = find_key(fam, "kind");
    if (!kind || !kind->is_string()) {
        c.add(path + ".kind", "required string, one of \"spin\", \"avoided-crossing\", "
                              "\"matrix-polynomial\", \"seeded-random-polynomial\"");
        return info;
    }
    const std::string name = kind->get<std::string>();
    out["kind"] = name;

    if (name == "spin") {
        reject_unknown_keys(c, fam, path, {"kind", "j", "hbar"});
        const double j = resolve_positive(c, fam, path, "j", 0.5, out);
        if (std::isfinite(j)) {
            const double twoj = 2.0 * j;
            if (std::abs(twoj - std::round(twoj)) > 1e-12) {
                c.add(path + ".j", "must be a half-integer");
            } else {
                info.dim = static_cast<int>(std::lround(twoj)) + 1;
                info.param_dim = 3;
            }
        }
        resolve_positive(c, fam, path, "hbar", 1.0, out);
        return info;
    }
    if (name == "avoided-crossing") {
        reject_unknown_keys(c, fam, path, {"kind", "delta", "hbar"});
        resolve_number(c, fam, path, "delta", 0.1, out);
        resolve_positive(c, fam, path, "hbar", 1.0, out);
        info.dim = 2;
        info.param_dim = 2;
        return info;
    }
    if (name == "matrix-polynomial") {
        reject_unknown_keys(c, fam, path,
                            {"kind", "dim", "param_dim", "constant", "linear", "quadratic",
                             "hbar"});
        const long dim = resolve_integer(c, fam, path, "dim", -1, 1, out);
        const long pdim = resolve_integer(c, fam, path, "param_dim", -1, 1, out);
        if (!find_key(fam, "dim")) c.add(path + ".dim", "required");
        if (!find_key(fam, "param_dim")) c.add(path + ".param_dim", "required");
        if (dim < 1 || pdim < 1) return info;
        info.dim = static_cast<int>(dim);
        info.param_dim = static_cast<int>(pdim);

        auto check_matrix = [&](const ordered_json& m, const std::string& mpath) {
            if (validate_complex_matrix(c, m, mpath, info.dim) &&
                !hermitian_enough(parse_complex_matrix(m)))
                c.add(mpath, "coefficient matrix must be Hermitian");
        };
        const ordered_json* constant = find_key(fam, "constant");
        if (!constant) {
            c.add(path + ".constant", "required");
        } else {
            check_matrix(*constant, path + ".constant");
            out["constant"] = *constant;
        }
        const ordered_json* linear = find_key(fam, "linear");
        if (!linear || !linear->is_array() ||
            static_cast<int>(linear->size()) != info.param_dim) {
            std::ostringstream os;
            os << "required array of " << info.param_dim
               << " matrices, one per parameter ($.family.param_dim)";
            c.add(path + ".linear", os.str());
        } else {
            for (std::size_t i = 0; i < linear->size(); ++i) {
                std::ostringstream os;
                os << path << ".linear[" << i << "]";
                check_matrix((*linear)[i], os.str());
            }
            out["linear"] = *linear;
        }
        const ordered_json* quad = find_key(fam, "quadratic");
        if (quad) {
            if (!quad->is_array()) {
                c.add(path + ".quadratic", "must be an array of {i, j, coeff} terms");
            } else {
                for (std::size_t k = 0; k < quad->size(); ++k) {
                    std::ostringstream os;
                    os << path << ".quadratic[" << k << "]";
                    const std::string tpath = os.str();
                    const ordered_json& term = (*quad)[k];
                    if (!term.is_object()) {
                        c.add(tpath, "must be an object {i, j, coeff}");
                        continue;
                    }
                    reject_unknown_keys(c, term, tpath, {"i", "j", "coeff"});
                    ordered_json scratch;
                    const long i = resolve_integer(c, term, tpath, "i", -1, 0, scratch);
                    const long j = resolve_integer(c, term, tpath, "j", -1, 0, scratch);
                    if (!find_key(term, "i")) c.add(tpath + ".i", "required");
                    if (!find_key(term, "j")) c.add(tpath + ".j", "required");
                    if (i >= 0 && j >= 0 && (i > j || j >= info.param_dim))
                        c.add(tpath, "indices must satisfy 0 <= i <= j < param_dim");
                    const ordered_json* coeff = find_key(term, "coeff");
                    if (!coeff)
                        c.add(tpath + ".coeff", "required");
                    else
                        check_matrix(*coeff, tpath + ".coeff");
                }
                out["quadratic"] = *quad;
            }
        } else {
            out["quadratic"] = ordered_json::array();
        }
        resolve_positive(c, fam, path, "hbar", 1.0, out);
        return info;
    }
    if (name == "seeded-random-polynomial") {
        reject_unknown_keys(c, fam, path,
                            {"kind", "dim", "param_dim", "seed", "degree", "scale", "hbar"});
        const long dim = resolve_integer(c, fam, path, "dim", -1, 2, out);
        const long pdim = resolve_integer(c, fam, path, "param_dim", -1, 1, out);
        if (!find_key(fam, "dim")) c.add(path + ".dim", "required");
        if (!find_key(fam, "param_dim")) c.add(path + ".param_dim", "required");
        resolve_integer(c, fam, path, "seed", 1, 0, out);
        const long degree = resolve_integer(c, fam, path, "degree", 2, 0, out);
        if (degree > 2) c.add(path + ".degree", "must be at most 2");
        resolve_positive(c, fam, path, "scale", 1.0, out);
        resolve_positive(c, fam, path, "hbar", 1.0, out);
        if (dim >= 2 && pdim >= 1) {
            info.dim = static_cast<int>(dim);
            info.param_dim = static_cast<int>(pdim);
        }
        return info;
    }
    c.add(path + ".kind",
          "unknown family kind \"" + name +
              "\" (expected \"spin\", \"avoided-crossing\", \"matrix-polynomial\" or "
              "\"seeded-random-polynomial\")");
    return info;
}

void validate_times(Collector& c, const ordered_json& v, const std::string& path,
                    ordered_json& out, const char* key) {
    if (v.is_array()) {
        if (v.empty()) {
            c.add(path, "needs at least one time sample");
            return;
        }
        double prev = -1.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            double x;
            if (!finite_number(v[i], x) || x < 0.0 || x <= prev) {
                c.add(path, "must be a strictly ascending array of nonnegative times");
                return;
            }
            prev = x;
        }
        out[key] = v;
        return;
    }
    if (v.is_object()) {
        reject_unknown_keys(c, v, path, {"start", "stop", "count"});
        ordered_json grid;
        const double start = resolve_number(c, v, path, "start", 0.0, grid);
        if (std::isfinite(start) && start < 0.0) c.add(path + ".start", "must be nonnegative");
        const ordered_json* stop = find_key(v, "stop");
        double stop_v = std::numeric_limits<double>::quiet_NaN();
        if (!stop) {
            c.add(path + ".stop", "required");
        } else {
            stop_v = resolve_number(c, v, path, "stop", 0.0, grid);
            if (std::isfinite(start) && std::isfinite(stop_v) && !(stop_v > start))
                c.add(path + ".stop", "must exceed start");
        }
        resolve_integer(c, v, path, "count", 64, 2, grid);
        out[key] = grid;
        return;
    }
    c.add(path, "must be an array of times or an object {start, stop, count}");
}

void validate_s_values(Collector& c, const ordered_json& obj, const std::string& parent,
                       const char* key, const std::vector<double>& fallback,
                       ordered_json& out) {
    const std::string path = parent + "." + key;
    const ordered_json* v = find_key(obj, key);
    if (!v) {
        out[key] = fallback;
        return;
    }
    if (!v->is_array() || v->empty()) {
        c.add(path, "must be a nonempty array of positive numbers");
        return;
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
        double x;
        if (!finite_number((*v)[i], x) || !(x > 0.0)) {
            c.add(path, "must be a nonempty array of positive numbers");
            return;
        }
    }
    out[key] = *v;
}

long resolve_level(Collector& c, const ordered_json& root, const FamilyInfo& info,
                   ordered_json& out) {
    const long level = resolve_integer(c, root, "$", "level", 0, 0, out);
    if (level >= 0 && info.dim > 0 && level >= info.dim) {
        std::ostringstream os;
        os << "level " << level << " out of range for $.family dimension " << info.dim;
        c.add("$.level", os.str());
    }
    return level;
}

void resolve_tolerance(Collector& c, const ordered_json& root, const char* key,
                       double fallback, ordered_json& out) {
    const ordered_json* tol = find_key(root, "tolerances");
    ordered_json resolved;
    if (tol) {
        if (!tol->is_object()) {
            c.add("$.tolerances", "must be an object");
            resolved[key] = fallback;
        } else {
            reject_unknown_keys(c, *tol, "$.tolerances", {key});
            resolve_positive(c, *tol, "$.tolerances", key, fallback, resolved);
        }
    } else {
        resolved[key] = fallback;
    }
    out["tolerances"] = resolved;
}

void validate_quantum_point_pair(Collector& c, const ordered_json& root,
                                 const FamilyInfo& info, ordered_json& out) {
    for (const char* key : {"r", "r0"}) {
        const ordered_json* v = find_key(root, key);
        const std::string path = std::string("$.") + key;
        if (!v) {
            c.add(path, "required parameter point");
            continue;
        }
        if (validate_point(c, *v, path, info.param_dim, "$.family.param_dim")) out[key] = *v;
    }
}

} // namespace

TaskKind task_from_name(const std::string& name) {
    if (name == "phase") return TaskKind::Phase;
    if (name == "tensor") return TaskKind::Tensor;
    if (name == "correlation") return TaskKind::Correlation;
    if (name == "theorem") return TaskKind::Theorem;
    if (name == "susceptibility") return TaskKind::Susceptibility;
    if (name == "classical") return TaskKind::Classical;
    throw Error("unknown task \"" + name +
                "\" (expected phase, tensor, correlation, theorem, susceptibility or "
                "classical)");
}

std::string task_name(TaskKind task) {
    switch (task) {
        case TaskKind::Phase: return "phase";
        case TaskKind::Tensor: return "tensor";
        case TaskKind::Correlation: return "correlation";
        case TaskKind::Theorem: return "theorem";
        case TaskKind::Susceptibility: return "susceptibility";
        case TaskKind::Classical: return "classical";
    }
    throw Error("task_name: unknown task kind");
}

std::string RunConfig::serialize() const { return canonical.dump(2) + "\n"; }

std::uint64_t RunConfig::hash() const { return fnv1a64(serialize()); }

RunConfig validate_config(const std::string& text) {
    Collector c;
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("config is not valid JSON", {std::string("$: ") + e.what()});
    }
    if (!doc.is_object()) throw SchemaError("config must be a JSON object", {"$: not an object"});

    const ordered_json* task_v = find_key(doc, "task");
    if (!task_v || !task_v->is_string())
        throw SchemaError("config validation failed", {"$.task: required string"});
    TaskKind task;
    try {
        task = task_from_name(task_v->get<std::string>());
    } catch (const Error& e) {
        throw SchemaError("config validation failed", {std::string("$.task: ") + e.what()});
    }

    RunConfig cfg;
    cfg.task = task;
    ordered_json& out = cfg.canonical;
    out["task"] = task_name(task);
    resolve_integer(c, doc, "$", "seed", 1, 0, out);

    std::vector<std::string> allowed = {"task", "seed", "tolerances"};
    FamilyInfo info;
    if (task != TaskKind::Classical) {
        allowed.push_back("family");
        const ordered_json* fam = find_key(doc, "family");
        if (!fam) {
            c.add("$.family", "required");
        } else {
            ordered_json fam_out;
            info = validate_family(c, *fam, fam_out);
            out["family"] = fam_out;
        }
    }

    switch (task) {
        case TaskKind::Phase: {
            allowed.insert(allowed.end(), {"level", "route", "path"});
            resolve_level(c, doc, info, out);
            const ordered_json* route = find_key(doc, "route");
            if (!route) {
                out["route"] = "ap";
            } else if (!route->is_string() ||
                       (route->get<std::string>() != "ap" &&
                        route->get<std::string>() != "fluctuation" &&
                        route->get<std::string>() != "sum-over-states" &&
                        route->get<std::string>() != "metric")) {
                c.add("$.route", "must be one of \"ap\", \"fluctuation\", \"sum-over-states\", "
                                 "\"metric\"");
            } else {
                out["route"] = *route;
            }
            const ordered_json* path = find_key(doc, "path");
            if (!path || !path->is_object()) {
                c.add("$.path", "required object {waypoints, closed, samples}");
            } else {
                reject_unknown_keys(c, *path, "$.path", {"waypoints", "closed", "samples"});
                ordered_json path_out;
                const ordered_json* wp = find_key(*path, "waypoints");
                if (!wp || !wp->is_array() || wp->size() < 2) {
                    c.add("$.path.waypoints", "required array of at least two parameter points");
                } else {
                    bool ok = true;
                    for (std::size_t i = 0; i < wp->size(); ++i) {
                        std::ostringstream os;
                        os << "$.path.waypoints[" << i << "]";
                        ok = validate_point(c, (*wp)[i], os.str(), info.param_dim,
                                            "$.family.param_dim") &&
                             ok;
                    }
                    if (ok) path_out["waypoints"] = *wp;
                }
                const ordered_json* closed = find_key(*path, "closed");
                bool is_closed = false;
                if (!closed) {
                    path_out["closed"] = false;
                } else if (!closed->is_boolean()) {
                    c.add("$.path.closed", "must be a boolean");
                } else {
                    is_closed = closed->get<bool>();
                    path_out["closed"] = is_closed;
                }
                if (is_closed && path_out.contains("waypoints")) {
                    const ordered_json& pts = path_out["waypoints"];
                    const ordered_json& first = pts[0];
                    const ordered_json& last = pts[pts.size() - 1];
                    double gap = 0.0;
                    for (std::size_t i = 0; i < first.size() && i < last.size(); ++i)
                        gap = std::max(gap, std::abs(first[i].get<double>() -
                                                     last[i].get<double>()));
                    if (first.size() != last.size() || gap > 1e-12)
                        c.add("$.path.waypoints",
                              "closed path must end at its first waypoint (within 1e-12)");
                }
                resolve_integer(c, *path, "$.path", "samples", 512, 2, path_out);
                out["path"] = path_out;
            }
            resolve_tolerance(c, doc, "phase_error", 1e-6, out);
            break;
        }
        case TaskKind::Tensor: {
            allowed.insert(allowed.end(), {"level", "points"});
            resolve_level(c, doc, info, out);
            const ordered_json* pts = find_key(doc, "points");
            if (!pts || !pts->is_array() || pts->empty()) {
                c.add("$.points", "required array of at least one parameter point");
            } else {
                bool ok = true;
                for (std::size_t i = 0; i < pts->size(); ++i) {
                    std::ostringstream os;
                    os << "$.points[" << i << "]";
                    ok = validate_point(c, (*pts)[i], os.str(), info.param_dim,
                                        "$.family.param_dim") &&
                         ok;
                }
                if (ok) out["points"] = *pts;
            }
            resolve_tolerance(c, doc, "route_agreement", 1e-7, out);
            break;
        }
        case TaskKind::Correlation: {
            allowed.insert(allowed.end(), {"level", "r", "r0", "times", "form"});
            resolve_level(c, doc, info, out);
            validate_quantum_point_pair(c, doc, info, out);
            const ordered_json* times = find_key(doc, "times");
            if (!times)
                c.add("$.times", "required");
            else
                validate_times(c, *times, "$.times", out, "times");
            const ordered_json* form = find_key(doc, "form");
            if (!form) {
                out["form"] = "both";
            } else if (!form->is_string() || (form->get<std::string>() != "both" &&
                                              form->get<std::string>() != "spectral" &&
                                              form->get<std::string>() != "heisenberg")) {
                c.add("$.form", "must be one of \"both\", \"spectral\", \"heisenberg\"");
            } else {
                out["form"] = *form;
            }
            resolve_tolerance(c, doc, "q_form_agreement", 1e-10, out);
            break;
        }
        case TaskKind::Theorem: {
            allowed.insert(allowed.end(), {"level", "r", "r0", "s_values"});
            resolve_level(c, doc, info, out);
            validate_quantum_point_pair(c, doc, info, out);
            validate_s_values(c, doc, "$", "s_values", {0.2, 0.1, 0.05}, out);
            resolve_tolerance(c, doc, "theorem_residual", 1e-8, out);
            break;
        }
        case TaskKind::Susceptibility: {
            allowed.insert(allowed.end(), {"level", "r", "r0", "z_values"});
            resolve_level(c, doc, info, out);
            validate_quantum_point_pair(c, doc, info, out);
            validate_s_values(c, doc, "$", "z_values", {0.2, 0.1, 0.05}, out);
            resolve_tolerance(c, doc, "limit_agreement", 1e-8, out);
            break;
        }
        case TaskKind::Classical: {
            allowed.push_back("classical");
            const ordered_json* cl = find_key(doc, "classical");
            if (!cl || !cl->is_object()) {
                c.add("$.classical", "required object");
                resolve_tolerance(c, doc, "sigma", 3.0, out);
                break;
            }
            const std::string path = "$.classical";
            reject_unknown_keys(c, *cl, path,
                                {"system", "mass", "omega", "beta", "hbar", "r", "ensemble",
                                 "window", "lambda_c", "s_values", "times", "dt"});
            ordered_json cl_out;
            const ordered_json* system = find_key(*cl, "system");
            int dof = -1;
            if (!system || !system->is_string() ||
                (system->get<std::string>() != "harmonic" &&
                 system->get<std::string>() != "quartic-coupled")) {
                c.add(path + ".system",
                      "required string, \"harmonic\" or \"quartic-coupled\"");
            } else if (system->get<std::string>() == "harmonic") {
                cl_out["system"] = "harmonic";
                resolve_positive(c, *cl, path, "mass", 1.0, cl_out);
                resolve_positive(c, *cl, path, "omega", 1.0, cl_out);
                dof = 1;
            } else {
                cl_out["system"] = "quartic-coupled";
                resolve_positive(c, *cl, path, "beta", 0.05, cl_out);
                dof = 2;
                if (find_key(*cl, "mass")) c.add(path + ".mass", "only valid for \"harmonic\"");
                if (find_key(*cl, "omega")) c.add(path + ".omega", "only valid for \"harmonic\"");
            }
            if (dof == 1) {
                if (find_key(*cl, "beta"))
                    c.add(path + ".beta", "only valid for \"quartic-coupled\"");
            }
            resolve_positive(c, *cl, path, "hbar", 1.0, cl_out);
            const ordered_json* r = find_key(*cl, "r");
            if (!r)
                c.add(path + ".r", "required parameter point");
            else if (validate_point(c, *r, path + ".r", dof, "the system's parameter count"))
                cl_out["r"] = *r;

            const ordered_json* ens = find_key(*cl, "ensemble");
            if (!ens || !ens->is_object()) {
                c.add(path + ".ensemble", "required object");
            } else {
                const std::string epath = path + ".ensemble";
                reject_unknown_keys(c, *ens, epath,
                                    {"kind", "energy", "actions", "count", "eta"});
                ordered_json ens_out;
                const ordered_json* kind = find_key(*ens, "kind");
                if (!kind || !kind->is_string() ||
                    (kind->get<std::string>() != "energy-shell" &&
                     kind->get<std::string>() != "torus")) {
                    c.add(epath + ".kind", "required string, \"energy-shell\" or \"torus\"");
                } else if (kind->get<std::string>() == "energy-shell") {
                    ens_out["kind"] = "energy-shell";
                    const ordered_json* energy = find_key(*ens, "energy");
                    if (!energy)
                        c.add(epath + ".energy", "required");
                    else
                        resolve_positive(c, *ens, epath, "energy", 1.0, ens_out);
                    resolve_positive(c, *ens, epath, "eta", 1e-3, ens_out);
                    if (find_key(*ens, "actions"))
                        c.add(epath + ".actions", "only valid for \"torus\"");
                } else {
                    ens_out["kind"] = "torus";
                    const ordered_json* actions = find_key(*ens, "actions");
                    if (!actions)
                        c.add(epath + ".actions", "required");
                    else if (validate_point(c, *actions, epath + ".actions", dof,
                                            "the system's dof"))
                        ens_out["actions"] = *actions;
                    if (find_key(*ens, "energy"))
                        c.add(epath + ".energy", "only valid for \"energy-shell\"");
                    if (find_key(*ens, "eta"))
                        c.add(epath + ".eta", "only valid for \"energy-shell\"");
                }
                resolve_integer(c, *ens, epath, "count", 1000, 2, ens_out);
                cl_out["ensemble"] = ens_out;
            }

            const ordered_json* window = find_key(*cl, "window");
            if (!window || !window->is_object()) {
                c.add(path + ".window", "required object {r, p, sigma}");
            } else {
                const std::string wpath = path + ".window";
                reject_unknown_keys(c, *window, wpath, {"r", "p", "sigma"});
                ordered_json w_out;
                for (const char* key : {"r", "p"}) {
                    const ordered_json* v = find_key(*window, key);
                    const std::string kpath = wpath + "." + key;
                    if (!v)
                        c.add(kpath, "required");
                    else if (validate_point(c, *v, kpath, dof, "the system's dof"))
                        w_out[key] = *v;
                }
                resolve_positive(c, *window, wpath, "sigma", 1.0, w_out);
                cl_out["window"] = w_out;
            }

            resolve_number(c, *cl, path, "lambda_c", 1.0, cl_out);
            validate_s_values(c, *cl, path, "s_values", {0.4, 0.2}, cl_out);
            const ordered_json* times = find_key(*cl, "times");
            if (!times)
                c.add(path + ".times", "required");
            else
                validate_times(c, *times, path + ".times", cl_out, "times");
            resolve_positive(c, *cl, path, "dt", 1e-3, cl_out);
            out["classical"] = cl_out;
            resolve_tolerance(c, doc, "sigma", 3.0, out);
            break;
        }
    }

    reject_unknown_keys(c, doc, "$", allowed);
    if (!c.issues.empty()) {
        std::ostringstream os;
        os << "config validation failed with " << c.issues.size() << " issue"
           << (c.issues.size() == 1 ? "" : "s");
        throw SchemaError(os.str(), c.issues);
    }
    return cfg;
}

HamiltonianFamily family_from_config(const RunConfig& config) {
    const ordered_json& fam = config.canonical.at("family");
    const std::string kind = fam.at("kind").get<std::string>();
    const double hbar = fam.at("hbar").get<double>();
    if (kind == "spin") return HamiltonianFamily::spin(fam.at("j").get<double>(), hbar);
    if (kind == "avoided-crossing")
        return HamiltonianFamily::avoided_crossing(fam.at("delta").get<double>(), hbar);
    if (kind == "matrix-polynomial") {
        const Matrix constant = parse_complex_matrix(fam.at("constant"));
        std::vector<Matrix> linear;
        for (const ordered_json& m : fam.at("linear")) linear.push_back(parse_complex_matrix(m));
        std::map<std::pair<int, int>, Matrix> quadratic;
        for (const ordered_json& term : fam.at("quadratic")) {
            const int i = term.at("i").get<int>();
            const int j = term.at("j").get<int>();
            quadratic[{i, j}] = parse_complex_matrix(term.at("coeff"));
        }
        return HamiltonianFamily::matrix_polynomial(constant, linear, quadratic, hbar);
    }
    if (kind == "seeded-random-polynomial")
        return HamiltonianFamily::seeded_random_polynomial(
            fam.at("dim").get<int>(), fam.at("param_dim").get<int>(),
            fam.at("seed").get<std::uint64_t>(), fam.at("degree").get<int>(),
            fam.at("scale").get<double>(), hbar);
    throw Error("family_from_config: unknown family kind \"" + kind + "\"");
}

ClassicalFastSystem classical_system_from_config(const RunConfig& config) {
    const ordered_json& cl = config.canonical.at("classical");
    const std::string system = cl.at("system").get<std::string>();
    const double hbar = cl.at("hbar").get<double>();
    if (system == "harmonic")
        return ClassicalFastSystem::harmonic(cl.at("mass").get<double>(),
                                             cl.at("omega").get<double>(), hbar);
    if (system == "quartic-coupled")
        return ClassicalFastSystem::quartic_coupled(cl.at("beta").get<double>(), hbar);
    throw Error("classical_system_from_config: unknown system \"" + system + "\"");
}

RealVector time_grid(const nlohmann::ordered_json& times) {
    if (times.is_array()) {
        RealVector out(static_cast<Eigen::Index>(times.size()));
        for (std::size_t i = 0; i < times.size(); ++i)
            out[static_cast<Eigen::Index>(i)] = times[i].get<double>();
        return out;
    }
    const double start = times.at("start").get<double>();
    const double stop = times.at("stop").get<double>();
    const long count = times.at("count").get<long>();
    RealVector out(count);
    for (long k = 0; k < count; ++k)
        out[k] = start + (stop - start) * static_cast<double>(k) /
                             static_cast<double>(count - 1);
    return out;
}

} // namespace geomflux
