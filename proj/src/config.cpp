#include "occucert/config.hpp"

#include <cmath>
#include <sstream>

namespace occucert {

using nlohmann::json;

namespace {

class Parser {
  public:
    explicit Parser(std::vector<std::string>& errors) : errors_(errors) {}

    void fail(const std::string& pointer, const std::string& what) {
        errors_.push_back(pointer + ": " + what);
    }

    bool require_object(const json& j, const std::string& ptr) {
        if (!j.is_object()) {
            fail(ptr, "must be an object");
            return false;
        }
        return true;
    }
    bool require_array(const json& j, const std::string& ptr, std::size_t min_size = 0) {
        if (!j.is_array()) {
            fail(ptr, "must be an array");
            return false;
        }
        if (j.size() < min_size) {
            fail(ptr, "must have at least " + std::to_string(min_size) + " entries");
            return false;
        }
        return true;
    }
    double number(const json& j, const std::string& ptr, double fallback = 0.0) {
        if (!j.is_number()) {
            fail(ptr, "must be a number");
            return fallback;
        }
        return j.get<double>();
    }
    const json* field(const json& j, const char* name, const std::string& ptr,
                      bool required = true) {
        if (!j.is_object() || !j.contains(name)) {
            if (required) fail(ptr + "/" + name, "is required");
            return nullptr;
        }
        return &j.at(name);
    }

  private:
    std::vector<std::string>& errors_;
};

Polynomial parse_polynomial(Parser& p, const json& j, int dim, const std::string& ptr) {
    Polynomial out(dim);
    if (!p.require_array(j, ptr)) return out;
    for (std::size_t t = 0; t < j.size(); ++t) {
        const std::string tptr = ptr + "/" + std::to_string(t);
        const json& term = j[t];
        if (!p.require_object(term, tptr)) continue;
        const json* exps = p.field(term, "exponents", tptr);
        const json* coef = p.field(term, "coefficient", tptr);
        if (!exps || !coef) continue;
        if (!p.require_array(*exps, tptr + "/exponents")) continue;
        if (static_cast<int>(exps->size()) != dim) {
            p.fail(tptr + "/exponents", "length must equal the number of variables");
            continue;
        }
        Monomial m = Monomial::unit(dim);
        bool ok = true;
        for (int i = 0; i < dim; ++i) {
            const json& e = (*exps)[i];
            if (!e.is_number_integer() || e.get<long>() < 0) {
                p.fail(tptr + "/exponents/" + std::to_string(i),
                       "must be a non-negative integer");
                ok = false;
                break;
            }
            m.exponents[i] = static_cast<int>(e.get<long>());
        }
        if (!ok) continue;
        const double c = p.number(*coef, tptr + "/coefficient");
        out.add_term(m, c);
    }
    return out;
}

SimConfig parse_sim(Parser& p, const json& j, const std::string& ptr) {
    SimConfig cfg;
    if (const json* v = p.field(j, "dt", ptr, false)) cfg.dt = p.number(*v, ptr + "/dt");
    if (const json* v = p.field(j, "n_paths", ptr, false)) {
        if (!v->is_number_integer() || v->get<long>() < 1)
            p.fail(ptr + "/n_paths", "must be a positive integer");
        else cfg.n_paths = v->get<long>();
    }
    if (const json* v = p.field(j, "seed", ptr, false)) {
        if (!v->is_number_integer()) p.fail(ptr + "/seed", "must be an integer");
        else cfg.seed = v->get<std::uint64_t>();
    }
    if (const json* v = p.field(j, "record_paths", ptr, false)) {
        if (!v->is_number_integer() || v->get<long>() < 0)
            p.fail(ptr + "/record_paths", "must be a non-negative integer");
        else cfg.record_paths = static_cast<int>(v->get<long>());
    }
    if (!(cfg.dt > 0.0)) p.fail(ptr + "/dt", "must be positive");
    return cfg;
}

}  // namespace

ParseResult parse_config(const std::string& text) {
    ParseResult result;
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded()) {
        result.errors.push_back("/: malformed JSON");
        return result;
    }
    Parser p(result.errors);
    if (!p.require_object(root, "/")) return result;

    JobConfig cfg;

    const json* problem = p.field(root, "problem", "");
    int dim = 1;
    if (problem && p.require_object(*problem, "/problem")) {
        const std::string pp = "/problem";
        const json* vars = p.field(*problem, "variables", pp);
        if (vars && p.require_array(*vars, pp + "/variables", 1)) {
            dim = static_cast<int>(vars->size());
            for (std::size_t i = 0; i < vars->size(); ++i) {
                if (!(*vars)[i].is_string()) {
                    p.fail(pp + "/variables/" + std::to_string(i), "must be a string");
                } else {
                    cfg.variable_names.push_back((*vars)[i].get<std::string>());
                }
            }
        }
        cfg.problem.model.dimension = dim;
        cfg.problem.safe.dimension = dim;
        cfg.problem.target.dimension = dim;

        const json* dyn = p.field(*problem, "dynamics", pp);
        if (dyn && p.require_object(*dyn, pp + "/dynamics")) {
            const std::string dp = pp + "/dynamics";
            const json* drift = p.field(*dyn, "drift", dp);
            if (drift && p.require_array(*drift, dp + "/drift")) {
                if (static_cast<int>(drift->size()) != dim)
                    p.fail(dp + "/drift", "needs one polynomial per variable");
                for (std::size_t i = 0; i < drift->size(); ++i)
                    cfg.problem.model.drift.push_back(
                        parse_polynomial(p, (*drift)[i], dim, dp + "/drift/" + std::to_string(i)));
            }
            const json* diff = p.field(*dyn, "diffusion", dp);
            if (diff && p.require_array(*diff, dp + "/diffusion")) {
                if (static_cast<int>(diff->size()) != dim)
                    p.fail(dp + "/diffusion", "needs one row per variable");
                int m = -1;
                for (std::size_t i = 0; i < diff->size(); ++i) {
                    const std::string rp = dp + "/diffusion/" + std::to_string(i);
                    std::vector<Polynomial> row;
                    if (p.require_array((*diff)[i], rp, 1)) {
                        if (m < 0) m = static_cast<int>((*diff)[i].size());
                        else if (m != static_cast<int>((*diff)[i].size()))
                            p.fail(rp, "all diffusion rows need the same width");
                        for (std::size_t k = 0; k < (*diff)[i].size(); ++k)
                            row.push_back(parse_polynomial(p, (*diff)[i][k], dim,
                                                           rp + "/" + std::to_string(k)));
                    }
                    cfg.problem.model.diffusion.push_back(std::move(row));
                }
                cfg.problem.model.brownian_dim = std::max(1, m);
            }
            const json* x0 = p.field(*dyn, "initial_state", dp);
            if (x0 && p.require_array(*x0, dp + "/initial_state")) {
                if (static_cast<int>(x0->size()) != dim)
                    p.fail(dp + "/initial_state", "length must equal the number of variables");
                cfg.problem.model.initial_state.resize(x0->size());
                for (std::size_t i = 0; i < x0->size(); ++i)
                    cfg.problem.model.initial_state[static_cast<int>(i)] =
                        p.number((*x0)[i], dp + "/initial_state/" + std::to_string(i));
            }
        }

        auto parse_set = [&](const char* name, SemialgebraicSet& set, bool with_box) {
            const json* sj = p.field(*problem, name, pp);
            const std::string sp = pp + "/" + name;
            if (!sj || !p.require_object(*sj, sp)) return;
            const json* ineqs = p.field(*sj, "inequalities", sp);
            if (ineqs && p.require_array(*ineqs, sp + "/inequalities", 1)) {
                for (std::size_t i = 0; i < ineqs->size(); ++i)
                    set.inequalities.push_back(parse_polynomial(
                        p, (*ineqs)[i], dim, sp + "/inequalities/" + std::to_string(i)));
            }
            if (!with_box) return;
            const json* box = p.field(*sj, "bounding_box", sp);
            if (box && p.require_object(*box, sp + "/bounding_box")) {
                auto axis = [&](const char* side, Eigen::VectorXd& out_vec) {
                    const json* a = p.field(*box, side, sp + "/bounding_box");
                    if (a && p.require_array(*a, sp + "/bounding_box/" + side)) {
                        if (static_cast<int>(a->size()) != dim)
                            p.fail(sp + "/bounding_box/" + side,
                                   "length must equal the number of variables");
                        out_vec.resize(a->size());
                        for (std::size_t i = 0; i < a->size(); ++i)
                            out_vec[static_cast<int>(i)] = p.number(
                                (*a)[i], sp + "/bounding_box/" + side + "/" + std::to_string(i));
                    }
                };
                axis("lower", cfg.problem.box.lower);
                axis("upper", cfg.problem.box.upper);
            }
        };
        cfg.problem.safe.kind = SemialgebraicSet::Kind::OpenInterior;
        cfg.problem.target.kind = SemialgebraicSet::Kind::Closed;
        parse_set("safe_set", cfg.problem.safe, true);
        parse_set("target_set", cfg.problem.target, false);

        if (const json* h = p.field(*problem, "horizon", pp))
            cfg.problem.horizon = p.number(*h, pp + "/horizon");
        if (const json* k = p.field(*problem, "threshold", pp))
            cfg.problem.threshold = p.number(*k, pp + "/threshold");
    }

    const json* tasks = p.field(root, "tasks", "");
    if (tasks && p.require_array(*tasks, "/tasks")) {
        if (tasks->empty()) p.fail("/tasks", "must be non-empty");
        for (std::size_t i = 0; i < tasks->size(); ++i) {
            const std::string tp = "/tasks/" + std::to_string(i);
            const json& t = (*tasks)[i];
            if (!p.require_object(t, tp)) continue;
            if (t.size() != 1) {
                p.fail(tp, "must contain exactly one of verify, simulate, audit");
                continue;
            }
            if (t.contains("verify")) {
                const json& v = t.at("verify");
                const std::string vp = tp + "/verify";
                if (!p.require_object(v, vp)) continue;
                VerifyTask task;
                if (const json* th = p.field(v, "theorem", vp)) {
                    if (!th->is_string() || !parse_theorem(th->get<std::string>())) {
                        p.fail(vp + "/theorem",
                               "must be one of dissipative-upper, attractive-I-lower, "
                               "attractive-II-lower");
                    } else {
                        task.spec.theorem = *parse_theorem(th->get<std::string>());
                    }
                }
                if (const json* d = p.field(v, "degree", vp)) {
                    if (!d->is_number_integer() || d->get<long>() <= 0 || d->get<long>() % 2 != 0)
                        p.fail(vp + "/degree", "must be a positive even integer");
                    else task.spec.degree = static_cast<int>(d->get<long>());
                }
                if (const json* lg = p.field(v, "lambda_grid", vp)) {
                    if (p.require_array(*lg, vp + "/lambda_grid", 1)) {
                        for (std::size_t k = 0; k < lg->size(); ++k) {
                            const double lam = p.number((*lg)[k],
                                                        vp + "/lambda_grid/" + std::to_string(k));
                            if (!(lam > 0.0))
                                p.fail(vp + "/lambda_grid/" + std::to_string(k),
                                       "must be positive");
                            task.spec.lambda_grid.push_back(lam);
                        }
                    }
                }
                const bool needs_m = task.spec.theorem != TheoremKind::DissipativeUpper;
                if (const json* mg = p.field(v, "m_grid", vp, needs_m)) {
                    if (p.require_array(*mg, vp + "/m_grid", needs_m ? 1 : 0)) {
                        for (std::size_t k = 0; k < mg->size(); ++k) {
                            const double mv =
                                p.number((*mg)[k], vp + "/m_grid/" + std::to_string(k));
                            if (!(mv > 0.0))
                                p.fail(vp + "/m_grid/" + std::to_string(k), "must be positive");
                            task.spec.m_grid.push_back(mv);
                        }
                    }
                }
                cfg.tasks.emplace_back(std::move(task));
            } else if (t.contains("simulate")) {
                const json& s = t.at("simulate");
                const std::string sp = tp + "/simulate";
                if (!p.require_object(s, sp)) continue;
                SimulateTask task;
                task.sim = parse_sim(p, s, sp);
                cfg.tasks.emplace_back(std::move(task));
            } else if (t.contains("audit")) {
                const json& a = t.at("audit");
                const std::string ap = tp + "/audit";
                if (!p.require_object(a, ap)) continue;
                AuditTask task;
                if (const json* c = p.field(a, "certificate", ap)) {
                    if (!c->is_string()) p.fail(ap + "/certificate", "must be a path string");
                    else task.certificate_path = c->get<std::string>();
                }
                task.sim = parse_sim(p, a, ap);
                cfg.tasks.emplace_back(std::move(task));
            } else {
                p.fail(tp, "must contain exactly one of verify, simulate, audit");
            }
        }
    }

    if (const json* od = p.field(root, "output_dir", "", false)) {
        if (!od->is_string()) p.fail("/output_dir", "must be a string");
        else cfg.output_dir = od->get<std::string>();
    }

    if (!result.errors.empty()) return result;

    for (const auto& violation : validate(cfg.problem)) {
        std::string ptr = "/problem";
        if (violation.find("target") != std::string::npos) ptr += "/target_set";
        else if (violation.find("initial state") != std::string::npos)
            ptr += "/dynamics/initial_state";
        else if (violation.find("horizon") != std::string::npos) ptr += "/horizon";
        else if (violation.find("threshold") != std::string::npos) ptr += "/threshold";
        else if (violation.find("bounding box") != std::string::npos)
            ptr += "/safe_set/bounding_box";
        result.errors.push_back(ptr + ": " + violation);
    }
    if (!result.errors.empty()) return result;

    result.config = std::move(cfg);
    return result;
}

json polynomial_to_json(const Polynomial& p) {
    json out = json::array();
    for (const auto& [m, c] : p.terms()) {
        out.push_back({{"exponents", m.exponents}, {"coefficient", c}});
    }
    return out;
}

Polynomial polynomial_from_json(const json& j, int dimension) {
    std::vector<std::string> errs;
    Parser p(errs);
    Polynomial out = parse_polynomial(p, j, dimension, "");
    if (!errs.empty()) throw std::invalid_argument("polynomial: " + errs.front());
    return out;
}

json config_to_json(const JobConfig& cfg) {
    json problem;
    problem["variables"] = cfg.variable_names;
    json drift = json::array();
    for (const auto& f : cfg.problem.model.drift) drift.push_back(polynomial_to_json(f));
    json diffusion = json::array();
    for (const auto& row : cfg.problem.model.diffusion) {
        json r = json::array();
        for (const auto& s : row) r.push_back(polynomial_to_json(s));
        diffusion.push_back(std::move(r));
    }
    std::vector<double> x0(cfg.problem.model.initial_state.begin(),
                           cfg.problem.model.initial_state.end());
    problem["dynamics"] = {{"drift", drift}, {"diffusion", diffusion}, {"initial_state", x0}};
    json safe_ineqs = json::array();
    for (const auto& g : cfg.problem.safe.inequalities) safe_ineqs.push_back(polynomial_to_json(g));
    problem["safe_set"] = {
        {"inequalities", safe_ineqs},
        {"bounding_box",
         {{"lower", std::vector<double>(cfg.problem.box.lower.begin(), cfg.problem.box.lower.end())},
          {"upper",
           std::vector<double>(cfg.problem.box.upper.begin(), cfg.problem.box.upper.end())}}}};
    json target_ineqs = json::array();
    for (const auto& h : cfg.problem.target.inequalities)
        target_ineqs.push_back(polynomial_to_json(h));
    problem["target_set"] = {{"inequalities", target_ineqs}};
    problem["horizon"] = cfg.problem.horizon;
    problem["threshold"] = cfg.problem.threshold;

    json tasks = json::array();
    for (const auto& task : cfg.tasks) {
        if (const auto* v = std::get_if<VerifyTask>(&task)) {
            json t = {{"theorem", to_string(v->spec.theorem)},
                      {"degree", v->spec.degree},
                      {"lambda_grid", v->spec.lambda_grid}};
            if (!v->spec.m_grid.empty()) t["m_grid"] = v->spec.m_grid;
            tasks.push_back({{"verify", t}});
        } else if (const auto* s = std::get_if<SimulateTask>(&task)) {
            tasks.push_back({{"simulate",
                              {{"dt", s->sim.dt},
                               {"n_paths", s->sim.n_paths},
                               {"seed", s->sim.seed},
                               {"record_paths", s->sim.record_paths}}}});
        } else if (const auto* a = std::get_if<AuditTask>(&task)) {
            tasks.push_back({{"audit",
                              {{"certificate", a->certificate_path},
                               {"dt", a->sim.dt},
                               {"n_paths", a->sim.n_paths},
                               {"seed", a->sim.seed}}}});
        }
    }
    return json{{"problem", problem}, {"tasks", tasks}, {"output_dir", cfg.output_dir}};
}

json certificate_to_json(const Certificate& cert) {
    json j;
    j["theorem"] = to_string(cert.theorem);
    j["degree"] = cert.degree;
    j["dimension"] = cert.v.dimension();
    j["lambda"] = cert.lambda;
    j["beta"] = cert.beta;
    if (cert.m_bound) j["m"] = *cert.m_bound;
    j["v"] = polynomial_to_json(cert.v);
    j["v0"] = cert.v0;
    j["bound"] = cert.bound;
    j["raw_bound"] = cert.raw_bound;
    if (cert.delta) j["delta"] = *cert.delta;
    if (cert.delta_w) j["delta_w"] = *cert.delta_w;
    if (cert.gamma) j["gamma"] = *cert.gamma;
    j["beta_margin"] = cert.beta_margin;
    j["accepted"] = cert.accepted;
    j["postcheck_violation"] = cert.postcheck_violation;
    j["replay_violation"] = cert.replay_violation;
    j["solver"] = {{"status", to_string(cert.solver.status)},
                   {"objective", cert.solver.objective_value},
                   {"dual_objective", cert.solver.dual_objective},
                   {"primal_residual", cert.solver.primal_residual},
                   {"dual_residual", cert.solver.dual_residual},
                   {"duality_gap", cert.solver.duality_gap},
                   {"iterations", cert.solver.iterations},
                   {"psd_min_eigenvalues", cert.solver.psd_min_eigenvalues},
                   {"message", cert.solver.message}};
    return j;
}

std::optional<Certificate> certificate_from_json(const json& j, std::string* error) {
    auto bail = [&](const std::string& msg) {
        if (error) *error = msg;
        return std::nullopt;
    };
    try {
        if (!j.is_object()) return bail("certificate must be a JSON object");
        Certificate cert;
        const auto kind = parse_theorem(j.at("theorem").get<std::string>());
        if (!kind) return bail("unknown theorem kind");
        cert.theorem = *kind;
        cert.degree = j.value("degree", 0);
        const int dim = j.at("dimension").get<int>();
        cert.lambda = j.at("lambda").get<double>();
        cert.beta = j.at("beta").get<double>();
        if (j.contains("m")) cert.m_bound = j.at("m").get<double>();
        cert.v = polynomial_from_json(j.at("v"), dim);
        cert.v0 = j.value("v0", 0.0);
        cert.bound = j.value("bound", 0.0);
        cert.raw_bound = j.value("raw_bound", cert.bound);
        if (j.contains("delta")) cert.delta = j.at("delta").get<double>();
        if (j.contains("delta_w")) cert.delta_w = j.at("delta_w").get<double>();
        if (j.contains("gamma")) cert.gamma = j.at("gamma").get<double>();
        cert.beta_margin = j.value("beta_margin", 0.0);
        cert.accepted = j.value("accepted", false);
        cert.postcheck_violation = j.value("postcheck_violation", 0.0);
        cert.replay_violation = j.value("replay_violation", 0.0);
        return cert;
    } catch (const std::exception& ex) {
        return bail(ex.what());
    }
}

json mc_estimate_to_json(const McEstimate& est) {
    return json{{"p_hat", est.p_hat},
                {"ci_halfwidth", est.ci_halfwidth},
                {"n_paths", est.n_paths},
                {"n_success", est.n_success},
                {"n_safety_violations", est.n_safety_violations},
                {"n_failed_numerical", est.n_failed_numerical}};
}

json audit_to_json(const AuditResult& audit) {
    return json{{"theorem", to_string(audit.theorem)},
                {"mean", audit.mean},
                {"std_error", audit.std_error},
                {"expectation_bound", audit.expectation_bound},
                {"bound_is_upper", audit.bound_is_upper},
                {"n_paths", audit.n_paths},
                {"within_3se", audit.bound_is_upper
                                   ? audit.mean <= audit.expectation_bound + 3 * audit.std_error
                                   : audit.mean >= audit.expectation_bound - 3 * audit.std_error}};
}

json grid_report_to_json(const GridReport& report) {
    json points = json::array();
    for (const auto& pt : report.points) {
        json row;
        row["lambda"] = pt.lambda;
        if (pt.m_bound) row["m"] = *pt.m_bound;
        row["status"] = pt.status;
        row["solve_seconds"] = pt.solve_seconds;
        if (pt.certificate) row["certificate"] = certificate_to_json(*pt.certificate);
        points.push_back(std::move(row));
    }
    json out;
    out["theorem"] = to_string(report.spec.theorem);
    out["degree"] = report.spec.degree;
    out["points"] = std::move(points);
    if (report.best) out["best"] = certificate_to_json(*report.best);
    return out;
}

}  // namespace occucert
