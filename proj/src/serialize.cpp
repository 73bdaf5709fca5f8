#include "awh/serialize.hpp"

#include "awh/errors.hpp"
#include "awh/numerics.hpp"

#include <charconv>
#include <ostream>

#include "json.hpp"

namespace awh {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string repro_header(uint64_t config_hash, uint64_t seed) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "# %s version=%s config=%016llx seed=%llu",
                  kSchema, kVersion, (unsigned long long)config_hash,
                  (unsigned long long)seed);
    return buf;
}

namespace {

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx cplx_from(const json& j, const char* name) {
    if (j.is_number()) return cplx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return cplx(j[0].get<double>(), j[1].get<double>());
    throw DomainError(std::string(name) + ": expected a number or [re, im]");
}

json parse_object(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DomainError("malformed JSON");
    if (!j.is_object()) throw DomainError("expected a JSON object");
    return j;
}

double number_at(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw DomainError(std::string("missing numeric field \"") + key + "\"");
    return j[key].get<double>();
}

void put_meta(json& j, uint64_t config_hash, uint64_t seed) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)config_hash);
    j["schema"] = kSchema;
    j["version"] = kVersion;
    j["config"] = hex;
    j["seed"] = seed;
}

json params_obj(const ProcessParams& p) {
    return json{{"A", cplx_json(p.A)}, {"B", cplx_json(p.B)},
                {"C", cplx_json(p.C)}, {"D", cplx_json(p.D)},
                {"q", p.q}};
}

}  // namespace

std::string params_to_json(const ProcessParams& p, int indent) {
    return params_obj(p).dump(indent);
}

ProcessParams params_from_json(const std::string& text) {
    json j = parse_object(text);
    for (const char* key : {"A", "B", "C", "D", "q"})
        if (!j.contains(key))
            throw DomainError(std::string("missing field \"") + key + "\"");
    if (!j["q"].is_number()) throw DomainError("q: expected a number");
    return validate(cplx_from(j["A"], "A"), cplx_from(j["B"], "B"),
                    cplx_from(j["C"], "C"), cplx_from(j["D"], "D"),
                    j["q"].get<double>());
}

std::string greeks_to_json(const HarnessParams& h, int indent) {
    json j{{"eta", h.eta},
           {"theta", h.theta},
           {"sigma", h.sigma},
           {"tau", h.tau},
           {"gamma", h.gamma}};
    return j.dump(indent);
}

HarnessParams greeks_from_json(const std::string& text) {
    json j = parse_object(text);
    HarnessParams h;
    h.eta = j.contains("eta") ? number_at(j, "eta") : 0.0;
    h.theta = j.contains("theta") ? number_at(j, "theta") : 0.0;
    h.sigma = j.contains("sigma") ? number_at(j, "sigma") : 0.0;
    h.tau = j.contains("tau") ? number_at(j, "tau") : 0.0;
    h.gamma = j.contains("gamma") ? number_at(j, "gamma") : 0.0;
    return h;
}

std::string identity_report_to_json(const IdentityReport& r, int indent) {
    json j{{"identity", r.identity},
           {"n_max", r.n_max},
           {"max_residual", r.max_residual},
           {"argmax_n", r.argmax_n},
           {"params", params_obj(r.params)}};
    return j.dump(indent);
}

void write_trajectories_csv(std::ostream& os, const ProcessParams& p,
                            const std::vector<Trajectory>& paths,
                            uint64_t config_hash, uint64_t seed) {
    os << repro_header(config_hash, seed) << "\n";
    os << "path_id,t,y,z,x\n";
    for (size_t id = 0; id < paths.size(); ++id) {
        const Trajectory& tr = paths[id];
        for (size_t i = 0; i < tr.times.size(); ++i) {
            double t = tr.times[i], y = tr.values[i];
            double z = z_from_y(p, t, y);
            double x = x_from_z(p, mobius_h(p, t), z);
            os << id << ',' << fmt_double(t) << ',' << fmt_double(y) << ','
               << fmt_double(z) << ',' << fmt_double(x) << '\n';
        }
    }
}

std::string trajectories_to_json(const ProcessParams& p,
                                 const std::vector<Trajectory>& paths,
                                 uint64_t config_hash, uint64_t seed,
                                 int indent) {
    json out;
    put_meta(out, config_hash, seed);
    out["params"] = params_obj(p);
    json arr = json::array();
    for (size_t id = 0; id < paths.size(); ++id) {
        const Trajectory& tr = paths[id];
        json t = json::array(), y = json::array(), z = json::array(),
             x = json::array();
        for (size_t i = 0; i < tr.times.size(); ++i) {
            double zi = z_from_y(p, tr.times[i], tr.values[i]);
            t.push_back(tr.times[i]);
            y.push_back(tr.values[i]);
            z.push_back(zi);
            x.push_back(x_from_z(p, mobius_h(p, tr.times[i]), zi));
        }
        arr.push_back(json{{"path_id", id},
                           {"seed", tr.seed},
                           {"stream", tr.stream},
                           {"t", t},
                           {"y", y},
                           {"z", z},
                           {"x", x}});
    }
    out["paths"] = arr;
    return out.dump(indent);
}

std::string mc_report_to_json(const McConditional& r, uint64_t config_hash,
                              uint64_t seed, int indent) {
    json out;
    put_meta(out, config_hash, seed);
    out["n_paths"] = r.n_paths;
    out["regression"] = json{{"coef_s", r.coef_s},   {"se_s", r.se_s},
                             {"target_s", r.target_s}, {"coef_u", r.coef_u},
                             {"se_u", r.se_u},       {"target_u", r.target_u}};
    out["covariance"] = json{
        {"estimate", r.cov_st}, {"se", r.cov_se}, {"target", r.cov_target}};
    out["greeks"] = json{{"eta_hat", r.eta_hat},
                         {"eta_se", r.eta_se},
                         {"sigma_hat", r.sigma_hat},
                         {"sigma_se", r.sigma_se}};
    json cells = json::array();
    for (const McCell& c : r.cells)
        cells.push_back(json{{"g1", c.g1},
                             {"g2", c.g2},
                             {"count", c.count},
                             {"var_hat", c.var_hat},
                             {"var_se", c.var_se},
                             {"var_target", c.var_target}});
    out["cells"] = cells;
    return out.dump(indent);
}

}  // namespace awh
