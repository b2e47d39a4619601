#include "blowup/archive.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace blowup {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double get_num(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

BvpStatus status_from_string(const std::string& s) {
    if (s == "converged") return BvpStatus::converged;
    if (s == "newton_failure") return BvpStatus::newton_failure;
    if (s == "mesh_overflow") return BvpStatus::mesh_overflow;
    throw ArchiveError("unknown solver status: " + s);
}

Termination termination_from_string(const std::string& s) {
    for (auto t : {Termination::completed, Termination::jump_detected, Termination::step_underflow,
                   Termination::newton_failure})
        if (to_string(t) == s) return t;
    throw ArchiveError("unknown termination: " + s);
}

json provenance_json(const Provenance& p) {
    return {{"command", p.command}, {"tolerances", {{"tol", num(p.tol)}, {"eps", num(p.eps)}}}};
}

Provenance provenance_from(const json& j) {
    Provenance p;
    p.command = j.at("command").get<std::string>();
    p.tol = get_num(j.at("tolerances").at("tol"));
    p.eps = get_num(j.at("tolerances").at("eps"));
    return p;
}

json params_json(const ProfileProblemSpec& s, std::size_t max_nodes) {
    return {{"n", s.params.n()},
            {"p", s.params.p()},
            {"form", to_string(s.form)},
            {"symmetry", to_string(s.symmetry)},
            {"R", s.R},
            {"eps", s.eps},
            {"right_bc", to_string(s.right_bc)},
            {"drift", s.drift ? json(*s.drift) : json(nullptr)},
            {"max_nodes", max_nodes}};
}

json profile_body(const ProfileSolution& sol) {
    json j;
    j["params"] = params_json(sol.spec, sol.mesh.max_nodes);
    j["mesh"] = sol.mesh.nodes;
    j["F"] = sol.F;
    j["dF"] = sol.dF;
    j["d2F"] = sol.d2F;
    j["d3F"] = sol.d3F;
    j["residual"] = num(sol.residual);
    j["tol"] = sol.tol;
    j["status"] = to_string(sol.status);
    j["newton_iterations"] = sol.newton_iterations;
    j["diagnostic"] = sol.diagnostic;
    j["y0"] = sol.y0 ? num(*sol.y0) : json(nullptr);
    j["zero_count"] = sol.zero_count ? json(*sol.zero_count) : json(nullptr);
    j["sigma"] = sol.sigma ? json(sol.sigma->str()) : json(nullptr);
    return j;
}

ProfileSolution profile_from(const json& j) {
    const auto& P = j.at("params");
    ProfileProblemSpec spec;
    spec.params = ProblemParams(P.at("n").get<double>(), P.at("p").get<double>());
    spec.form = form_from_string(P.at("form").get<std::string>());
    spec.symmetry = symmetry_from_string(P.at("symmetry").get<std::string>());
    spec.R = P.at("R").get<double>();
    spec.eps = P.at("eps").get<double>();
    spec.right_bc = right_bc_from_string(P.at("right_bc").get<std::string>());
    if (!P.at("drift").is_null()) spec.drift = P.at("drift").get<double>();
    spec.validate();

    Mesh mesh(j.at("mesh").get<std::vector<double>>(), P.at("max_nodes").get<std::size_t>());
    auto sol = ProfileSolution::from_arrays(spec, std::move(mesh), j.at("F").get<std::vector<double>>(),
                                            j.at("dF").get<std::vector<double>>(),
                                            j.at("d2F").get<std::vector<double>>(),
                                            j.at("d3F").get<std::vector<double>>());
    sol.residual = get_num(j.at("residual"));
    sol.tol = j.at("tol").get<double>();
    sol.status = status_from_string(j.at("status").get<std::string>());
    sol.newton_iterations = j.at("newton_iterations").get<int>();
    sol.diagnostic = j.at("diagnostic").get<std::string>();
    if (!j.at("y0").is_null()) sol.y0 = j.at("y0").get<double>();
    if (!j.at("zero_count").is_null()) sol.zero_count = j.at("zero_count").get<int>();
    if (!j.at("sigma").is_null()) sol.sigma = MultiIndex::parse(j.at("sigma").get<std::string>());
    return sol;
}

json parse_checked(const std::string& text, const char* kind) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ArchiveError(std::string("corrupt archive: ") + e.what());
    }
    if (!j.is_object() || !j.contains("version")) throw ArchiveError("corrupt archive: no version field");
    if (!j["version"].is_number_integer() || j["version"].get<int>() != kArchiveVersion)
        throw ArchiveError("unsupported archive version " + j["version"].dump() + ", expected " +
                           std::to_string(kArchiveVersion));
    if (kind && j.value("kind", std::string()) != kind) throw ArchiveError(std::string("not a ") + kind + " archive");
    return j;
}

template <class F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const ArchiveError&) {
        throw;
    } catch (const std::exception& e) {
        throw ArchiveError(std::string("corrupt archive: ") + e.what());
    }
}

} // namespace

std::string dump_profile(const ProfileSolution& sol, const Provenance& prov) {
    json j = profile_body(sol);
    j["version"] = kArchiveVersion;
    j["kind"] = "profile";
    j["provenance"] = provenance_json(prov);
    return j.dump(1) + "\n";
}

ProfileArchive parse_profile(const std::string& text) {
    const json j = parse_checked(text, "profile");
    return guarded([&] { return ProfileArchive{profile_from(j), provenance_from(j.at("provenance"))}; });
}

std::string dump_branch(const Branch& br, const Provenance& prov) {
    if (br.points.empty()) throw std::invalid_argument("cannot archive an empty branch");
    json pts = json::array();
    for (const auto& p : br.points)
        pts.push_back({{"param", p.param},
                       {"F0", p.F0},
                       {"sup", p.sup},
                       {"sigma", p.sigma.str()},
                       {"step", p.step},
                       {"jump", p.jump}});
    json j;
    j["version"] = kArchiveVersion;
    j["kind"] = "branch";
    j["param"] = to_string(br.param);
    j["target"] = br.target;
    j["dp"] = br.dp;
    j["termination"] = to_string(br.reason);
    j["diagnostic"] = br.diagnostic;
    j["points"] = std::move(pts);
    j["last"] = profile_body(br.points.back().solution);
    j["provenance"] = provenance_json(prov);
    return j.dump(1) + "\n";
}

BranchArchive parse_branch(const std::string& text) {
    const json j = parse_checked(text, "branch");
    return guarded([&] {
        BranchArchive a;
        auto& br = a.branch;
        br.param = continuation_param_from_string(j.at("param").get<std::string>());
        br.target = j.at("target").get<double>();
        br.dp = j.at("dp").get<double>();
        br.reason = termination_from_string(j.at("termination").get<std::string>());
        br.diagnostic = j.at("diagnostic").get<std::string>();
        for (const auto& p : j.at("points")) {
            BranchPoint b;
            b.param = p.at("param").get<double>();
            b.F0 = p.at("F0").get<double>();
            b.sup = p.at("sup").get<double>();
            b.sigma = MultiIndex::parse(p.at("sigma").get<std::string>());
            b.step = p.at("step").get<double>();
            b.jump = p.at("jump").get<bool>();
            br.points.push_back(std::move(b));
        }
        if (br.points.empty()) throw ArchiveError("branch archive has no points");
        br.points.back().solution = profile_from(j.at("last"));
        a.provenance = provenance_from(j.at("provenance"));
        return a;
    });
}

std::string archive_kind(const std::string& text) {
    const json j = parse_checked(text, nullptr);
    const auto k = j.value("kind", std::string());
    if (k != "profile" && k != "branch") throw ArchiveError("unknown archive kind '" + k + "'");
    return k;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArchiveError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << text;
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_profile_csv(std::ostream& os, const ProfileSolution& sol) {
    os << "y,F,dF,d2F,d3F\n";
    for (std::size_t i = 0; i < sol.mesh.size(); ++i)
        os << fmt(sol.mesh.nodes[i]) << ',' << fmt(sol.F[i]) << ',' << fmt(sol.dF[i]) << ',' << fmt(sol.d2F[i])
           << ',' << fmt(sol.d3F[i]) << '\n';
}

void write_log_interface_csv(std::ostream& os, const ProfileSolution& sol, double y0) {
    os << "log10_dist,log10_absF\n";
    for (std::size_t i = 0; i < sol.mesh.size(); ++i) {
        const double d = y0 - sol.mesh.nodes[i];
        if (!(d > 0) || sol.F[i] == 0.0) continue;
        os << fmt(std::log10(d)) << ',' << fmt(std::log10(std::abs(sol.F[i]))) << '\n';
    }
}

void write_branch_csv(std::ostream& os, const Branch& br) {
    os << to_string(br.param) << ",F0,sup,sigma,step,jump\n";
    for (const auto& p : br.points)
        os << fmt(p.param) << ',' << fmt(p.F0) << ',' << fmt(p.sup) << ",\"" << p.sigma.str() << "\","
           << fmt(p.step) << ',' << (p.jump ? 1 : 0) << '\n';
}

void write_oscillatory_csv(std::ostream& os, const OscComponent& c) {
    os << "s,phi,dphi,d2phi\n";
    for (const auto& s : c.samples) os << fmt(s.s) << ',' << fmt(s.phi) << ',' << fmt(s.dphi) << ',' << fmt(s.d2phi) << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
    os << "y";
    for (std::size_t k = 0; k < t.dimension(); ++k) os << (k == 0 ? ",F" : k == 1 ? ",dF" : ",d" + std::to_string(k) + "F");
    os << '\n';
    for (std::size_t i = 0; i < t.times().size(); ++i) {
        os << fmt(t.times()[i]);
        for (double v : t.states()[i]) os << ',' << fmt(v);
        os << '\n';
    }
}

} // namespace blowup
