#include "blowup/cli.hpp"

#include "blowup/archive.hpp"
#include "blowup/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

namespace blowup {

namespace {

struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string join(const std::vector<std::string>& args) {
    std::string s = "blowup";
    for (const auto& a : args) s += " " + a;
    return s;
}

template <class W>
void emit(const std::string& path, std::ostream& out, W&& write) {
    if (path.empty()) return;
    if (path == "-") {
        write(out);
        return;
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    write(f);
}

double parse_n(const std::string& s) {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size()) throw InvalidInput("n must be a number or 'inf'");
    return v;
}

// "sign:shift,sign:shift", e.g. "1:-3,1:3".
std::vector<std::pair<int, double>> parse_glue(const std::string& text) {
    std::vector<std::pair<int, double>> out;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        const auto c = tok.find(':');
        if (c == std::string::npos) throw InvalidInput("glue components are sign:shift");
        const int sign = std::stoi(tok.substr(0, c));
        if (sign != 1 && sign != -1) throw InvalidInput("glue signs must be +1 or -1");
        out.emplace_back(sign, std::stod(tok.substr(c + 1)));
    }
    if (out.empty()) throw InvalidInput("empty glue list");
    return out;
}

ProfileSolution load_any_profile(const std::string& path) {
    const auto text = read_file(path);
    if (archive_kind(text) == "branch") return parse_branch(text).branch.points.back().solution;
    return parse_profile(text).solution;
}

std::optional<double> interface_of(const ProfileSolution& sol) {
    if (sol.y0) return sol.y0;
    if (!sol.converged() || sol.spec.right_bc != RightBc::compact_support) return std::nullopt;
    try {
        return interface_estimate(sol).y0;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::string summary(const ProfileSolution& s) {
    std::ostringstream os;
    os << "status=" << to_string(s.status) << " n=" << s.spec.params.n() << " p=" << s.spec.params.p()
       << " form=" << to_string(s.spec.form) << " F(0)=" << fmt(s.F.empty() ? 0.0 : s.F.front());
    if (s.y0) os << " y0=" << *s.y0;
    if (s.sigma) os << " sigma=" << s.sigma->str();
    os << " nodes=" << s.mesh.size() << " residual=" << s.residual;
    if (!s.converged() && !s.diagnostic.empty()) os << " diagnostic=\"" << s.diagnostic << "\"";
    return os.str();
}

struct SolveArgs {
    double n = 1, p = 2;
    std::string symmetry = "even", form = "auto", glue, out, csv, log_interface;
    double eps = 1e-10, tol = 1e-10, R = 0;
    std::size_t initial_nodes = 0, max_nodes = 0;
};

int cmd_solve(const SolveArgs& a, const std::string& command, std::ostream& out) {
    const auto sym = symmetry_from_string(a.symmetry);
    auto spec = default_spec(a.n, a.p, sym);
    if (a.form != "auto") spec.form = form_from_string(a.form);
    spec.eps = a.eps;
    ProfileSolveOptions o;
    o.tol = a.tol;
    o.max_nodes = a.max_nodes ? a.max_nodes : max_nodes_from_env();

    ProfileGuess guess;
    if (!a.glue.empty()) {
        const auto comps = parse_glue(a.glue);
        double reach = 0;
        for (const auto& c : comps) reach = std::max(reach, std::abs(c.second));
        auto base_spec = default_spec(a.n, a.p, Symmetry::even);
        base_spec.eps = a.eps;
        const auto base = solve_profile(base_spec, cap_guess(base_spec), o);
        if (!base.converged()) {
            out << "solve status=" << to_string(base.status) << " glue base profile failed: " << base.diagnostic << "\n";
            return exit_no_convergence;
        }
        spec.R = a.R > 0 ? a.R : spec.R + reach;
        spec.validate();
        o.initial_nodes = a.initial_nodes ? a.initial_nodes : 2001;
        guess = glue_guess(comps, base, o.initial_nodes);
    } else {
        if (a.R > 0) spec.R = a.R;
        spec.validate();
        if (a.initial_nodes) o.initial_nodes = a.initial_nodes;
        guess = cap_guess(spec);
    }

    const auto sol = solve_profile(spec, guess, o);
    const Provenance prov{command, a.tol, a.eps};
    if (!a.out.empty()) write_file(a.out, dump_profile(sol, prov));
    emit(a.csv, out, [&](std::ostream& os) { write_profile_csv(os, sol); });
    if (!a.log_interface.empty()) {
        const auto y0 = interface_of(sol);
        if (!y0) throw std::runtime_error("no interface estimate for --log-interface");
        emit(a.log_interface, out, [&](std::ostream& os) { write_log_interface_csv(os, sol, *y0); });
    }
    out << "solve " << summary(sol) << "\n";
    return sol.converged() ? exit_ok : exit_no_convergence;
}

struct BranchArgs {
    std::vector<std::string> from, out, csv;
    std::string param = "p";
    double to = 0, dp = 1e-2, dp_min = 1e-5, dp_max = 5e-2, tol = 1e-6, eps = 1e-6, jump = 0.3;
    bool continue_on_jump = false;
    int parallel = 1;
    std::size_t max_nodes = 0;
};

struct BranchJob {
    std::string line;
    bool failed = false;
    bool invalid = false;
};

BranchJob run_branch_job(const BranchArgs& a, std::size_t k, const std::string& command) {
    BranchJob job;
    ContinuationOptions o;
    o.dp0 = a.dp;
    o.dp_min = a.dp_min;
    o.dp_max = a.dp_max;
    o.tol = a.tol;
    o.eps = a.eps;
    o.jump_threshold = a.jump;
    o.stop_on_jump = !a.continue_on_jump;
    o.max_nodes = a.max_nodes ? a.max_nodes : max_nodes_from_env();
    const auto param = continuation_param_from_string(a.param);

    Branch br;
    Provenance prov{command, 0, 0};
    const auto text = read_file(a.from[k]);
    const bool resume = archive_kind(text) == "branch";
    ProfileSolution seed;
    if (resume) {
        auto ar = parse_branch(text);
        br = std::move(ar.branch);
        if (br.param != param) throw InvalidInput("branch archive was built in " + to_string(br.param));
        seed = br.points.back().solution;
    } else {
        seed = parse_profile(text).solution;
    }
    if (!seed.converged()) throw InvalidInput(a.from[k] + " does not hold a converged profile");
    prov.tol = a.tol > 0 ? a.tol : seed.tol;
    prov.eps = a.eps > 0 ? a.eps : seed.spec.eps;

    const std::string path = a.out.empty() ? std::string() : a.out[k];
    o.checkpoint = [&](const Branch& b) {
        if (!path.empty()) write_file(path, dump_branch(b, prov));
    };
    if (resume) resume_branch(br, a.to, o);
    else br = continue_branch(seed, param, a.to, o);
    if (!path.empty()) write_file(path, dump_branch(br, prov));
    if (k < a.csv.size()) emit(a.csv[k], std::cout, [&](std::ostream& os) { write_branch_csv(os, br); });

    bool monotone = true;
    for (std::size_t i = 1; i < br.points.size(); ++i) {
        const double d = br.points[i].param - br.points[i - 1].param;
        const double dF = br.points[i].F0 - br.points[i - 1].F0;
        if (d * dF > 0) monotone = false;
    }
    std::ostringstream os;
    const auto& last = br.points.back();
    os << "branch " << a.from[k] << " termination=" << to_string(br.reason) << " points=" << br.points.size() << " "
       << to_string(br.param) << "=" << last.param << " F(0)=" << fmt(last.F0) << " sigma=" << last.sigma.str()
       << " F0_grows_as_param_decreases=" << (monotone ? "yes" : "no");
    if (!br.diagnostic.empty()) os << " diagnostic=\"" << br.diagnostic << "\"";
    job.line = os.str();
    job.failed = br.reason == Termination::newton_failure || br.reason == Termination::step_underflow;
    return job;
}

int cmd_branch(const BranchArgs& a, const std::string& command, std::ostream& out, std::ostream& err) {
    if (!a.out.empty() && a.out.size() != a.from.size()) throw InvalidInput("give one --out per --from");
    if (!a.csv.empty() && a.csv.size() != a.from.size()) throw InvalidInput("give one --csv per --from");
    if (a.parallel < 1) throw InvalidInput("--parallel must be positive");
    continuation_param_from_string(a.param);

    std::vector<BranchJob> jobs(a.from.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next++) < jobs.size();) {
            try {
                jobs[k] = run_branch_job(a, k, command);
            } catch (const InvalidInput& e) {
                jobs[k] = {std::string("branch ") + a.from[k] + " error: " + e.what(), false, true};
            } catch (const ArchiveError& e) {
                jobs[k] = {std::string("branch ") + a.from[k] + " error: " + e.what(), false, true};
            } catch (const std::exception& e) {
                jobs[k] = {std::string("branch ") + a.from[k] + " error: " + e.what(), true, false};
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(a.parallel), jobs.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    int code = exit_ok;
    for (const auto& j : jobs) {
        (j.invalid ? err : out) << j.line << "\n";
        if (j.invalid) code = exit_invalid;
        else if (j.failed && code == exit_ok) code = exit_no_convergence;
    }
    return code;
}

int cmd_oscillate(const std::string& n_text, const std::string& out_path, const std::string& csv, std::ostream& out) {
    const double n = parse_n(n_text);
    OscComponent c;
    try {
        c = oscillatory_orbit(n);
    } catch (const std::runtime_error& e) {
        out << "oscillate status=failed n=" << n_text << " diagnostic=\"" << e.what() << "\"\n";
        return exit_no_convergence;
    }
    if (!out_path.empty()) {
        nlohmann::json j;
        j["version"] = kArchiveVersion;
        j["kind"] = "oscillatory";
        j["n"] = n_text;
        j["mu"] = c.mu;
        j["period"] = c.period;
        j["amplitude"] = c.amplitude;
        j["residual"] = c.residual;
        j["symmetry_defect"] = c.symmetry_defect;
        j["sign_changes"] = c.sign_changes;
        write_file(out_path, j.dump(1) + "\n");
    }
    emit(csv, out, [&](std::ostream& os) { write_oscillatory_csv(os, c); });
    out << "oscillate status=converged n=" << n_text << " mu=" << c.mu << " period=" << fmt(c.period)
        << " amplitude=" << fmt(c.amplitude) << " residual=" << c.residual << "\n";
    return exit_ok;
}

int cmd_spectral(int lmax, double Y, const std::string& out_path, const std::string& csv, double ymin, double ymax,
                 int count, std::ostream& out) {
    if (lmax < 0 || lmax > 12) throw InvalidInput("--lmax must lie in [0, 12]");
    if (count < 2 || !(ymax > ymin)) throw InvalidInput("invalid sampling range");
    const SpectralBasis b(std::max(lmax, 8));
    const auto G = biorthogonality(b, lmax, Y);
    const double gram_defect = (G - Eigen::MatrixXd::Identity(lmax + 1, lmax + 1)).cwiseAbs().maxCoeff();
    double adj_defect = 0;
    for (int l = 0; l <= std::max(lmax, 8); ++l) {
        const auto p = adjoint_poly(l);
        const auto q = apply_adjoint(p);
        for (std::size_t m = 0; m < p.size(); ++m) adj_defect = std::max(adj_defect, std::abs(q[m] + 0.25 * l * p[m]));
    }
    const double mass = kernel_mass(b, Y);
    if (!out_path.empty()) {
        nlohmann::json j;
        j["version"] = kArchiveVersion;
        j["kind"] = "spectral";
        j["l_max"] = lmax;
        j["Y"] = Y;
        j["mass"] = mass;
        j["gram_defect"] = gram_defect;
        j["adjoint_defect"] = adj_defect;
        nlohmann::json rows = nlohmann::json::array();
        for (int l = 0; l <= lmax; ++l) {
            std::vector<double> r(static_cast<std::size_t>(lmax) + 1);
            for (int k = 0; k <= lmax; ++k) r[static_cast<std::size_t>(k)] = G(l, k);
            rows.push_back(r);
        }
        j["gram"] = rows;
        write_file(out_path, j.dump(1) + "\n");
    }
    emit(csv, out, [&](std::ostream& os) {
        os << "y";
        for (int l = 0; l <= lmax; ++l) os << ",psi" << l;
        os << '\n';
        for (int i = 0; i < count; ++i) {
            const double y = ymin + (ymax - ymin) * i / (count - 1);
            const auto d = b.kernel_derivs(lmax, y);
            os << fmt(y);
            for (int l = 0; l <= lmax; ++l)
                os << ',' << fmt((l % 2 == 0 ? 1.0 : -1.0) / std::sqrt(std::tgamma(l + 1.0)) * d[static_cast<std::size_t>(l)]);
            os << '\n';
        }
    });
    out << "spectral l_max=" << lmax << " mass=" << fmt(mass) << " gram_defect=" << gram_defect
        << " adjoint_defect=" << adj_defect << "\n";
    return exit_ok;
}

int cmd_kernel(double ymin, double ymax, int count, int derivs, const std::string& csv, std::ostream& out) {
    if (count < 2 || !(ymax > ymin) || derivs < 0) throw InvalidInput("invalid kernel table request");
    const SpectralBasis b;
    emit(csv.empty() ? std::string("-") : csv, out, [&](std::ostream& os) {
        os << "y,F";
        for (int l = 1; l <= derivs; ++l) os << ",d" << (l == 1 ? "" : std::to_string(l)) << "F";
        os << '\n';
        for (int i = 0; i < count; ++i) {
            const double y = ymin + (ymax - ymin) * i / (count - 1);
            const auto d = b.kernel_derivs(derivs, y);
            os << fmt(y);
            for (double v : d) os << ',' << fmt(v);
            os << '\n';
        }
    });
    if (!csv.empty() && csv != "-") out << "kernel rows=" << count << " derivatives=" << derivs << "\n";
    return exit_ok;
}

int cmd_classify(const std::string& in, double threshold, const std::string& csv, const std::string& log_interface,
                 std::ostream& out) {
    const auto sol = load_any_profile(in);
    if (!sol.converged()) {
        out << "classify status=" << to_string(sol.status) << " (profile did not converge)\n";
        return exit_no_convergence;
    }
    const auto m = classify(sol, threshold);
    emit(csv, out, [&](std::ostream& os) { write_profile_csv(os, sol); });
    if (!log_interface.empty()) {
        const auto y0 = interface_of(sol);
        if (!y0) throw std::runtime_error("no interface estimate for --log-interface");
        emit(log_interface, out, [&](std::ostream& os) { write_log_interface_csv(os, sol, *y0); });
    }
    out << "classify sigma=" << m.str() << " n=" << sol.spec.params.n() << " p=" << sol.spec.params.p() << "\n";
    return exit_ok;
}

int cmd_periodic(double n, double F0, double F2, const std::string& out_path, const std::string& csv, std::ostream& out) {
    SpatialOrbit o;
    try {
        o = periodic_spatial(n, F0, F2);
    } catch (const std::runtime_error& e) {
        out << "periodic status=failed diagnostic=\"" << e.what() << "\"\n";
        return exit_no_convergence;
    }
    if (!out_path.empty()) {
        nlohmann::json j;
        j["version"] = kArchiveVersion;
        j["kind"] = "periodic";
        j["n"] = n;
        j["F0"] = F0;
        j["F2_origin"] = o.F2_origin;
        j["max"] = o.max_value;
        j["min"] = o.min_value;
        j["mean"] = o.mean_value;
        j["period"] = o.period;
        j["window"] = o.window;
        write_file(out_path, j.dump(1) + "\n");
    }
    emit(csv, out, [&](std::ostream& os) { write_trajectory_csv(os, o.trajectory); });
    out << "periodic n=" << n << " F''(0)=" << fmt(o.F2_origin) << " max=" << fmt(o.max_value)
        << " min=" << fmt(o.min_value) << " mean=" << fmt(o.mean_value) << " period=" << fmt(o.period) << "\n";
    return exit_ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Self-similar blow-up profiles of the thin-film reaction equation", "blowup"};
    app.require_subcommand(1);

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "Solve one profile");
    solve->add_option("--n", sa.n, "Nonlinearity exponent n")->required();
    solve->add_option("--p", sa.p, "Source exponent p")->required();
    solve->add_option("--symmetry", sa.symmetry, "even or odd")->check(CLI::IsMember({"even", "odd"}));
    solve->add_option("--form", sa.form, "auto, S, general, normalized, sign_limit or f_form");
    solve->add_option("--eps", sa.eps, "Regularization parameter");
    solve->add_option("--tol", sa.tol, "Collocation tolerance");
    solve->add_option("--R", sa.R, "Domain half-width");
    solve->add_option("--glue", sa.glue, "Glued seed, e.g. 1:-3,1:3");
    solve->add_option("--initial-nodes", sa.initial_nodes, "Nodes of the starting mesh");
    solve->add_option("--max-nodes", sa.max_nodes, "Mesh cap (default BLOWUP_MAX_NODES or 20000)");
    solve->add_option("--out", sa.out, "Profile archive (JSON)");
    solve->add_option("--csv", sa.csv, "Profile table, '-' for stdout");
    solve->add_option("--log-interface", sa.log_interface, "log10(y0-y), log10|F| table");

    BranchArgs ba;
    auto* branch = app.add_subcommand("branch", "Continue a profile in p or mu");
    branch->add_option("--from", ba.from, "Profile or branch archive(s)")->required();
    branch->add_option("--param", ba.param, "p or mu")->check(CLI::IsMember({"p", "mu"}));
    branch->add_option("--to", ba.to, "Target parameter value")->required();
    branch->add_option("--dp", ba.dp, "Initial increment");
    branch->add_option("--dp-min", ba.dp_min, "Smallest increment");
    branch->add_option("--dp-max", ba.dp_max, "Largest increment");
    branch->add_option("--tol", ba.tol, "Tolerance, 0 keeps the seed's");
    branch->add_option("--eps", ba.eps, "Regularization, 0 keeps the seed's");
    branch->add_option("--jump-threshold", ba.jump, "Relative distance flagged as a jump");
    branch->add_flag("--continue-on-jump", ba.continue_on_jump, "Keep going after a jump");
    branch->add_option("--out", ba.out, "Branch archive(s), one per --from");
    branch->add_option("--csv", ba.csv, "Branch table(s), one per --from");
    branch->add_option("--parallel", ba.parallel, "Branches run concurrently");
    branch->add_option("--max-nodes", ba.max_nodes, "Mesh cap");

    std::string osc_n = "1", osc_out, osc_csv;
    auto* osc = app.add_subcommand("oscillate", "Periodic oscillatory interface component");
    osc->add_option("--n", osc_n, "n (number or inf)");
    osc->add_option("--out", osc_out, "Summary (JSON)");
    osc->add_option("--csv", osc_csv, "One period s,phi,dphi,d2phi");

    int lmax = 6, count = 401, derivs = 0;
    double Y = 80, ymin = -10, ymax = 10;
    std::string sp_out, sp_csv;
    auto* spectral = app.add_subcommand("spectral", "Eigenfunctions and bi-orthonormality report");
    spectral->add_option("--lmax", lmax, "Largest index");
    spectral->add_option("--Y", Y, "Quadrature half-width");
    spectral->add_option("--out", sp_out, "Report (JSON)");
    spectral->add_option("--csv", sp_csv, "Eigenfunction table");
    spectral->add_option("--ymin", ymin);
    spectral->add_option("--ymax", ymax);
    spectral->add_option("--count", count);

    std::string k_csv;
    auto* kernel = app.add_subcommand("kernel", "Kernel table");
    kernel->add_option("--ymin", ymin);
    kernel->add_option("--ymax", ymax);
    kernel->add_option("--count", count);
    kernel->add_option("--derivs", derivs, "Number of derivatives");
    kernel->add_option("--csv", k_csv, "Output (default stdout)");

    std::string c_in, c_csv, c_log;
    double threshold = 1e-4;
    auto* cls = app.add_subcommand("classify", "Multiindex of a stored profile");
    cls->add_option("--in", c_in, "Profile or branch archive")->required();
    cls->add_option("--threshold", threshold, "Relative lobe size below which zeros are ignored");
    cls->add_option("--csv", c_csv, "Profile table");
    cls->add_option("--log-interface", c_log, "log10(y0-y), log10|F| table");

    double pn = 1, pF0 = 1.5, pF2 = -0.3787329255;
    std::string p_out, p_csv;
    auto* periodic = app.add_subcommand("periodic", "Spatially periodic orbit");
    periodic->add_option("--n", pn);
    periodic->add_option("--F0", pF0, "F(0)");
    periodic->add_option("--F2", pF2, "Starting guess for F''(0)");
    periodic->add_option("--out", p_out, "Summary (JSON)");
    periodic->add_option("--csv", p_csv, "Trajectory table");

    std::vector<std::string> argv_s{"blowup"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_s) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_invalid;
    }

    const std::string command = join(args);
    try {
        if (*solve) return cmd_solve(sa, command, out);
        if (*branch) return cmd_branch(ba, command, out, err);
        if (*osc) return cmd_oscillate(osc_n, osc_out, osc_csv, out);
        if (*spectral) return cmd_spectral(lmax, Y, sp_out, sp_csv, ymin, ymax, count, out);
        if (*kernel) return cmd_kernel(ymin, ymax, count, derivs, k_csv, out);
        if (*cls) return cmd_classify(c_in, threshold, c_csv, c_log, out);
        if (*periodic) return cmd_periodic(pn, pF0, pF2, p_out, p_csv, out);
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const ArchiveError& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_no_convergence;
    }
    return exit_invalid;
}

} // namespace blowup
