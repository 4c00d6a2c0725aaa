// cphsim: command-line front end over the cph library.
//
// Exit codes: 0 ok, 1 numerical or verification failure, 2 well-posedness,
// 3 not amenable (tree rejected, singular structure, not LTI), 64 usage or
// malformed input, 70 internal error.

#include "cph/dae.hpp"
#include "cph/error.hpp"
#include "cph/graph.hpp"
#include "cph/lti.hpp"
#include "cph/model.hpp"
#include "cph/netlist.hpp"
#include "cph/random_circuit.hpp"
#include "cph/sigma.hpp"
#include "cph/solver.hpp"
#include "cph/validation.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using cph::ErrorCode;
using nlohmann::json;

enum Exit { kOk = 0, kFailed = 1, kIllPosed = 2, kUnamenable = 3, kUsage = 64, kInternal = 70 };

struct ExitError {
    int code;
    std::string message;
};

int exit_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::SyntaxError:
        case ErrorCode::ForbiddenVariable:
        case ErrorCode::SelfLoop:
        case ErrorCode::DuplicateName:
        case ErrorCode::NonContiguousVertices:
        case ErrorCode::InvalidArgument:
        case ErrorCode::DimensionMismatch:
            return kUsage;
        case ErrorCode::DisconnectedGraph:
        case ErrorCode::VoltageCycle:
        case ErrorCode::CurrentCutset:
        case ErrorCode::GenerationFailed:
            return kIllPosed;
        case ErrorCode::NotATree:
        case ErrorCode::NotNormal:
        case ErrorCode::InvalidOffsets:
        case ErrorCode::StructurallyIllPosed:
        case ErrorCode::SingularSubJacobian:
        case ErrorCode::SingularSelection:
        case ErrorCode::NotLTI:
        case ErrorCode::IrregularPencil:
        case ErrorCode::DefectiveSpectrum:
            return kUnamenable;
        case ErrorCode::DomainError:
        case ErrorCode::Singular:
        case ErrorCode::NoConvergence:
        case ErrorCode::NewtonDiverged:
        case ErrorCode::StepFailure:
            return kFailed;
        case ErrorCode::NonUnimodular:
            return kInternal;
    }
    return kInternal;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

struct CommonOptions {
    std::string file;
    std::string tree;
    std::string builder = "kruskal";
    int model = 2;
    double t0 = 0.0;
    double guess = 1.0;
    bool json = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_point) {
    cmd->add_option("file", o.file, "netlist file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--tree", o.tree, "comma-separated twig names (default: built tree)");
    cmd->add_option("--builder", o.builder, "tree builder when --tree is absent")
        ->check(CLI::IsMember({"kruskal", "rref"}));
    cmd->add_flag("--json", o.json, "emit JSON");
    if (with_point) {
        cmd->add_option("--model", o.model, "DAE model")->check(CLI::IsMember({1, 2}));
        cmd->add_option("--t0", o.t0, "initial time");
        cmd->add_option("--guess", o.guess, "initial guess for every variable");
    }
}

struct Loaded {
    std::shared_ptr<const cph::CircuitModel> model;
    cph::WellPosedReport wp;
};

Loaded load(const std::string& file) {
    auto model = std::make_shared<const cph::CircuitModel>(cph::load_netlist(file));
    const cph::CircuitGraph& g = model->graph();
    return {model, cph::check_wellposed(cph::incidence(g), g.kinds())};
}

json wellposed_json(const cph::WellPosedReport& wp) {
    return {{"connected", wp.connected}, {"a1_ok", wp.a1_ok},       {"a2_ok", wp.a2_ok},
            {"rank_A", wp.rank_A},       {"rank_V", wp.rank_V},     {"rank_non_I", wp.rank_non_I},
            {"ok", wp.ok()}};
}

cph::NormalTree pick_tree(const cph::CircuitGraph& g, const CommonOptions& o) {
    if (o.tree.empty()) return o.builder == "rref" ? cph::normal_tree_rref(g) : cph::normal_tree_kruskal(g);
    std::vector<std::size_t> edges;
    for (const std::string& n : split_names(o.tree)) edges.push_back(g.find(n));
    return cph::validate_tree(g, edges);
}

json names_of(const cph::CircuitGraph& g, const std::vector<std::size_t>& edges) {
    json out = json::array();
    for (std::size_t e : edges) out.push_back(g.name(e));
    return out;
}

json tree_json(const cph::CircuitGraph& g, const cph::NormalTree& t) {
    json F = json::array();
    for (Eigen::Index r = 0; r < t.F.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < t.F.cols(); ++c) row.push_back(t.F(r, c));
        F.push_back(row);
    }
    const cph::ClassCounts& k = t.counts;
    return {{"tree", names_of(g, t.tree)},
            {"cotree", names_of(g, t.cotree)},
            {"normal", t.normal},
            {"F", F},
            {"counts",
             {{"twigs", {{"v", k.v}, {"c", k.c}, {"d", k.d}, {"l", k.l}}},
              {"links", {{"C", k.C}, {"D", k.D}, {"L", k.L}, {"I", k.I}}}}},
            {"ranks", {{"r_V", t.ranks.r_V}, {"r_VC", t.ranks.r_VC}, {"r_VCD", t.ranks.r_VCD}, {"r_VCDL", t.ranks.r_VCDL}}}};
}

json offsets_json(const cph::Offsets& o) { return {{"c", o.c}, {"d", o.d}}; }

cph::CpHSystem build(std::shared_ptr<const cph::CircuitModel> m, const cph::NormalTree& t, int model) {
    return model == 1 ? cph::build_model1(m, t) : cph::build_model2(m, t);
}

// Well-posedness gate shared by every system-level command.
void require_wellposed(const Loaded& l, bool as_json) {
    if (l.wp.ok()) return;
    if (as_json) emit({{"wellposed", wellposed_json(l.wp)}});
    try {
        l.wp.require();
    } catch (const cph::Error& e) {
        throw ExitError{kIllPosed, e.what()};
    }
}

cph::ConsistentPoint point_of(const cph::CpHSystem& sys, const CommonOptions& o) {
    return cph::consistent_point(sys, o.t0, cph::Vector::Constant(static_cast<Eigen::Index>(sys.size()), o.guess));
}

int cmd_analyze(const CommonOptions& o) {
    const Loaded l = load(o.file);
    json rep{{"wellposed", wellposed_json(l.wp)}};
    if (!l.wp.ok()) {
        if (o.json) emit(rep);
        l.wp.require();
    }
    const cph::CircuitGraph& g = l.model->graph();
    const cph::NormalTree t = pick_tree(g, o);
    rep.update(tree_json(g, t));
    const cph::CpHSystem sys = build(l.model, t, o.model);
    rep["model"] = o.model;
    rep["variables"] = sys.layout().names;
    json rows = json::array();
    for (const cph::RowInfo& r : sys.rows()) rows.push_back(r.name);
    rep["rows"] = rows;

    const cph::ConsistentPoint cp = point_of(sys, o);
    const cph::SigmaAnalysis a = cph::analyze(sys, cp.t0, cp.x0, cp.xd0);
    json sigma = json::array();
    for (std::size_t i = 0; i < a.sigma.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < a.sigma.size(); ++j)
            row.push_back(a.sigma.finite(i, j) ? json(a.sigma(i, j)) : json(nullptr));
        sigma.push_back(row);
    }
    rep["sigma"] = sigma;
    rep["offsets"] = {{"canonical", offsets_json(a.canonical)},
                      {"provisional", a.provisional ? offsets_json(*a.provisional) : json(nullptr)},
                      {"used", a.offsets.flavor == cph::OffsetFlavor::Provisional ? "provisional" : "canonical"}};
    rep["dof"] = a.dof;
    rep["structural_index"] = a.structural_index;
    rep["canonical_index"] = a.canonical_index;
    rep["amenable"] = a.amenable;
    rep["sv_ratio"] = a.sv_ratio;
    rep["J_condition"] = a.sv_ratio > 0.0 ? json(1.0 / a.sv_ratio) : json(nullptr);
    rep["consistent_point"] = {{"t0", cp.t0}, {"x0", std::vector<double>(cp.x0.data(), cp.x0.data() + cp.x0.size())}};

    if (o.json) {
        emit(rep);
    } else {
        std::cout << "well-posed: yes\n"
                  << "tree: " << rep["tree"].dump() << "\ncotree: " << rep["cotree"].dump() << "\n"
                  << "variables: " << rep["variables"].dump() << "\n"
                  << "dof: " << a.dof << "\nstructural index: " << a.structural_index
                  << "\namenable: " << (a.amenable ? "yes" : "no") << "\nsv ratio: " << a.sv_ratio << "\n";
    }
    if (!a.amenable) throw ExitError{kUnamenable, "system Jacobian is singular at the consistent point"};
    return kOk;
}

int cmd_tree(const CommonOptions& o) {
    const Loaded l = load(o.file);
    require_wellposed(l, o.json);
    const cph::CircuitGraph& g = l.model->graph();
    const cph::NormalTree t = pick_tree(g, o);
    const json j = tree_json(g, t);
    if (o.json) {
        emit(j);
        return kOk;
    }
    std::cout << "tree: " << j["tree"].dump() << "\ncotree: " << j["cotree"].dump() << "\nF (rows cotree, cols tree):\n";
    for (const auto& row : j["F"]) std::cout << "  " << row.dump() << "\n";
    std::cout << "ranks: " << j["ranks"].dump() << "\ncounts: " << j["counts"].dump() << "\n";
    return kOk;
}

struct SimOptions {
    CommonOptions common;
    std::optional<double> t1, h, rtol, atol;
    int order = 2;
    std::string out;
};

int cmd_simulate(const SimOptions& s) {
    const CommonOptions& o = s.common;
    if (!s.t1 || !(*s.t1 > o.t0)) throw ExitError{kUsage, "--t1 must exceed --t0"};
    if (s.h && !(*s.h > 0.0)) throw ExitError{kUsage, "--h must be positive"};
    const Loaded l = load(o.file);
    require_wellposed(l, false);
    const cph::NormalTree t = pick_tree(l.model->graph(), o);
    const cph::CpHSystem sys = build(l.model, t, o.model);
    const cph::ConsistentPoint cp = point_of(sys, o);
    const cph::SigmaAnalysis a = cph::analyze(sys, cp.t0, cp.x0, cp.xd0);
    if (!a.amenable) throw ExitError{kUnamenable, "system Jacobian is singular at the consistent point"};

    cph::IntegratorConfig cfg;
    cfg.t1 = *s.t1;
    cfg.order = s.order;
    cfg.h = s.h.value_or((*s.t1 - o.t0) / 1000.0);
    if (s.rtol || s.atol) {
        cfg.mode = cph::StepMode::Adaptive;
        cfg.rtol = s.rtol.value_or(cfg.rtol);
        cfg.atol = s.atol.value_or(cfg.atol);
    }
    const cph::Trajectory tr = cph::integrate(sys, cp, cfg);

    std::ofstream file;
    if (!s.out.empty()) {
        file.open(s.out);
        if (!file) throw ExitError{kUsage, "cannot write " + s.out};
    }
    std::ostream& csv = s.out.empty() ? std::cout : file;
    std::ostream& summary = s.out.empty() ? std::cerr : std::cout;
    csv << "t";
    for (const auto& n : sys.layout().names) csv << "," << n;
    for (const auto& n : sys.layout().names) csv << ",d_" << n;
    for (const auto& n : sys.output_names()) csv << "," << n;
    csv << ",H,balance\n";
    for (const cph::Sample& p : tr.samples) {
        csv << fmt17(p.t);
        for (const cph::Vector* v : {&p.x, &p.xd, &p.y})
            for (Eigen::Index k = 0; k < v->size(); ++k) csv << "," << fmt17((*v)(k));
        csv << "," << fmt17(p.H) << "," << fmt17(p.balance) << "\n";
    }
    const cph::Sample& last = tr.samples.back();
    summary << "steps " << tr.accepted << " rejected " << tr.rejected << " newton " << tr.newton_iterations
            << " final_t " << fmt17(last.t) << " final_H " << fmt17(last.H) << "\n";
    return kOk;
}

int cmd_eig(const CommonOptions& o) {
    const Loaded l = load(o.file);
    require_wellposed(l, false);
    const cph::NormalTree t = pick_tree(l.model->graph(), o);
    const cph::CpHSystem sys = cph::build_model2(l.model, t);
    const cph::LtiSystem lti = cph::assemble_lti(sys);
    const cph::ConsistentPoint cp = point_of(sys, o);
    const cph::SigmaAnalysis a = cph::analyze(sys, cp.t0, cp.x0, cp.xd0);
    const cph::EigResult e = cph::finite_eigenvalues(lti, a.dof);
    json vals = json::array();
    for (const auto& v : e.values) vals.push_back({{"re", v.real()}, {"im", v.imag()}});
    if (o.json) {
        emit({{"dof", a.dof}, {"eigenvalues", vals}, {"degree", e.degree}});
        return kOk;
    }
    std::cout << "dof " << a.dof << " degree " << e.degree << "\n";
    for (const auto& v : e.values) std::cout << fmt17(v.real()) << " " << (v.imag() < 0 ? "-" : "+") << " "
                                             << fmt17(std::abs(v.imag())) << "i\n";
    return kOk;
}

int cmd_reduce(const CommonOptions& o) {
    const Loaded l = load(o.file);
    require_wellposed(l, false);
    const cph::NormalTree t = pick_tree(l.model->graph(), o);
    const cph::CpHSystem sys = cph::build_model2(l.model, t);
    const cph::ConsistentPoint cp = point_of(sys, o);
    const cph::ReducedOde ode(sys, cp.t0, cp.x0);
    const auto names = [&](const std::vector<std::size_t>& ids) {
        std::vector<std::string> out;
        for (std::size_t k : ids) out.push_back(sys.layout().names[k]);
        return out;
    };
    const json j{{"dae_size", sys.size()},
                 {"dimension", ode.size()},
                 {"ode_variables", names(ode.state_vars())},
                 {"q_hat", names(ode.q_hat())},
                 {"phi_hat", names(ode.phi_hat())}};
    if (o.json) {
        emit(j);
        return kOk;
    }
    std::cout << "DAE size " << sys.size() << ", ODE dimension " << ode.size() << "\n"
              << "ODE variables: " << j["ode_variables"].dump() << "\n"
              << "solved charges: " << j["q_hat"].dump() << "\nsolved fluxes: " << j["phi_hat"].dump() << "\n";
    return kOk;
}

struct RandomOptions {
    cph::RandomCircuitOptions opts;
    std::string kinds;
    std::string out;
};

int cmd_random(RandomOptions r) {
    if (r.opts.edges + 1 < r.opts.nodes) throw ExitError{kUsage, "--edges must be at least --nodes - 1"};
    if (!r.kinds.empty()) r.opts.kinds = cph::KindMix::parse(r.kinds);
    const std::string text = cph::to_netlist_text(cph::random_circuit(r.opts));
    if (r.out.empty()) {
        std::cout << text;
        return kOk;
    }
    std::ofstream f(r.out);
    if (!f) throw ExitError{kUsage, "cannot write " + r.out};
    f << text;
    return kOk;
}

json report_json(const cph::OracleReport& r) {
    return {{"check", r.check},       {"invariant", r.invariant}, {"pass", r.pass},    {"measured", r.measured},
            {"tolerance", r.tolerance}, {"checked", r.checked},   {"detail", r.detail}};
}

struct VerifyOptions {
    std::string file;
    std::size_t count = 200;
    std::uint64_t seed = 1;
    bool json = false;
};

int cmd_verify(const VerifyOptions& v) {
    std::vector<cph::OracleReport> reps;
    std::size_t circuits = 0;
    if (!v.file.empty()) {
        const Loaded l = load(v.file);
        require_wellposed(l, false);
        for (const cph::NormalTree& t : {cph::normal_tree_kruskal(l.model->graph()), cph::normal_tree_rref(l.model->graph())}) {
            reps.push_back(cph::oracle_cycle_cutset(l.model->graph(), t));
            reps.push_back(cph::oracle_model_equivalence(l.model, t, v.seed));
            reps.push_back(cph::oracle_index(cph::build_model2(l.model, t)));
        }
        circuits = 1;
    } else {
        cph::CorpusOptions c;
        c.count = v.count;
        c.seed = v.seed;
        const cph::CorpusSummary s = cph::run_corpus(c);
        reps = s.failures;
        circuits = s.circuits;
        if (!v.json)
            std::cout << s.circuits << " circuits, " << s.reports << " reports, " << s.failures.size() << " failures\n";
    }
    bool ok = true;
    for (const auto& r : reps) ok = ok && r.pass;
    if (v.json) {
        json arr = json::array();
        for (const auto& r : reps) arr.push_back(report_json(r));
        emit({{"circuits", circuits}, {"reports", arr}, {"pass", ok}});
    } else {
        for (const auto& r : reps)
            std::cout << (r.pass ? "PASS " : "FAIL ") << r.check << " [" << r.invariant << "] measured " << r.measured
                      << " tol " << r.tolerance << ": " << r.detail << "\n";
    }
    return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Circuit DAE analysis and simulation"};
    app.require_subcommand(1);
    // --h is the step size, so help is long-form only
    app.set_help_flag("--help", "print this help and exit");

    CommonOptions analyze_o, tree_o, eig_o, reduce_o;
    auto* analyze = app.add_subcommand("analyze", "well-posedness, tree, signature matrix and index");
    add_common(analyze, analyze_o, true);
    auto* tree = app.add_subcommand("tree", "normal tree, cotree and Kron matrix");
    add_common(tree, tree_o, false);
    auto* eig = app.add_subcommand("eig", "finite eigenvalues of a linear time-invariant circuit");
    add_common(eig, eig_o, true);
    auto* reduce = app.add_subcommand("reduce", "state variables of the reduced ODE");
    add_common(reduce, reduce_o, true);

    SimOptions sim_o;
    auto* simulate = app.add_subcommand("simulate", "integrate with BDF and write a CSV trajectory");
    add_common(simulate, sim_o.common, true);
    simulate->add_option("--t1", sim_o.t1, "final time")->required();
    simulate->add_option("--h", sim_o.h, "fixed step, or initial step when adaptive (default (t1 - t0) / 1000)");
    simulate->add_option("--rtol", sim_o.rtol, "relative tolerance; selects adaptive stepping");
    simulate->add_option("--atol", sim_o.atol, "absolute tolerance; selects adaptive stepping");
    simulate->add_option("--order", sim_o.order, "BDF order")->check(CLI::IsMember({1, 2}));
    simulate->add_option("--out", sim_o.out, "CSV file (default stdout; summary then goes to stderr)");

    RandomOptions rnd_o;
    auto* random = app.add_subcommand("random", "seeded random well-posed netlist");
    random->add_option("--nodes", rnd_o.opts.nodes, "vertex count")->required();
    random->add_option("--edges", rnd_o.opts.edges, "edge count")->required();
    random->add_option("--kinds", rnd_o.kinds, "kind mix, e.g. V:1,C:3,L:3,R:2,G:2,I:1");
    random->add_option("--seed", rnd_o.opts.seed, "generator seed");
    random->add_option("--vmin", rnd_o.opts.value_min, "smallest parameter value");
    random->add_option("--vmax", rnd_o.opts.value_max, "largest parameter value");
    random->add_option("--out", rnd_o.out, "netlist file (default stdout)");

    VerifyOptions ver_o;
    auto* verify = app.add_subcommand("verify", "run the brute-force oracles on a file or a random corpus");
    verify->add_option("file", ver_o.file, "netlist file (default: random corpus)")->check(CLI::ExistingFile);
    verify->add_option("--count", ver_o.count, "corpus size");
    verify->add_option("--seed", ver_o.seed, "corpus seed");
    verify->add_flag("--json", ver_o.json, "emit JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*analyze) return cmd_analyze(analyze_o);
        if (*tree) return cmd_tree(tree_o);
        if (*simulate) return cmd_simulate(sim_o);
        if (*eig) return cmd_eig(eig_o);
        if (*reduce) return cmd_reduce(reduce_o);
        if (*random) return cmd_random(rnd_o);
        if (*verify) return cmd_verify(ver_o);
    } catch (const ExitError& e) {
        std::cerr << "cphsim: " << e.message << "\n";
        return e.code;
    } catch (const cph::Error& e) {
        std::cerr << "cphsim: " << e.what() << "\n";
        return exit_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "cphsim: internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
