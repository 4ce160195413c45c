// sisvax: command-line front end for the heterogeneous SIS vaccination
// toolkit. JSON in, JSON/CSV out; everything on stderr is diagnostics.
//
// Exit codes: 0 success / check passed, 1 semantic check failed,
// 2 invalid input, 3 solver failure, 4 budget exceeded.
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "sis/coupling.hpp"
#include "sis/dynamics.hpp"
#include "sis/model.hpp"
#include "sis/pareto.hpp"
#include "sis/reduction.hpp"
#include "sis/spectral.hpp"
#include "sis/types.hpp"

namespace {

using namespace sis;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitSolverFailure = 3;
constexpr int kExitBudgetExceeded = 4;

struct Options {
    std::string model_path, model2_path, eta_path, coupling_path, f_path;
    std::string out_path, out_coupling_path;
    std::string loss = "re";
    std::string kind = "pareto";
    std::string side = "left";
    std::size_t grid_m = 10;
    unsigned workers = 1;
    bool prescale = false;
    bool polish = false;
    double tol_spectral = 1e-10;
    double tol_equilibrium = 1e-10;
    double tol_conjugacy = 1e-10;
    double tol_reduce = 1e-9;
};

std::string json_vec(const Vec& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    return out + "]";
}

Model load_model_verbose(const std::string& path) {
    Model m = load_model(path);
    for (const auto& w : m.warnings()) std::cerr << "warning: " << path << ": " << w << "\n";
    return m;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
}

int cmd_r0(const Options& opt) {
    Model m = load_model_verbose(opt.model_path);
    SpectralResult res = spectral_radius(next_gen_matrix(m, Strategy::ones(m.size())),
                                         opt.tol_spectral);
    std::cout << "{\"r0\": " << format_double(res.rho) << ", \"right_eigvec\": "
              << json_vec(res.right) << ", \"left_eigvec\": " << json_vec(res.left) << "}\n";
    return kExitOk;
}

int cmd_re(const Options& opt) {
    Model m = load_model_verbose(opt.model_path);
    Strategy eta = load_strategy(opt.eta_path, m.size());
    SpectralResult res = spectral_radius(next_gen_matrix(m, eta), opt.tol_spectral);
    std::cout << "{\"re\": " << format_double(res.rho) << ", \"right_eigvec\": "
              << json_vec(res.right) << ", \"left_eigvec\": " << json_vec(res.left) << "}\n";
    return kExitOk;
}

int cmd_equilibrium(const Options& opt) {
    Model m = load_model_verbose(opt.model_path);
    Strategy eta = load_strategy(opt.eta_path, m.size());
    Equilibrium eq = maximal_equilibrium(m, eta, opt.tol_equilibrium);
    if (!eq.warning.empty()) std::cerr << "warning: " << eq.warning << "\n";
    double infected = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) infected += eq.g[i] * eta[i] * m.weights()[i];
    std::cout << "{\"g\": " << json_vec(eq.g) << ", \"residual\": " << format_double(eq.residual)
              << ", \"infected_fraction\": " << format_double(infected) << "}\n";
    return kExitOk;
}

int cmd_frontier(const Options& opt) {
    Model m = load_model_verbose(opt.model_path);
    LossKind loss = opt.loss == "i" ? LossKind::InfectedFraction : LossKind::Re;
    FrontierKind kind = opt.kind == "anti" ? FrontierKind::AntiPareto : FrontierKind::Pareto;
    Tolerances tol{opt.tol_spectral, opt.tol_equilibrium};
    auto outcomes = enumerate_outcomes(m, loss, opt.grid_m, tol, opt.workers);
    Frontier f = frontier(outcomes, kind);
    f.grid_resolution = opt.grid_m;
    if (opt.polish) {
        f = polish_frontier(m, f, tol);
        std::cerr << "note: frontier polished with coordinate steps of 1/m^2\n";
    }
    emit(frontier_to_csv(f), opt.out_path);
    return kExitOk;
}

int cmd_reduce(const Options& opt) {
    Model m = load_model_verbose(opt.model_path);
    FeaturePartition p = coarsest_reduction(m, opt.tol_reduce);
    for (const NearMerge& nm : find_near_merges(m, p, opt.tol_reduce))
        std::cerr << "near-mergeable: blocks " << nm.block_a << " and " << nm.block_b << " ("
                  << nm.quantity << " deviates by " << format_double(nm.deviation) << ")\n";
    auto [reduced, coupling] = reduce(m, p, opt.tol_reduce);
    if (!opt.out_path.empty()) write_file(opt.out_path, model_to_json(reduced));
    if (!opt.out_coupling_path.empty()) {
        std::vector<std::size_t> phi = p.block_of();
        write_file(opt.out_coupling_path, coupling_phi_to_json(phi));
    }
    std::cout << partition_to_json(p);
    return kExitOk;
}

Coupling load_coupling_file(const std::string& path, const Model& m1, const Model& m2) {
    std::string text = read_file(path);
    if (text.find("\"phi\"") != std::string::npos)
        return deterministic_coupling(m1, m2, coupling_phi_from_json(text));
    return build_coupling(m1, m2, coupling_pi_from_json(text));
}

std::string check_json(const char* name, const ConjugacyCheck& c, bool kernel_indices) {
    std::string out = std::string("\"") + name + "\": {\"conjugate\": " +
                      (c.ok ? "true" : "false") +
                      ", \"max_violation\": " + format_double(c.max_violation);
    if (!c.ok) {
        if (kernel_indices)
            out += ", \"at\": {\"left\": [" + std::to_string(c.i) + ", " + std::to_string(c.j) +
                   "], \"right\": [" + std::to_string(c.i2) + ", " + std::to_string(c.j2) + "]}";
        else
            out += ", \"at\": {\"left\": " + std::to_string(c.i) +
                   ", \"right\": " + std::to_string(c.i2) + "}";
    }
    return out + "}";
}

int cmd_couple_check(const Options& opt) {
    Model m1 = load_model_verbose(opt.model_path);
    Model m2 = load_model_verbose(opt.model2_path);
    Coupling c = load_coupling_file(opt.coupling_path, m1, m2);
    ConjugacyReport rep = check_model_conjugacy(c, m1, m2, opt.tol_conjugacy);
    std::cout << "{" << check_json("gamma", rep.gamma, false) << ", "
              << check_json("cost", rep.cost, false) << ", "
              << check_json("kernel", rep.kernel, true) << ", "
              << check_json("ngo_kernel", rep.ngo_kernel, true)
              << ", \"all_conjugate\": " << (rep.all_ok() ? "true" : "false") << "}\n";
    return rep.all_ok() ? kExitOk : kExitCheckFailed;
}

int cmd_conjugate(const Options& opt) {
    Coupling c = coupling_from_pi(coupling_pi_from_json(read_file(opt.coupling_path)));
    Vec f = load_vector(opt.f_path, "f");
    Side side = opt.side == "right" ? Side::Right : Side::Left;
    Vec out = conjugate(c, f, side);
    std::cout << "{\"conjugate\": " << json_vec(out) << "}\n";
    return kExitOk;
}

int cmd_normalize(const Options& opt) {
    Model m = load_model_verbose(opt.model_path);
    if (opt.prescale) {
        double cmu = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i)
            cmu += m.cost_density()[i] * m.weights()[i];
        if (cmu <= 0.0) throw InputError("cost density integrates to zero; cannot pre-scale");
        ModelData d;
        d.weights = m.weights();
        d.gamma = m.gamma();
        d.kernel = m.kernel();
        d.labels = m.labels();
        d.cost_density.resize(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) d.cost_density[i] = m.cost_density()[i] / cmu;
        m = Model::create(std::move(d));
    }
    emit(model_to_json(normalize(m)), opt.out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sisvax: heterogeneous SIS models, vaccination frontiers and model coupling"};
    app.require_subcommand(1);
    Options opt;

    auto add_tols = [&](CLI::App* cmd) {
        cmd->add_option("--tol-spectral", opt.tol_spectral, "spectral radius tolerance");
        cmd->add_option("--tol-equilibrium", opt.tol_equilibrium, "equilibrium tolerance");
        cmd->add_option("--tol-conjugacy", opt.tol_conjugacy, "conjugacy check tolerance");
        cmd->add_option("--tol-reduce", opt.tol_reduce, "reduction block-constancy tolerance");
    };

    CLI::App* r0 = app.add_subcommand("r0", "Reproduction number and Perron eigenvectors");
    r0->add_option("model", opt.model_path, "model JSON file")->required();
    add_tols(r0);

    CLI::App* re = app.add_subcommand("re", "Effective reproduction number under a strategy");
    re->add_option("model", opt.model_path, "model JSON file")->required();
    re->add_option("eta", opt.eta_path, "strategy JSON file")->required();
    add_tols(re);

    CLI::App* eq = app.add_subcommand("equilibrium", "Maximal equilibrium and infected fraction");
    eq->add_option("model", opt.model_path, "model JSON file")->required();
    eq->add_option("eta", opt.eta_path, "strategy JSON file")->required();
    add_tols(eq);

    CLI::App* fr = app.add_subcommand("frontier", "Grid (anti-)Pareto frontier as CSV");
    fr->add_option("model", opt.model_path, "model JSON file")->required();
    fr->add_option("-m,--grid", opt.grid_m, "per-feature grid resolution")
        ->check(CLI::Range(1, 1000000));
    fr->add_option("--loss", opt.loss, "loss kind: re | i")->check(CLI::IsMember({"re", "i"}));
    fr->add_option("--kind", opt.kind, "frontier kind: pareto | anti")
        ->check(CLI::IsMember({"pareto", "anti"}));
    fr->add_option("-o,--out", opt.out_path, "output CSV path (stdout if omitted)");
    fr->add_option("--workers", opt.workers, "parallel workers over grid points")
        ->check(CLI::Range(1, 256));
    fr->add_flag("--polish", opt.polish, "local refinement pass between grid points (plots only)");
    add_tols(fr);

    CLI::App* rd = app.add_subcommand("reduce", "Merge behaviorally identical features");
    rd->add_option("model", opt.model_path, "model JSON file")->required();
    rd->add_option("-o,--out-model", opt.out_path, "reduced model JSON path");
    rd->add_option("-c,--out-coupling", opt.out_coupling_path, "quotient coupling JSON path");
    add_tols(rd);

    CLI::App* cc = app.add_subcommand("couple-check", "Check conjugacy of two coupled models");
    cc->add_option("model1", opt.model_path, "left model JSON file")->required();
    cc->add_option("model2", opt.model2_path, "right model JSON file")->required();
    cc->add_option("coupling", opt.coupling_path, "coupling JSON file (pi or phi)")->required();
    add_tols(cc);

    CLI::App* cj = app.add_subcommand("conjugate", "Conditional expectation across a coupling");
    cj->add_option("coupling", opt.coupling_path, "coupling JSON file (pi)")->required();
    cj->add_option("f", opt.f_path, "function JSON file {\"f\": [..]}")->required();
    cj->add_option("--side", opt.side, "side the function lives on: left | right")
        ->check(CLI::IsMember({"left", "right"}));
    add_tols(cj);

    CLI::App* nm = app.add_subcommand("normalize", "Fold cost and recovery into measure and kernel");
    nm->add_option("model", opt.model_path, "model JSON file")->required();
    nm->add_option("-o,--out", opt.out_path, "output model JSON path (stdout if omitted)");
    nm->add_flag("--prescale", opt.prescale, "rescale the cost density to integrate to 1 first");
    add_tols(nm);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalidInput;
    }

    try {
        if (r0->parsed()) return cmd_r0(opt);
        if (re->parsed()) return cmd_re(opt);
        if (eq->parsed()) return cmd_equilibrium(opt);
        if (fr->parsed()) return cmd_frontier(opt);
        if (rd->parsed()) return cmd_reduce(opt);
        if (cc->parsed()) return cmd_couple_check(opt);
        if (cj->parsed()) return cmd_conjugate(opt);
        if (nm->parsed()) return cmd_normalize(opt);
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudgetExceeded;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    return kExitInvalidInput;
}
