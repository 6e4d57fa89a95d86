#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "conj1d/bifurcation.hpp"
#include "conj1d/conjugacy.hpp"
#include "conj1d/error.hpp"
#include "conj1d/fixed_points.hpp"
#include "conj1d/svg.hpp"
#include "conj1d/verify.hpp"

namespace {

using namespace conj1d;

// exit codes: 0 success, 1 input error, 2 structural mismatch / unclassified,
// 3 verification failure
constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitStructure = 2;
constexpr int kExitVerify = 3;

int exit_code_for(const error& e) {
    switch (e.kind()) {
        case errc::parse:
        case errc::domain: return kExitInput;
        case errc::structure: return kExitStructure;
        case errc::verification: return kExitVerify;
        case errc::internal: return kExitInput;
    }
    return kExitInput;
}

Interval parse_interval(const std::string& text, const std::string& flag) {
    auto comma = text.find(',');
    if (comma == std::string::npos)
        throw error(errc::domain, flag + " expects \"lo,hi\", got \"" + text + "\"");
    try {
        double lo = std::stod(text.substr(0, comma));
        double hi = std::stod(text.substr(comma + 1));
        return Interval(lo, hi);
    } catch (const std::exception&) {
        throw error(errc::domain, flag + " expects \"lo,hi\", got \"" + text + "\"");
    }
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw error(errc::domain, "cannot open output file " + path);
    out << content;
}

void emit_svg(const ConjugacyMap& c, const std::string& path, int samples) {
    std::vector<std::pair<double, double>> curve;
    std::vector<double> xs = linspace(c.domain_f(), samples);
    curve.reserve(xs.size());
    for (double x : xs) curve.emplace_back(x, c.h(x));
    std::vector<std::pair<double, double>> markers;
    for (const auto& p : c.pins()) markers.emplace_back(p.x_f, p.x_g);
    write_output(path, svg_plot(curve, markers));
}

struct FixedPointsArgs {
    std::string map, domain, out;
    int grid_n = 4096;
    double root_tol = 1e-12;
    double touch_tol = 1e-7;
};

int run_fixed_points(const FixedPointsArgs& a) {
    MapExpr expr = MapExpr::parse(a.map);
    MonotoneMap m(std::move(expr), parse_interval(a.domain, "--domain"));
    DetectOptions opt{a.grid_n, a.root_tol, a.touch_tol};
    std::vector<FixedPoint> fps = find_fixed_points(m, opt);
    std::vector<PeriodTwoOrbit> orbits;
    if (m.orientation() == Orientation::Decreasing) orbits = find_period2(m, opt);
    write_output(a.out, fixed_point_report(m, fps, orbits).dump(2) + "\n");
    return kExitOk;
}

struct PairArgs {
    std::string f, g, domain_f, domain_g;
    bool flip = false;
    std::optional<double> anchor_a, anchor_b;
    int samples = 1001;
    std::string out, meta, svg;
};

ConjugacyMap build_pair(const PairArgs& a) {
    MonotoneMap f(MapExpr::parse(a.f), parse_interval(a.domain_f, "--domain-f"));
    MonotoneMap g(MapExpr::parse(a.g), parse_interval(a.domain_g, "--domain-g"));
    if (a.flip) return build_flip(f, g);
    std::optional<Anchor> anchor;
    if (a.anchor_a && a.anchor_b)
        anchor = Anchor{*a.anchor_a, *a.anchor_b};
    else if (a.anchor_a || a.anchor_b)
        throw error(errc::domain, "--anchor-a and --anchor-b must be given together");
    return build_full(f, g, SeedKind::Affine, anchor);
}

int run_conjugacy_build(const PairArgs& a) {
    ConjugacyMap c = build_pair(a);
    write_output(a.out, sampled_h_csv(c, a.samples));
    if (!a.meta.empty()) write_output(a.meta, build_metadata(c).dump(2) + "\n");
    if (!a.svg.empty()) emit_svg(c, a.svg, a.samples);
    return kExitOk;
}

struct VerifyArgs {
    PairArgs pair;
    int samples = 10000;
    double exclusion = kDefaultExclusion;
    double tol = 1e-9;
};

int run_conjugacy_verify(const VerifyArgs& a) {
    ConjugacyMap c = build_pair(a.pair);
    ResidualReport rep = residual_report(c, a.samples, a.exclusion);
    MonotonicityResult mono = monotonicity_check(c, std::min(a.samples, 4096));
    nlohmann::json j = to_json(rep, a.tol);
    j["monotone"] = mono.pass;
    j["pass"] = j["pass"].get<bool>() && mono.pass;
    std::cout << j.dump(2) << "\n";
    return j["pass"].get<bool>() ? kExitOk : kExitVerify;
}

struct ClassifyArgs {
    std::string family, x_window = "-0.75,0.75", mu_window = "-0.1,0.1", out;
    int n_mu = 9;
};

int run_classify(const ClassifyArgs& a) {
    Family fam{MapExpr::parse(a.family), parse_interval(a.x_window, "--x-window"),
               parse_interval(a.mu_window, "--mu-window")};
    BifurcationReport rep = classify_family(fam, a.n_mu);
    write_output(a.out, to_json(rep).dump(2) + "\n");
    if (rep.type == BifurcationType::Unclassified) {
        std::cerr << "unclassified: " << rep.detail << "\n";
        return kExitStructure;
    }
    return kExitOk;
}

struct FiberArgs {
    ClassifyArgs classify;
    double mu = 0.0;
    std::string normal_form_name;
    int samples = 1001;
    std::string out, meta, svg;
    int verify_samples = 2000;
    double exclusion = 1e-3;
    double tol = 1e-7;
};

int run_conjugate(const FiberArgs& a) {
    Family fam{MapExpr::parse(a.classify.family),
               parse_interval(a.classify.x_window, "--x-window"),
               parse_interval(a.classify.mu_window, "--mu-window")};

    BifurcationReport rep;
    if (a.normal_form_name.empty()) {
        rep = classify_family(fam, a.classify.n_mu);
        if (rep.type == BifurcationType::Unclassified) {
            std::cerr << "unclassified: " << rep.detail << "\n";
            return kExitStructure;
        }
    } else {
        auto t = bifurcation_type_from_string(a.normal_form_name);
        if (!t)
            throw error(errc::domain, "unknown normal form \"" + a.normal_form_name +
                                          "\" (fold|transcritical|pitchfork|flip)");
        rep.type = *t;
        rep.sigma = +1;
    }

    ConjugacyMap c = conjugate_to_normal_form(fam, a.mu, rep);
    write_output(a.out, sampled_h_csv(c, a.samples));
    if (!a.meta.empty()) write_output(a.meta, build_metadata(c).dump(2) + "\n");
    if (!a.svg.empty()) emit_svg(c, a.svg, a.samples);

    ResidualReport res = residual_report(c, a.verify_samples, a.exclusion);
    nlohmann::json footer = to_json(res, a.tol);
    footer["type"] = to_string(rep.type);
    footer["sigma"] = rep.sigma;
    footer["mu"] = a.mu;
    std::cerr << footer.dump(2) << "\n";
    return res.sup_residual <= a.tol ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constructive topological conjugacies for one-dimensional interval maps"};
    app.require_subcommand(1);

    FixedPointsArgs fp_args;
    CLI::App* fp = app.add_subcommand("fixed-points",
                                      "locate and classify fixed points / period-2 orbits");
    fp->add_option("--map", fp_args.map, "map expression in x")->required();
    fp->add_option("--domain", fp_args.domain, "domain \"lo,hi\"")->required();
    fp->add_option("--grid", fp_args.grid_n, "detection grid size")->capture_default_str();
    fp->add_option("--root-tol", fp_args.root_tol, "root refinement tolerance")
        ->capture_default_str();
    fp->add_option("--touch-tol", fp_args.touch_tol, "tangential touch threshold")
        ->capture_default_str();
    fp->add_option("--out", fp_args.out, "output path (default stdout)");

    CLI::App* conj = app.add_subcommand("conjugacy", "build or verify a conjugacy h");
    conj->require_subcommand(1);

    PairArgs build_args;
    CLI::App* build = conj->add_subcommand("build", "construct h and export samples");
    auto add_pair_flags = [](CLI::App* cmd, PairArgs& p) {
        cmd->add_option("--f", p.f, "map f expression")->required();
        cmd->add_option("--g", p.g, "map g expression")->required();
        cmd->add_option("--domain-f", p.domain_f, "domain of f \"lo,hi\"")->required();
        cmd->add_option("--domain-g", p.domain_g, "domain of g \"lo,hi\"")->required();
        cmd->add_flag("--flip", p.flip, "decreasing maps (flip construction)");
        cmd->add_option("--anchor-a", p.anchor_a, "anchor point in f's domain");
        cmd->add_option("--anchor-b", p.anchor_b, "anchor point in g's domain");
    };
    add_pair_flags(build, build_args);
    build->add_option("--samples", build_args.samples, "number of h samples")
        ->capture_default_str();
    build->add_option("--out", build_args.out, "CSV output path (default stdout)");
    build->add_option("--meta", build_args.meta, "build metadata JSON path");
    build->add_option("--svg", build_args.svg, "SVG plot path");

    VerifyArgs verify_args;
    CLI::App* verify = conj->add_subcommand("verify", "rebuild h and check the residual");
    add_pair_flags(verify, verify_args.pair);
    verify->add_option("--samples", verify_args.samples, "residual sample count")
        ->capture_default_str();
    verify->add_option("--exclusion", verify_args.exclusion,
                       "radius dropped around fixed/periodic points")
        ->capture_default_str();
    verify->add_option("--tol", verify_args.tol, "sup-residual bound for exit 0")
        ->capture_default_str();

    CLI::App* bif = app.add_subcommand("bifurcation", "classify a family / conjugate a fiber");
    bif->require_subcommand(1);

    ClassifyArgs cls_args;
    CLI::App* cls = bif->add_subcommand("classify", "classify a one-parameter family");
    auto add_family_flags = [](CLI::App* cmd, ClassifyArgs& c) {
        cmd->add_option("--family", c.family, "family expression in x and mu")->required();
        cmd->add_option("--x-window", c.x_window, "x window \"lo,hi\"")->capture_default_str();
        cmd->add_option("--mu-window", c.mu_window, "mu window \"lo,hi\"")
            ->capture_default_str();
        cmd->add_option("--n-mu", c.n_mu, "number of mu samples (odd)")->capture_default_str();
    };
    add_family_flags(cls, cls_args);
    cls->add_option("--out", cls_args.out, "output path (default stdout)");

    FiberArgs fiber_args;
    CLI::App* fiber = bif->add_subcommand("conjugate",
                                          "conjugate one fiber to its truncated normal form");
    add_family_flags(fiber, fiber_args.classify);
    fiber->add_option("--mu", fiber_args.mu, "parameter value of the fiber")->required();
    fiber->add_option("--normal-form", fiber_args.normal_form_name,
                      "skip auto-classification (fold|transcritical|pitchfork|flip)");
    fiber->add_option("--samples", fiber_args.samples, "number of h samples")
        ->capture_default_str();
    fiber->add_option("--out", fiber_args.out, "CSV output path (default stdout)");
    fiber->add_option("--meta", fiber_args.meta, "build metadata JSON path");
    fiber->add_option("--svg", fiber_args.svg, "SVG plot path");
    fiber->add_option("--verify-samples", fiber_args.verify_samples,
                      "residual samples for the footer check")
        ->capture_default_str();
    fiber->add_option("--exclusion", fiber_args.exclusion, "residual exclusion radius")
        ->capture_default_str();
    fiber->add_option("--tol", fiber_args.tol, "sup-residual bound for exit 0")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;  // bad flags are input errors; --help is fine
    }

    try {
        if (fp->parsed()) return run_fixed_points(fp_args);
        if (build->parsed()) return run_conjugacy_build(build_args);
        if (verify->parsed()) return run_conjugacy_verify(verify_args);
        if (cls->parsed()) return run_classify(cls_args);
        if (fiber->parsed()) return run_conjugate(fiber_args);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
