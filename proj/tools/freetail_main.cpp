// freetail command line. One subcommand per experiment recipe; every run
// drops its artifacts plus a manifest.json (version, seed, config echo,
// headline numbers) into the output directory, so CI asserts on JSON
// instead of scraping logs. Output directory: --out-dir, else
// FREETAIL_OUT_DIR, else the working directory.
//
// Exit codes: 0 ok, 2 validation errors, 3 numerical failures. Any failure
// prints one machine readable JSON line {"error":{"code","message"}} on
// stderr.

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "freetail/convolution.hpp"
#include "freetail/errors.hpp"
#include "freetail/free_id.hpp"
#include "freetail/inversion.hpp"
#include "freetail/io.hpp"
#include "freetail/measure.hpp"
#include "freetail/rmt.hpp"
#include "freetail/rng.hpp"
#include "freetail/tails.hpp"
#include "freetail/transforms.hpp"

using namespace freetail;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double pi = 3.14159265358979323846;

double parse_num(const std::string& t, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        fail(errc::bad_spec, "bad number \"" + t + "\" in " + what);
    }
    if (used != t.size()) fail(errc::bad_spec, "bad number \"" + t + "\" in " + what);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> tok;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        tok.push_back(s.substr(pos, next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return tok;
}

struct Ray {
    double lo = 0.0, hi = 0.0;
    std::size_t n = 0;
};

// "lo:hi:n"
Ray parse_ray(const std::string& s, const std::string& what) {
    std::vector<std::string> tok = split(s, ':');
    if (tok.size() != 3) fail(errc::bad_spec, what + " wants lo:hi:n, got \"" + s + "\"");
    Ray r;
    r.lo = parse_num(tok[0], what);
    r.hi = parse_num(tok[1], what);
    double n = parse_num(tok[2], what);
    if (n < 1.0 || n != std::floor(n)) fail(errc::bad_spec, what + " needs an integer count >= 1");
    r.n = std::size_t(n);
    require(r.hi > r.lo, errc::bad_spec, what + " needs hi > lo");
    return r;
}

std::vector<double> log_ray(const Ray& r) {
    require(r.lo > 0.0, errc::bad_spec, "logarithmic ray needs lo > 0");
    std::vector<double> ys(r.n);
    for (std::size_t i = 0; i < r.n; ++i)
        ys[i] = r.n == 1 ? r.lo : r.lo * std::pow(r.hi / r.lo, double(i) / double(r.n - 1));
    return ys;
}

std::filesystem::path resolve_out_dir(const std::string& flag) {
    std::string dir = flag;
    if (dir.empty()) {
        const char* env = std::getenv("FREETAIL_OUT_DIR");
        dir = env && *env ? env : ".";
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(errc::bad_spec, "cannot create output directory \"" + dir + "\"");
    return dir;
}

// relative artifact names land inside the output directory
std::string artifact(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::path p(name);
    if (p.is_relative()) p = dir / p;
    if (!p.parent_path().empty()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) fail(errc::bad_spec, "cannot create directory for \"" + p.string() + "\"");
    }
    return p.string();
}

void write_manifest(const std::filesystem::path& dir, json man) {
    man["version"] = kVersion;
    write_text_file((dir / "manifest.json").string(), man.dump(2) + "\n");
}

// headline numbers that may legitimately not exist (diverging moments,
// windows too short) degrade to null instead of failing the run
json try_num(const std::function<double()>& f) {
    try {
        return json(f());
    } catch (const Error&) {
        return json(nullptr);
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// transform

struct TransformOpts {
    std::string measure, kind = "g", ray = "1:100:40", out = "transform.csv", dir;
};

void run_transform(const TransformOpts& o) {
    std::filesystem::path dir = resolve_out_dir(o.dir);
    Measure mu = parse_measure_spec(o.measure);
    std::vector<double> ys = log_ray(parse_ray(o.ray, "--ray"));

    std::string csv = "y,re,im\n";
    cplx last{};
    for (double y : ys) {
        cplx v;
        if (o.kind == "g") v = cauchy(mu, {0.0, y});
        else if (o.kind == "f") v = reciprocal_cauchy(mu, {0.0, y});
        else if (o.kind == "phi") v = voiculescu(mu, {0.0, y});
        else v = free_cumulant_transform(mu, {0.0, -1.0 / y}); // C on the 1/z chart
        csv += fmt(y) + "," + fmt(v.real()) + "," + fmt(v.imag()) + "\n";
        last = v;
    }
    std::string out = artifact(dir, o.out);
    write_text_file(out, csv);

    json man;
    man["command"] = "transform";
    man["config"] = {{"measure", o.measure}, {"kind", o.kind}, {"ray", o.ray}};
    man["outputs"] = {{"csv", out}};
    man["headline"] = {{"y", ys.back()}, {"re", last.real()}, {"im", last.imag()}};
    write_manifest(dir, man);
}

// ---------------------------------------------------------------------------
// convolve

struct ConvolveOpts {
    std::string a, b, grid = "0:16:800", support = "nonneg";
    std::string out_density = "density.csv", out_measure = "measure.json", dir;
    bool multiplicative = false, log = false, fit_tail = false;
    double expected_mass = 1.0;
};

Support parse_support(const std::string& s) {
    if (s == "nonneg") return Support::nonneg;
    if (s == "symmetric") return Support::symmetric;
    if (s == "real") return Support::real;
    fail(errc::bad_spec, "unknown support \"" + s + "\"");
}

void run_convolve(const ConvolveOpts& o) {
    std::filesystem::path dir = resolve_out_dir(o.dir);
    Measure a = parse_measure_spec(o.a);
    Measure b = parse_measure_spec(o.b);

    Ray g = parse_ray(o.grid, "--grid");
    InversionConfig cfg = o.log ? InversionConfig::logarithmic(g.lo, g.hi, g.n)
                                : InversionConfig::linear(g.lo, g.hi, g.n);
    cfg.support = parse_support(o.support);
    cfg.fit_tail = o.fit_tail;
    cfg.expected_mass = o.expected_mass;

    Measure m = o.multiplicative ? free_multiply(a, b, cfg) : free_add(a, b, cfg);

    std::string dens = artifact(dir, o.out_density);
    std::string meas = artifact(dir, o.out_measure);
    write_density_csv(dens, m);
    write_text_file(meas, measure_to_json(m));

    json man;
    man["command"] = "convolve";
    man["config"] = {{"a", o.a},
                     {"b", o.b},
                     {"multiplicative", o.multiplicative},
                     {"grid", o.grid},
                     {"log", o.log},
                     {"support", o.support}};
    man["outputs"] = {{"density", dens}, {"measure", meas}};
    man["headline"] = {{"mass", m.mass()},
                       {"mean", try_num([&] { return m.moment(1); })},
                       {"atoms", m.atoms().size()}};
    write_manifest(dir, man);
}

// ---------------------------------------------------------------------------
// levy-build

struct LevyBuildOpts {
    std::string sigma, gamma = "auto", nu, triplet, out = "triplet.json", dir;
    double eta_prime = 0.0;
};

void run_levy_build(const LevyBuildOpts& o) {
    std::filesystem::path dir = resolve_out_dir(o.dir);
    int modes = int(!o.sigma.empty()) + int(!o.nu.empty()) + int(!o.triplet.empty());
    require(modes == 1, errc::bad_spec,
            "pick exactly one input: --sigma, --nu or --triplet");

    FreeRegularRep rep;
    if (!o.sigma.empty()) {
        Measure sigma = parse_measure_spec(o.sigma);
        rep = o.gamma == "auto"
                  ? FreeRegularRep::from_sigma_auto(sigma)
                  : FreeRegularRep::from_sigma(parse_num(o.gamma, "--gamma"), sigma);
    } else if (!o.nu.empty()) {
        rep = FreeRegularRep::from_levy(o.eta_prime, parse_measure_spec(o.nu));
    } else {
        rep = triplet_from_json(read_text_file(o.triplet));
    }

    FreeLK lk = rep.to_lk();
    std::string out = artifact(dir, o.out);
    write_text_file(out, triplet_to_json(rep));

    json man;
    man["command"] = "levy-build";
    man["config"] = {{"sigma", o.sigma},
                     {"gamma", o.gamma},
                     {"nu", o.nu},
                     {"eta_prime", o.eta_prime},
                     {"triplet", o.triplet}};
    man["outputs"] = {{"triplet", out}};
    man["headline"] = {{"gamma", lk.gamma},
                       {"eta_prime", rep.eta_prime},
                       {"sigma_mass", lk.sigma.mass()},
                       {"nu_mass", rep.nu.mass()},
                       {"kappa_2", try_num([&] { return rep.free_cumulant(2); })}};
    write_manifest(dir, man);
}

// ---------------------------------------------------------------------------
// invert

struct InvertOpts {
    std::string measure, phi, grid = "0.01:100:300", support = "nonneg";
    std::string out_density = "density.csv", out_measure = "measure.json", dir;
    bool log = false, fit_tail = false;
    double expected_mass = -1.0; // sentinel: 1 for measures, 0 for phi specs
};

void run_invert(const InvertOpts& o) {
    std::filesystem::path dir = resolve_out_dir(o.dir);
    require(o.measure.empty() != o.phi.empty(), errc::bad_spec,
            "pick exactly one of --measure and --phi");

    Ray g = parse_ray(o.grid, "--grid");
    InversionConfig cfg = o.log ? InversionConfig::logarithmic(g.lo, g.hi, g.n)
                                : InversionConfig::linear(g.lo, g.hi, g.n);
    cfg.support = parse_support(o.support);
    cfg.fit_tail = o.fit_tail;

    Measure m;
    if (!o.measure.empty()) {
        cfg.expected_mass = o.expected_mass < 0.0 ? 1.0 : o.expected_mass;
        Measure src = parse_measure_spec(o.measure);
        m = stieltjes_invert([&src](cplx z) { return src.cauchy(z); }, cfg);
    } else {
        // free stable shorthand stable:<alpha>:<rho>; the mass lands partly
        // beyond any finite grid, so the deficit gate defaults to off here
        cfg.expected_mass = o.expected_mass < 0.0 ? 0.0 : o.expected_mass;
        std::vector<std::string> tok = split(o.phi, ':');
        if (tok.size() != 3 || tok[0] != "stable")
            fail(errc::bad_spec, "expected --phi stable:<alpha>:<rho>");
        double alpha = parse_num(tok[1], "--phi");
        double rho = parse_num(tok[2], "--phi");
        auto phi = free_stable_phi(alpha, rho);
        cplx front = -std::exp(cplx(0.0, pi * alpha * rho));
        auto dphi = [front, alpha](cplx z) {
            return front * (1.0 - alpha) * std::pow(z, -alpha);
        };
        m = invert_from_phi(phi, dphi, cfg);
    }

    std::string dens = artifact(dir, o.out_density);
    std::string meas = artifact(dir, o.out_measure);
    write_density_csv(dens, m);
    write_text_file(meas, measure_to_json(m));

    json man;
    man["command"] = "invert";
    man["config"] = {{"measure", o.measure}, {"phi", o.phi},     {"grid", o.grid},
                     {"log", o.log},         {"support", o.support}};
    man["outputs"] = {{"density", dens}, {"measure", meas}};
    man["headline"] = {{"mass", m.mass()},
                       {"atoms", m.atoms().size()},
                       {"has_tail", m.has_tail()}};
    write_manifest(dir, man);
}

// ---------------------------------------------------------------------------
// tail-check

struct TailCheckOpts {
    std::string sigma, gamma = "auto", window = "50:500:40", inv_grid;
    std::string out_csv = "tail.csv", out_report = "report.json", dir;
    bool no_fit_tail = false;
};

void run_tail_check(const TailCheckOpts& o) {
    std::filesystem::path dir = resolve_out_dir(o.dir);
    Measure sigma = parse_measure_spec(o.sigma);
    FreeRegularRep rep = o.gamma == "auto"
                             ? FreeRegularRep::from_sigma_auto(sigma)
                             : FreeRegularRep::from_sigma(parse_num(o.gamma, "--gamma"), sigma);
    FreeLK lk = rep.to_lk();

    Ray w = parse_ray(o.window, "--window");
    Ray g = o.inv_grid.empty() ? Ray{0.02, 4.0 * w.hi, 360}
                               : parse_ray(o.inv_grid, "--inv-grid");
    InversionConfig cfg = InversionConfig::logarithmic(g.lo, g.hi, g.n);
    cfg.fit_tail = !o.no_fit_tail;

    Measure mu = invert_from_phi([&lk](cplx z) { return lk.phi(z); },
                                 [&lk](cplx z) { return lk.phi_derivative(z); }, cfg);

    TailReport ratio = tail_ratio(mu, sigma, log_ray(w));
    std::string csv = artifact(dir, o.out_csv);
    std::string rep_path = artifact(dir, o.out_report);
    write_tail_csv(csv, ratio);
    write_text_file(rep_path, tail_report_to_json(ratio));

    json man;
    man["command"] = "tail-check";
    man["config"] = {{"sigma", o.sigma}, {"gamma", o.gamma}, {"window", o.window}};
    man["outputs"] = {{"csv", csv}, {"report", rep_path}};
    man["headline"] = {
        {"terminal_ratio", ratio.terminal},
        {"gamma", lk.gamma},
        {"mu_mass", mu.mass()},
        {"mu_index", try_num([&] {
             // wider than the ratio window so the slope fit has headroom
             return estimate_tail_index(mu, log_ray({w.lo / 2.0, 2.0 * w.hi, w.n + 10})).index;
         })}};
    write_manifest(dir, man);
}

// ---------------------------------------------------------------------------
// remainder-check

struct RemainderOpts {
    std::string measure, y = "10:10000:13";
    std::string out_csv = "remainder.csv", out_report = "report.json", dir;
    int p = 0;
    double alpha = 0.0, beta = 0.25;
};

void run_remainder_check(const RemainderOpts& o) {
    std::filesystem::path dir = resolve_out_dir(o.dir);
    Measure mu = parse_measure_spec(o.measure);

    RemainderCheckConfig cfg;
    cfg.p = o.p;
    cfg.alpha = o.alpha;
    cfg.beta = o.beta;
    cfg.y = log_ray(parse_ray(o.y, "--y"));
    RemainderReport rep = check_remainder_asymptotics(mu, cfg);

    std::string csv = artifact(dir, o.out_csv);
    std::string rep_path = artifact(dir, o.out_report);
    write_remainder_csv(csv, rep);
    write_text_file(rep_path, remainder_report_to_json(rep));

    json man;
    man["command"] = "remainder-check";
    man["config"] = {
        {"measure", o.measure}, {"p", o.p}, {"alpha", o.alpha}, {"beta", o.beta}, {"y", o.y}};
    man["outputs"] = {{"csv", csv}, {"report", rep_path}};
    man["headline"] = {{"im_terminal", rep.im_terminal},
                       {"re_terminal", rep.re_terminal},
                       {"im_constant", rep.im_constant},
                       {"re_constant", rep.re_constant},
                       {"boundary", rep.boundary}};
    write_manifest(dir, man);
}

// ---------------------------------------------------------------------------
// rmt-sim

struct RmtOpts {
    std::string rho, theory, out = "eig.csv", dir;
    std::size_t n = 500, m = 500, trials = 50;
    std::uint64_t seed = 1;
};

void run_rmt_sim(const RmtOpts& o) {
    std::filesystem::path dir = resolve_out_dir(o.dir);
    RmtConfig cfg;
    cfg.n = o.n;
    cfg.m = o.m;
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.rho = parse_measure_spec(o.rho);

    std::size_t clipped = 0;
    Measure s = sample_product_spectrum(cfg, &clipped);
    std::string out = artifact(dir, o.out);
    write_sample_csv(out, s);

    json man;
    man["command"] = "rmt-sim";
    man["config"] = {{"n", o.n},       {"m", o.m},           {"trials", o.trials},
                     {"seed", o.seed}, {"rho", o.rho},       {"theory", o.theory}};
    man["outputs"] = {{"eigenvalues", out}};
    json head;
    head["count"] = s.sample().size();
    head["clipped"] = clipped;
    head["min"] = s.sample().front();
    head["max"] = s.sample().back();
    head["hill"] = try_num([&] { return hill_index(s); });
    if (!o.theory.empty()) {
        TheoryComparison c = compare_to_theory(s, parse_measure_spec(o.theory));
        head["ks"] = c.ks;
        head["tail_terminal"] = c.tail ? json(c.tail->terminal) : json(nullptr);
    }
    man["headline"] = head;
    write_manifest(dir, man);
}

// ---------------------------------------------------------------------------
// bp-check

struct BpOpts {
    std::string nu, inv_grid = "1e-4:2000:380";
    std::string out_report = "report.json", out_density = "free_density.csv", dir;
    double eta_prime = 0.0, samples = 1e6, percentile = 99.9;
    std::uint64_t seed = 1;
};

void run_bp_check(const BpOpts& o) {
    std::filesystem::path dir = resolve_out_dir(o.dir);
    require(o.samples >= 100.0 && o.samples == std::floor(o.samples), errc::bad_spec,
            "--samples wants an integer >= 100");
    require(o.percentile > 0.0 && o.percentile < 100.0, errc::bad_spec,
            "--percentile must sit in (0, 100)");

    Measure nu = parse_measure_spec(o.nu);
    FreeRegularRep rep = bercovici_pata(0.0, o.eta_prime, nu); // gates eta', nu

    // classical side: compound Poisson draws under the same triple
    Rng rng(o.seed);
    std::vector<double> draws =
        classical_compound_poisson_sample(nu.mass(), nu, std::size_t(o.samples), rng);
    if (o.eta_prime != 0.0)
        for (double& d : draws) d += o.eta_prime;
    Measure classical = Measure::empirical(std::move(draws));

    // free side. The drift is exactly a translation (delta_eta' boxplus the
    // drift free law), so invert at eta' = 0, where the hard edge sits at
    // the origin and the edge reflected ladder handles it, and shift
    // analytically afterwards; an interior edge would ring the clip gate.
    FreeRegularRep rep0 = FreeRegularRep::from_levy(0.0, rep.nu);
    FreeLK lk = rep0.to_lk();
    Ray g = parse_ray(o.inv_grid, "--inv-grid");
    InversionConfig cfg = InversionConfig::logarithmic(g.lo, g.hi, g.n);
    cfg.fit_tail = true;
    Measure mu0 = invert_from_phi([&lk](cplx z) { return lk.phi(z); },
                                  [&lk](cplx z) { return lk.phi_derivative(z); }, cfg);
    auto free_tail = [&](double x) { return mu0.tail(x - o.eta_prime); };

    const std::vector<double>& xs = classical.sample();
    std::size_t idx = std::size_t(o.percentile / 100.0 * double(xs.size()));
    idx = std::min(idx, xs.size() - 1);
    double x_star = xs[idx];
    double tail_ratio_at = free_tail(x_star) / classical.tail(x_star);

    json head;
    head["hill_classical"] = try_num([&] { return hill_index(classical); });
    head["index_free"] = try_num([&] {
        // the translation cannot move a regular variation index
        std::vector<double> win = log_ray({std::max(g.lo * 10.0, x_star / 20.0),
                                           std::min(5.0 * x_star, g.hi), 25});
        return estimate_tail_index(mu0, win).index;
    });
    if (head["hill_classical"].is_number() && head["index_free"].is_number())
        head["hill_diff"] =
            std::abs(head["hill_classical"].get<double>() - head["index_free"].get<double>());
    else
        head["hill_diff"] = nullptr;
    head["x_star"] = x_star;
    head["tail_ratio_at_percentile"] = tail_ratio_at;
    head["free_mass"] = mu0.mass();

    std::string dens = artifact(dir, o.out_density);
    std::string rep_path = artifact(dir, o.out_report);
    {
        // density of the shifted law: columns carry the translated knots
        std::string csv = "x,density\n";
        for (double x : mu0.knots())
            csv += fmt(x + o.eta_prime) + "," + fmt(mu0.density(x)) + "\n";
        write_text_file(dens, csv);
    }
    write_text_file(rep_path, json{{"headline", head}}.dump(2) + "\n");

    json man;
    man["command"] = "bp-check";
    man["config"] = {{"nu", o.nu},
                     {"eta_prime", o.eta_prime},
                     {"samples", o.samples},
                     {"seed", o.seed},
                     {"percentile", o.percentile},
                     {"inv_grid", o.inv_grid}};
    man["outputs"] = {{"report", rep_path}, {"free_density", dens}};
    man["headline"] = head;
    write_manifest(dir, man);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical free probability toolkit"};
    app.require_subcommand(1);

    auto to = std::make_shared<TransformOpts>();
    CLI::App* t = app.add_subcommand("transform", "evaluate G, F, phi or C along a ray");
    t->add_option("--measure", to->measure, "measure spec")->required();
    t->add_option("--kind", to->kind, "g | f | phi | c (c runs on the 1/z chart)")
        ->check(CLI::IsMember({"g", "f", "phi", "c"}));
    t->add_option("--ray", to->ray, "log spaced heights lo:hi:n, z = iy");
    t->add_option("--out", to->out, "csv path");
    t->add_option("--out-dir", to->dir, "artifact directory");
    t->callback([to] { run_transform(*to); });

    auto co = std::make_shared<ConvolveOpts>();
    CLI::App* c = app.add_subcommand("convolve", "free additive or multiplicative convolution");
    c->add_option("--a", co->a, "first measure spec")->required();
    c->add_option("--b", co->b, "second measure spec")->required();
    c->add_flag("--multiplicative", co->multiplicative, "boxtimes instead of boxplus");
    c->add_option("--grid", co->grid, "inversion grid lo:hi:cells");
    c->add_flag("--log", co->log, "log spaced grid");
    c->add_option("--support", co->support, "nonneg | symmetric | real");
    c->add_flag("--fit-tail", co->fit_tail, "power fit on the last grid decade");
    c->add_option("--expected-mass", co->expected_mass, "deficit gate target, 0 disables");
    c->add_option("--out-density", co->out_density, "density csv path");
    c->add_option("--out-measure", co->out_measure, "measure json path");
    c->add_option("--out-dir", co->dir, "artifact directory");
    c->callback([co] { run_convolve(*co); });

    auto lo = std::make_shared<LevyBuildOpts>();
    CLI::App* l = app.add_subcommand("levy-build", "complete a free Levy-Khintchine triplet");
    l->add_option("--sigma", lo->sigma, "sigma measure spec (with --gamma)");
    l->add_option("--gamma", lo->gamma, "drift, or auto for the drift free choice");
    l->add_option("--nu", lo->nu, "Levy measure spec (with --eta-prime)");
    l->add_option("--eta-prime", lo->eta_prime, "nonnegative drift of the reduced form");
    l->add_option("--triplet", lo->triplet, "triplet json to validate and complete");
    l->add_option("--out", lo->out, "triplet json path");
    l->add_option("--out-dir", lo->dir, "artifact directory");
    l->callback([lo] { run_levy_build(*lo); });

    auto io = std::make_shared<InvertOpts>();
    CLI::App* i = app.add_subcommand("invert", "Stieltjes inversion of a transform");
    i->add_option("--measure", io->measure, "invert this measure's own Cauchy transform");
    i->add_option("--phi", io->phi, "voiculescu transform spec stable:<alpha>:<rho>");
    i->add_option("--grid", io->grid, "grid lo:hi:cells");
    i->add_flag("--log", io->log, "log spaced grid");
    i->add_option("--support", io->support, "nonneg | symmetric | real");
    i->add_flag("--fit-tail", io->fit_tail, "power fit on the last grid decade");
    i->add_option("--expected-mass", io->expected_mass, "deficit gate target, 0 disables");
    i->add_option("--out-density", io->out_density, "density csv path");
    i->add_option("--out-measure", io->out_measure, "measure json path");
    i->add_option("--out-dir", io->dir, "artifact directory");
    i->callback([io] { run_invert(*io); });

    auto tc = std::make_shared<TailCheckOpts>();
    CLI::App* tl = app.add_subcommand("tail-check",
                                      "tail equivalence of mu(gamma, sigma) against sigma");
    tl->add_option("--sigma", tc->sigma, "sigma measure spec")->required();
    tl->add_option("--gamma", tc->gamma, "drift, or auto");
    tl->add_option("--window", tc->window, "ratio window lo:hi:n (log spaced)");
    tl->add_option("--inv-grid", tc->inv_grid, "inversion grid lo:hi:cells (default derived)");
    tl->add_flag("--no-fit-tail", tc->no_fit_tail, "disable the tail continuation fit");
    tl->add_option("--out", tc->out_csv, "ratio csv path");
    tl->add_option("--out-report", tc->out_report, "report json path");
    tl->add_option("--out-dir", tc->dir, "artifact directory");
    tl->callback([tc] { run_tail_check(*tc); });

    auto ro = std::make_shared<RemainderOpts>();
    CLI::App* r = app.add_subcommand("remainder-check", "Laurent remainder asymptotics of G and phi");
    r->add_option("--measure", ro->measure, "measure spec")->required();
    r->add_option("--p", ro->p, "moment class index p >= 0")->required();
    r->add_option("--alpha", ro->alpha, "tail index, p <= alpha <= p + 1")->required();
    r->add_option("--beta", ro->beta, "boundary window exponent in (0, 1/2)");
    r->add_option("--y", ro->y, "heights lo:hi:n (log spaced)");
    r->add_option("--out", ro->out_csv, "remainder csv path");
    r->add_option("--out-report", ro->out_report, "report json path");
    r->add_option("--out-dir", ro->dir, "artifact directory");
    r->callback([ro] { run_remainder_check(*ro); });

    auto mo = std::make_shared<RmtOpts>();
    CLI::App* s = app.add_subcommand("rmt-sim", "pooled product spectrum Monte Carlo");
    s->add_option("--n", mo->n, "matrix dimension");
    s->add_option("--m", mo->m, "samples per trial");
    s->add_option("--trials", mo->trials, "independent trials to pool");
    s->add_option("--rho", mo->rho, "population measure spec")->required();
    s->add_option("--seed", mo->seed, "base seed");
    s->add_option("--theory", mo->theory, "optional reference measure for KS and tails");
    s->add_option("--out", mo->out, "eigenvalue csv path");
    s->add_option("--out-dir", mo->dir, "artifact directory");
    s->callback([mo] { run_rmt_sim(*mo); });

    auto bo = std::make_shared<BpOpts>();
    CLI::App* b = app.add_subcommand("bp-check",
                                     "classical vs free compound Poisson tail comparison");
    b->add_option("--nu", bo->nu, "Levy measure spec")->required();
    b->add_option("--eta-prime", bo->eta_prime, "drift of both triples");
    b->add_option("--samples", bo->samples, "classical Monte Carlo draws");
    b->add_option("--seed", bo->seed, "Monte Carlo seed");
    b->add_option("--percentile", bo->percentile, "tail comparison quantile");
    b->add_option("--inv-grid", bo->inv_grid, "free side inversion grid lo:hi:cells");
    b->add_option("--out-report", bo->out_report, "report json path");
    b->add_option("--out-density", bo->out_density, "free density csv path");
    b->add_option("--out-dir", bo->dir, "artifact directory");
    b->callback([bo] { run_bp_check(*bo); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        json err;
        err["error"]["code"] = "bad_spec";
        err["error"]["message"] = e.what();
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    } catch (const Error& e) {
        json err;
        err["error"]["code"] = errc_name(e.code());
        err["error"]["message"] = e.what();
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return is_validation_error(e.code()) ? 2 : 3;
    } catch (const std::exception& e) {
        json err;
        err["error"]["code"] = "internal";
        err["error"]["message"] = e.what();
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 3;
    }
    return 0;
}
