#include "freetail/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "freetail/errors.hpp"

namespace freetail {

namespace {

using nlohmann::json;

const char* support_name(Support s) {
    switch (s) {
    case Support::nonneg: return "nonneg";
    case Support::symmetric: return "symmetric";
    default: return "real";
    }
}

Support support_from(const std::string& name) {
    if (name == "nonneg") return Support::nonneg;
    if (name == "symmetric") return Support::symmetric;
    if (name == "real") return Support::real;
    fail(errc::bad_spec, "unknown support \"" + name + "\"");
}

double need_num(const json& o, const char* key) {
    if (!o.contains(key) || !o[key].is_number())
        fail(errc::bad_spec, std::string("missing numeric field \"") + key + "\"");
    return o[key].get<double>();
}

std::string need_str(const json& o, const char* key) {
    if (!o.contains(key) || !o[key].is_string())
        fail(errc::bad_spec, std::string("missing string field \"") + key + "\"");
    return o[key].get<std::string>();
}

std::vector<double> need_vec(const json& o, const char* key) {
    if (!o.contains(key) || !o[key].is_array())
        fail(errc::bad_spec, std::string("missing array field \"") + key + "\"");
    std::vector<double> out;
    out.reserve(o[key].size());
    for (const json& v : o[key]) {
        if (!v.is_number()) fail(errc::bad_spec, std::string(key) + " holds a non number");
        out.push_back(v.get<double>());
    }
    return out;
}

json tail_obj(const ParetoTail& t) {
    json o{{"alpha", t.alpha}, {"x0", t.x0}, {"c", t.c}};
    if (t.weight == ParetoTail::Weight::sigma_of_levy) o["weight"] = "sigma_of_levy";
    else if (t.weight == ParetoTail::Weight::levy_of_sigma) o["weight"] = "levy_of_sigma";
    return o;
}

ParetoTail tail_from(const json& o) {
    ParetoTail t;
    t.alpha = need_num(o, "alpha");
    t.x0 = need_num(o, "x0");
    t.c = need_num(o, "c");
    if (o.contains("weight")) {
        std::string w = need_str(o, "weight");
        if (w == "sigma_of_levy") t.weight = ParetoTail::Weight::sigma_of_levy;
        else if (w == "levy_of_sigma") t.weight = ParetoTail::Weight::levy_of_sigma;
        else if (w != "plain") fail(errc::bad_spec, "unknown tail weight \"" + w + "\"");
    }
    return t;
}

json atoms_arr(const std::vector<Atom>& atoms) {
    json arr = json::array();
    for (const Atom& a : atoms) arr.push_back({{"location", a.location}, {"weight", a.weight}});
    return arr;
}

std::vector<Atom> atoms_from(const json& o, const char* key) {
    if (!o.contains(key) || !o[key].is_array())
        fail(errc::bad_spec, std::string("missing array field \"") + key + "\"");
    std::vector<Atom> atoms;
    for (const json& e : o[key]) {
        if (!e.is_object()) fail(errc::bad_spec, "atom entries must be objects");
        atoms.push_back({need_num(e, "location"), need_num(e, "weight")});
    }
    return atoms;
}

json measure_obj(const Measure& mu) {
    const bool has_atoms = !mu.atoms().empty();
    const bool has_grid = !mu.knots().empty();
    const bool has_tail = mu.power_tail().has_value();
    const bool has_sample = !mu.sample().empty();
    const int parts = int(has_atoms) + int(has_grid) + int(has_tail) + int(has_sample);

    json o;
    o["support"] = support_name(mu.support_type());
    if (parts == 1 && has_atoms) {
        o["variant"] = "atoms";
        o["atoms"] = atoms_arr(mu.atoms());
    } else if (parts == 1 && has_tail) {
        o["variant"] = "pareto";
        o.update(tail_obj(*mu.power_tail()));
    } else if (parts == 1 && has_sample) {
        o["variant"] = "sample";
        o["total_mass"] = mu.sample_mass();
        o["draws"] = mu.sample();
    } else {
        // composite (or empty) form
        o["variant"] = "grid";
        o["knots"] = mu.knots();
        o["values"] = mu.values();
        if (has_atoms) o["atoms"] = atoms_arr(mu.atoms());
        if (has_tail) o["tail"] = tail_obj(*mu.power_tail());
        if (has_sample)
            o["sample"] = json{{"total_mass", mu.sample_mass()}, {"draws", mu.sample()}};
    }
    return o;
}

Measure measure_from_obj(const json& o) {
    if (!o.is_object()) fail(errc::bad_spec, "measure document must be a JSON object");
    std::string variant = need_str(o, "variant");
    Support s = o.contains("support") ? support_from(need_str(o, "support")) : Support::nonneg;

    if (variant == "atoms") return Measure::atomic(atoms_from(o, "atoms"), s);
    if (variant == "pareto")
        return Measure::compose({}, {}, {}, tail_from(o), {}, 0.0, s);
    if (variant == "sample")
        return Measure::empirical(need_vec(o, "draws"), s, need_num(o, "total_mass"));
    if (variant == "grid") {
        std::vector<Atom> atoms;
        if (o.contains("atoms")) atoms = atoms_from(o, "atoms");
        std::optional<ParetoTail> tail;
        if (o.contains("tail")) tail = tail_from(o["tail"]);
        std::vector<double> sample;
        double sample_mass = 0.0;
        if (o.contains("sample")) {
            if (!o["sample"].is_object()) fail(errc::bad_spec, "sample must be an object");
            sample = need_vec(o["sample"], "draws");
            sample_mass = need_num(o["sample"], "total_mass");
        }
        return Measure::compose(std::move(atoms), need_vec(o, "knots"), need_vec(o, "values"),
                                tail, std::move(sample), sample_mass, s);
    }
    fail(errc::bad_spec, "unknown measure variant \"" + variant + "\"");
}

json parse_doc(const std::string& text) {
    json o = json::parse(text, nullptr, false);
    if (o.is_discarded()) fail(errc::bad_spec, "not valid JSON");
    return o;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<const std::vector<double>*>& cols) {
    std::string out = header + "\n";
    char buf[40];
    const std::size_t rows = cols.empty() ? 0 : cols.front()->size();
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", (*cols[c])[i]);
            out += buf;
            out += (c + 1 < cols.size()) ? ',' : '\n';
        }
    }
    write_text_file(path, out);
}

} // namespace

std::string measure_to_json(const Measure& mu) { return measure_obj(mu).dump(2) + "\n"; }

Measure measure_from_json(const std::string& text) { return measure_from_obj(parse_doc(text)); }

std::string triplet_to_json(const FreeRegularRep& rep) {
    FreeLK lk = rep.to_lk();
    json o;
    o["gamma"] = lk.gamma;
    o["sigma"] = measure_obj(lk.sigma);
    o["eta_prime"] = rep.eta_prime;
    o["nu"] = measure_obj(rep.nu);
    return o.dump(2) + "\n";
}

FreeRegularRep triplet_from_json(const std::string& text) {
    json o = parse_doc(text);
    if (!o.is_object()) fail(errc::bad_spec, "triplet document must be a JSON object");
    const bool any_levy = o.contains("eta_prime") || o.contains("nu");
    const bool any_lk = o.contains("gamma") || o.contains("sigma");
    if (any_levy && !(o.contains("eta_prime") && o.contains("nu")))
        fail(errc::bad_spec, "eta_prime and nu go together");
    if (any_lk && !(o.contains("gamma") && o.contains("sigma")))
        fail(errc::bad_spec, "gamma and sigma go together");
    if (!any_levy && !any_lk)
        fail(errc::bad_spec, "triplet needs (gamma, sigma) or (eta_prime, nu)");

    if (any_levy) {
        FreeRegularRep rep =
            FreeRegularRep::from_levy(need_num(o, "eta_prime"), measure_from_obj(o["nu"]));
        if (any_lk) {
            FreeLK lk = rep.to_lk();
            double gamma = need_num(o, "gamma");
            Measure sigma = measure_from_obj(o["sigma"]);
            bool ok = std::abs(lk.gamma - gamma) <= 1e-9 * (1.0 + std::abs(gamma)) &&
                      std::abs(lk.sigma.mass() - sigma.mass()) <= 1e-9 * (1.0 + sigma.mass());
            if (!ok) fail(errc::bad_spec, "(gamma, sigma) disagrees with (eta_prime, nu)");
        }
        return rep;
    }
    return FreeRegularRep::from_sigma(need_num(o, "gamma"), measure_from_obj(o["sigma"]));
}

Measure parse_measure_spec(const std::string& spec) {
    if (spec == "mp") return Measure::marchenko_pastur();
    if (spec == "semicircle") return Measure::semicircle();
    if (spec.rfind("file:", 0) == 0) return measure_from_json(read_text_file(spec.substr(5)));

    std::vector<std::string> tok;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = spec.find(':', pos);
        tok.push_back(spec.substr(pos, next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    auto num = [&spec](const std::string& t) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            fail(errc::bad_spec, "bad number in measure spec \"" + spec + "\"");
        }
        if (used != t.size())
            fail(errc::bad_spec, "bad number in measure spec \"" + spec + "\"");
        return v;
    };

    if (tok[0] == "pareto") {
        if (tok.size() != 3) fail(errc::bad_spec, "expected pareto:<alpha>:<x0>");
        double alpha = num(tok[1]), x0 = num(tok[2]);
        // c = x0^alpha makes the tail mass at x0 equal one: a probability law
        return Measure::pareto(alpha, x0, std::pow(x0, alpha));
    }
    if (tok[0] == "atom") {
        if (tok.size() != 2 && tok.size() != 3)
            fail(errc::bad_spec, "expected atom:<loc>[:<w>]");
        return Measure::point_mass(num(tok[1]), tok.size() == 3 ? num(tok[2]) : 1.0);
    }
    fail(errc::bad_spec, "unknown measure spec \"" + spec + "\"");
}

std::string tail_report_to_json(const TailReport& report) {
    json o;
    o["x"] = report.x;
    o["tail"] = report.tail;
    o["ratio"] = report.ratio;
    o["index"] = report.index;
    o["band"] = report.band;
    o["window_begin"] = report.window_begin;
    o["window_end"] = report.window_end;
    o["terminal"] = report.terminal;
    o["hill"] = report.hill ? json(*report.hill) : json(nullptr);
    return o.dump(2) + "\n";
}

std::string remainder_report_to_json(const RemainderReport& report) {
    json o;
    o["y"] = report.y;
    o["im_g"] = report.im_g;
    o["re_g"] = report.re_g;
    o["im_phi"] = report.im_phi;
    o["re_phi"] = report.re_phi;
    o["im_constant"] = report.im_constant;
    o["re_constant"] = report.re_constant;
    o["boundary"] = report.boundary;
    o["im_terminal"] = report.im_terminal;
    o["re_terminal"] = report.re_terminal;
    o["window_lo"] = report.window_lo;
    o["window_hi"] = report.window_hi;
    return o.dump(2) + "\n";
}

void write_tail_csv(const std::string& path, const TailReport& report) {
    if (!report.ratio.empty())
        write_csv(path, "x,ratio", {&report.x, &report.ratio});
    else
        write_csv(path, "x,tail", {&report.x, &report.tail});
}

void write_remainder_csv(const std::string& path, const RemainderReport& report) {
    write_csv(path, "y,im_g,re_g,im_phi,re_phi",
              {&report.y, &report.im_g, &report.re_g, &report.im_phi, &report.re_phi});
}

void write_density_csv(const std::string& path, const Measure& mu) {
    std::vector<double> dens;
    dens.reserve(mu.knots().size());
    for (double x : mu.knots()) dens.push_back(mu.density(x));
    write_csv(path, "x,density", {&mu.knots(), &dens});
}

void write_sample_csv(const std::string& path, const Measure& mu) {
    write_csv(path, "value", {&mu.sample()});
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::bad_spec, "cannot read \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::bad_spec, "cannot write \"" + path + "\"");
    out << text;
    out.flush();
    if (!out) fail(errc::bad_spec, "short write to \"" + path + "\"");
}

} // namespace freetail
