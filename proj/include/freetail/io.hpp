// File and string forms of the library types: one JSON document per
// measure, triplet or report, CSV for anything a plotter reads, and the
// CLI's measure shorthand. The field names here are the schema.
//
// Measure documents are {"variant": ..., fields}:
//
//   atoms   {"variant":"atoms", "support":s, "atoms":[{"location":l,"weight":w}, ...]}
//   pareto  {"variant":"pareto", "alpha":a, "x0":x, "c":c [, "weight":wv] [, "support":s]}
//   sample  {"variant":"sample", "support":s, "total_mass":m, "draws":[...]}
//   grid    {"variant":"grid", "support":s, "knots":[...], "values":[...]
//            [, "tail":{pareto fields}] [, "atoms":[...]]
//            [, "sample":{"total_mass":m, "draws":[...]}]}
//
// "grid" doubles as the composite form: a measure with several parts
// serializes as grid with the extra parts attached (knots may then be
// empty). support is "nonneg", "symmetric" or "real". The "weight" tag is
// one of "sigma_of_levy" / "levy_of_sigma" and only appears on tails that
// carry a conversion weight; plain tails leave it out. Numbers use the
// shortest representation that parses back to the same double, so atom and
// pareto parameters survive a round trip bit for bit. Non-finite values
// (the boundary remainder constants) serialize as null.
#pragma once

#include <string>

#include "freetail/free_id.hpp"
#include "freetail/measure.hpp"
#include "freetail/tails.hpp"

namespace freetail {

std::string measure_to_json(const Measure& mu);
// throws bad_spec on malformed documents; part validation errors propagate
Measure measure_from_json(const std::string& text);

// {"gamma":g, "sigma":{...}, "eta_prime":e, "nu":{...}}. Serialization
// always writes both parametrizations. Parsing accepts either pair and
// derives the other; when both are given they must agree (gamma to 1e-9
// relative, sigma mass to 1e-9), else bad_spec.
std::string triplet_to_json(const FreeRegularRep& rep);
FreeRegularRep triplet_from_json(const std::string& text);

// CLI shorthand:
//   pareto:<alpha>:<x0>   Pareto law, c = x0^alpha so the mass is one
//   atom:<loc>[:<w>]      point mass, default weight 1
//   mp                    Marchenko-Pastur fixture
//   semicircle            standard semicircle fixture
//   file:<path>           JSON document as above
Measure parse_measure_spec(const std::string& spec);

std::string tail_report_to_json(const TailReport& report);
std::string remainder_report_to_json(const RemainderReport& report);

// two columns "x,ratio" per the plotting contract; falls back to the tail
// column when the report carries no ratio series (plain index estimates)
void write_tail_csv(const std::string& path, const TailReport& report);
// columns "y,im_g,re_g,im_phi,re_phi"
void write_remainder_csv(const std::string& path, const RemainderReport& report);
// continuous part sampled on the knot grid, columns "x,density"
void write_density_csv(const std::string& path, const Measure& mu);
// one sample point per line (eigenvalue dumps)
void write_sample_csv(const std::string& path, const Measure& mu);

std::string read_text_file(const std::string& path);   // bad_spec when unreadable
void write_text_file(const std::string& path, const std::string& text);

} // namespace freetail
