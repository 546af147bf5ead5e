#include "hdiff/measure_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "hdiff/error.hpp"
#include "json_reader.hpp"

namespace hdiff {

namespace {

using detail::json;
using detail::Reader;

std::string fmt(double v) {
    if (v == kInf) return "\"inf\"";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

SpeedMeasure parse_measure(std::string_view text) {
    Reader rd(text);
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
        throw ParseError(line, "document", "malformed JSON");
    }
    if (!doc.is_object()) rd.fail("", "expected a top-level object");
    rd.only_keys(doc, "", {"pieces", "atoms", "lprime", "l"});

    const double lprime = rd.number(rd.field(doc, "lprime", ""), "lprime", true);
    const double l = doc.contains("l") ? rd.number(doc["l"], "l", true) : kInf;

    std::vector<DensityPiece> pieces;
    const auto& jp = rd.field(doc, "pieces", "");
    if (!jp.is_array()) rd.fail("pieces", "expected an array");
    for (std::size_t i = 0; i < jp.size(); ++i) {
        const std::string path = "pieces[" + std::to_string(i) + "]";
        const auto& p = jp[i];
        rd.only_keys(p, path, {"from", "to", "density", "power"});
        DensityPiece piece;
        piece.from = rd.number(rd.field(p, "from", path), path + ".from", false);
        piece.to = rd.number(rd.field(p, "to", path), path + ".to", true);
        if (p.contains("density")) {
            const auto& d = p["density"];
            if (!d.is_array() || d.empty() || d.size() > 2)
                rd.fail(path + ".density", "expected [c0] or [c0, c1]");
            LinearDensity lin;
            lin.c0 = rd.number(d[0], path + ".density", false);
            if (d.size() == 2) lin.c1 = rd.number(d[1], path + ".density", false);
            piece.density = lin;
        } else if (p.contains("power")) {
            const auto& w = p["power"];
            const std::string wp = path + ".power";
            rd.only_keys(w, wp, {"coef", "center", "exponent"});
            PowerDensity pw;
            pw.coef = rd.number(rd.field(w, "coef", wp), wp + ".coef", false);
            pw.center = rd.number(rd.field(w, "center", wp), wp + ".center", false);
            pw.exponent = rd.number(rd.field(w, "exponent", wp), wp + ".exponent", false);
            piece.density = pw;
        } else {
            rd.fail(path, "piece needs 'density' or 'power'");
        }
        pieces.push_back(piece);
    }

    std::vector<Atom> atoms;
    if (doc.contains("atoms")) {
        const auto& ja = doc["atoms"];
        if (!ja.is_array()) rd.fail("atoms", "expected an array");
        for (std::size_t i = 0; i < ja.size(); ++i) {
            const std::string path = "atoms[" + std::to_string(i) + "]";
            rd.only_keys(ja[i], path, {"at", "mass"});
            Atom a;
            a.at = rd.number(rd.field(ja[i], "at", path), path + ".at", false);
            a.mass = rd.number(rd.field(ja[i], "mass", path), path + ".mass", false);
            if (i > 0 && a.at <= atoms.back().at)
                rd.fail(path, "atoms must be listed in increasing position");
            atoms.push_back(a);
        }
    }

    try {
        return SpeedMeasure(std::move(pieces), std::move(atoms), lprime, l);
    } catch (const InputError& e) {
        // Validation messages start with the element tag when one applies.
        static const std::regex tag(R"(^((pieces|atoms)\[\d+\]): (.*)$)");
        std::cmatch mt;
        const std::string msg = e.what();
        if (std::regex_match(msg.c_str(), mt, tag)) throw ParseError(rd.line_of(mt[1]), mt[1], mt[3]);
        if (msg.find("l'") != std::string::npos && msg.find("tile") != std::string::npos)
            throw ParseError(rd.line_of("lprime"), "lprime", msg);
        if (msg.rfind("l must", 0) == 0) throw ParseError(rd.line_of("l"), "l", msg);
        throw ParseError(rd.line_of("lprime"), "lprime", msg);
    }
}

SpeedMeasure load_measure(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open measure file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_measure(ss.str());
}

std::string serialize_measure(const SpeedMeasure& m) {
    std::ostringstream os;
    os << "{\n  \"pieces\": [\n";
    const auto& ps = m.pieces();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const auto& p = ps[i];
        os << "    {\"from\": " << fmt(p.from) << ", \"to\": " << fmt(p.to) << ", ";
        if (const auto* lin = std::get_if<LinearDensity>(&p.density))
            os << "\"density\": [" << fmt(lin->c0) << ", " << fmt(lin->c1) << "]}";
        else {
            const auto& pw = std::get<PowerDensity>(p.density);
            os << "\"power\": {\"coef\": " << fmt(pw.coef) << ", \"center\": " << fmt(pw.center)
               << ", \"exponent\": " << fmt(pw.exponent) << "}}";
        }
        os << (i + 1 < ps.size() ? ",\n" : "\n");
    }
    os << "  ],\n  \"atoms\": [";
    const auto& as = m.atoms();
    for (std::size_t i = 0; i < as.size(); ++i)
        os << (i ? ", " : "") << "{\"at\": " << fmt(as[i].at) << ", \"mass\": " << fmt(as[i].mass) << "}";
    os << "],\n  \"lprime\": " << fmt(m.lprime()) << ",\n  \"l\": " << fmt(m.l()) << "\n}\n";
    return os.str();
}

SpeedMeasure resolve_measure(const std::string& ref) {
    if (ref == "reflecting-bm") return measures::reflecting_bm();
    if (ref == "half-line-bm") return measures::half_line_bm();
    if (ref == "absorbed-bm") return measures::absorbed_bm();
    return load_measure(ref);
}

}  // namespace hdiff
