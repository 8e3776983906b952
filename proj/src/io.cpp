#include "pdgrid/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pdgrid/errors.hpp"
#include "pdgrid/tessellation.hpp"

namespace pdgrid {

namespace {

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Whitespace-separated tokens, one logical line at a time, with line numbers
// for diagnostics. Blank lines and '#' comments are skipped.
class LineReader {
public:
    LineReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

    bool next()
    {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            if (const auto hash = raw.find('#'); hash != std::string::npos) {
                raw.erase(hash);
            }
            tokens_.clear();
            std::istringstream ss(raw);
            for (std::string tok; ss >> tok;) {
                tokens_.push_back(tok);
            }
            if (!tokens_.empty()) {
                return true;
            }
        }
        tokens_.clear();
        return false;
    }

    void require()
    {
        if (!next()) {
            fail("unexpected end of file");
        }
    }

    const std::vector<std::string>& tokens() const { return tokens_; }
    std::size_t size() const { return tokens_.size(); }
    const std::string& operator[](std::size_t i) const { return tokens_[i]; }

    void expect_size(std::size_t n) const
    {
        if (tokens_.size() != n) {
            fail("expected " + std::to_string(n) + " fields, found "
                 + std::to_string(tokens_.size()));
        }
    }

    double real(std::size_t i) const
    {
        const std::string& s = tokens_[i];
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            fail("'" + s + "' is not a number");
        }
        if (used != s.size() || !std::isfinite(v)) {
            fail("'" + s + "' is not a finite number");
        }
        return v;
    }

    long long integer(std::size_t i) const
    {
        const std::string& s = tokens_[i];
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(s, &used);
        } catch (const std::exception&) {
            fail("'" + s + "' is not an integer");
        }
        if (used != s.size()) {
            fail("'" + s + "' is not an integer");
        }
        return v;
    }

    int count(std::size_t i) const
    {
        const long long v = integer(i);
        if (v < 0 || v > 100'000'000) {
            fail("count " + tokens_[i] + " out of range");
        }
        return static_cast<int>(v);
    }

    int index(std::size_t i, int limit) const
    {
        const long long v = integer(i);
        if (v < 0 || v >= limit) {
            fail("index " + tokens_[i] + " out of range [0, " + std::to_string(limit) + ")");
        }
        return static_cast<int>(v);
    }

    void keyword(std::size_t i, const std::string& word) const
    {
        if (tokens_[i] != word) {
            fail("expected '" + word + "', found '" + tokens_[i] + "'");
        }
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(name_, line_, what); }

private:
    std::istream& in_;
    std::string name_;
    int line_ = 0;
    std::vector<std::string> tokens_;
};

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path + "' for reading");
    }
    return in;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open '" + path + "' for writing");
    }
    return out;
}

void finish(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out) {
        throw Error("write to '" + path + "' failed");
    }
}

void header(LineReader& r, const std::string& magic)
{
    r.require();
    r.expect_size(2);
    r.keyword(0, magic);
    if (r.integer(1) != kMeshFormatVersion) {
        r.fail("unsupported format version " + r[1]);
    }
}

int section(LineReader& r, const std::string& word)
{
    r.require();
    r.expect_size(2);
    r.keyword(0, word);
    return r.count(1);
}

TriMesh build_mesh(std::vector<WeightedVertex> vertices,
                   const std::vector<std::array<int, 3>>& tris,
                   const std::vector<std::pair<int, int>>& constrained, const std::string& name)
{
    try {
        return TriMesh::from_triangles(std::move(vertices), tris, constrained);
    } catch (const GeometryError& e) {
        throw ValidationError(name + ": " + e.what());
    }
}

} // namespace

// --- mesh --------------------------------------------------------------------

void write_mesh(std::ostream& out, const TriMesh& mesh)
{
    std::vector<int> id(mesh.vertex_slots(), -1);
    int nv = 0;
    for (int i = 0; i < mesh.vertex_slots(); ++i) {
        if (mesh.vertex_alive(i)) {
            id[i] = nv++;
        }
    }
    out << "pdgrid-mesh " << kMeshFormatVersion << '\n';
    out << "vertices " << nv << '\n';
    for (int i = 0; i < mesh.vertex_slots(); ++i) {
        if (id[i] >= 0) {
            const auto& v = mesh.vertex(i);
            out << id[i] << ' ' << num(v.pos.x) << ' ' << num(v.pos.y) << ' ' << num(v.weight)
                << ' ' << (v.fixed ? 1 : 0) << '\n';
        }
    }
    out << "triangles " << mesh.triangle_count() << '\n';
    int nt = 0;
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (mesh.triangle_alive(t)) {
            const auto& v = mesh.triangle(t).v;
            out << nt++ << ' ' << id[v[0]] << ' ' << id[v[1]] << ' ' << id[v[2]] << '\n';
        }
    }
    std::vector<std::pair<int, int>> cons;
    for (const auto& [a, b] : mesh.constrained_edges()) {
        cons.emplace_back(std::min(id[a], id[b]), std::max(id[a], id[b]));
    }
    std::sort(cons.begin(), cons.end());
    out << "constrained " << cons.size() << '\n';
    for (const auto& [a, b] : cons) {
        out << a << ' ' << b << '\n';
    }
}

TriMesh read_mesh(std::istream& in, const std::string& name)
{
    LineReader r(in, name);
    header(r, "pdgrid-mesh");
    const int nv = section(r, "vertices");
    std::vector<WeightedVertex> vertices(nv);
    for (int i = 0; i < nv; ++i) {
        r.require();
        r.expect_size(5);
        if (r.integer(0) != i) {
            r.fail("vertex ids must be dense and ascending; expected " + std::to_string(i));
        }
        const long long fixed = r.integer(4);
        if (fixed != 0 && fixed != 1) {
            r.fail("fixed flag must be 0 or 1");
        }
        vertices[i] = {{r.real(1), r.real(2)}, r.real(3), fixed == 1};
    }
    const int nt = section(r, "triangles");
    std::vector<std::array<int, 3>> tris(nt);
    for (int t = 0; t < nt; ++t) {
        r.require();
        r.expect_size(4);
        if (r.integer(0) != t) {
            r.fail("triangle ids must be dense and ascending; expected " + std::to_string(t));
        }
        tris[t] = {r.index(1, nv), r.index(2, nv), r.index(3, nv)};
    }
    const int nc = section(r, "constrained");
    std::vector<std::pair<int, int>> cons(nc);
    for (int c = 0; c < nc; ++c) {
        r.require();
        r.expect_size(2);
        cons[c] = {r.index(0, nv), r.index(1, nv)};
    }
    if (r.next()) {
        r.fail("trailing content after the constrained-edge table");
    }
    TriMesh mesh = build_mesh(std::move(vertices), tris, cons, name);
    for (int i = 0; i < nv; ++i) {
        if (!mesh.vertex_alive(i)) {
            throw ValidationError(name + ": vertex " + std::to_string(i)
                                  + " is not used by any triangle");
        }
    }
    return mesh;
}

void save_mesh(const std::string& path, const TriMesh& mesh)
{
    auto out = open_out(path);
    write_mesh(out, mesh);
    finish(out, path);
}

TriMesh load_mesh(const std::string& path)
{
    auto in = open_in(path);
    return read_mesh(in, path);
}

// --- PSLG --------------------------------------------------------------------

Pslg read_pslg(std::istream& in, const std::string& name)
{
    LineReader r(in, name);
    header(r, "pdgrid-pslg");
    Pslg p;
    const int np = section(r, "points");
    p.points.resize(np);
    for (int i = 0; i < np; ++i) {
        r.require();
        r.expect_size(2);
        p.points[i] = {r.real(0), r.real(1)};
    }
    const int ns = section(r, "segments");
    p.segments.resize(ns);
    for (int s = 0; s < ns; ++s) {
        r.require();
        r.expect_size(2);
        p.segments[s] = {r.index(0, np), r.index(1, np)};
    }
    if (r.next()) {
        r.fail("trailing content after the segment table");
    }
    try {
        p.validate();
    } catch (const GeometryError& e) {
        throw GeometryError(name + ": " + e.what());
    }
    return p;
}

Pslg load_pslg(const std::string& path)
{
    auto in = open_in(path);
    return read_pslg(in, path);
}

void write_pslg(std::ostream& out, const Pslg& pslg)
{
    out << "pdgrid-pslg " << kMeshFormatVersion << '\n';
    out << "points " << pslg.points.size() << '\n';
    for (const Point2 p : pslg.points) {
        out << num(p.x) << ' ' << num(p.y) << '\n';
    }
    out << "segments " << pslg.segments.size() << '\n';
    for (const auto& [a, b] : pslg.segments) {
        out << a << ' ' << b << '\n';
    }
}

void save_pslg(const std::string& path, const Pslg& pslg)
{
    auto out = open_out(path);
    write_pslg(out, pslg);
    finish(out, path);
}

// --- raster ------------------------------------------------------------------

Raster read_raster(std::istream& in, const std::string& name)
{
    LineReader r(in, name);
    int ncols = -1;
    int nrows = -1;
    std::optional<double> x0, y0, cell, nodata;
    std::vector<double> values;
    while (r.next()) {
        std::string key = r[0];
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        const bool is_key = !key.empty() && std::isalpha(static_cast<unsigned char>(key[0]));
        if (!is_key) {
            if (ncols <= 0 || nrows <= 0 || !x0 || !y0 || !cell) {
                r.fail("raster values before a complete header "
                       "(ncols, nrows, xllcorner, yllcorner, cellsize)");
            }
            if (static_cast<int>(r.size()) != ncols) {
                r.fail("expected " + std::to_string(ncols) + " values per row, found "
                       + std::to_string(r.size()));
            }
            for (std::size_t i = 0; i < r.size(); ++i) {
                const double v = r.real(i);
                if (nodata && v == *nodata) {
                    r.fail("NODATA value inside the raster");
                }
                values.push_back(v);
            }
            continue;
        }
        if (!values.empty()) {
            r.fail("header key '" + r[0] + "' after raster values");
        }
        r.expect_size(2);
        if (key == "ncols") {
            ncols = r.count(1);
        } else if (key == "nrows") {
            nrows = r.count(1);
        } else if (key == "xllcorner" || key == "xllcenter") {
            x0 = r.real(1);
        } else if (key == "yllcorner" || key == "yllcenter") {
            y0 = r.real(1);
        } else if (key == "cellsize") {
            cell = r.real(1);
            if (!(*cell > 0.0)) {
                r.fail("cellsize must be positive");
            }
        } else if (key == "nodata_value") {
            nodata = r.real(1);
        } else {
            r.fail("unknown header key '" + r[0] + "'");
        }
    }
    if (ncols < 2 || nrows < 2 || !x0 || !y0 || !cell) {
        throw ParseError(name, 0, "incomplete raster header (need ncols, nrows >= 2, "
                                  "xllcorner, yllcorner, cellsize)");
    }
    if (values.size() != static_cast<std::size_t>(ncols) * nrows) {
        throw ParseError(name, 0, "expected " + std::to_string(nrows) + " rows of values, found "
                                      + std::to_string(values.size() / ncols));
    }
    Raster out(ncols, nrows, {*x0, *y0}, *cell);
    for (int row = 0; row < nrows; ++row) {
        for (int c = 0; c < ncols; ++c) {
            out.at(c, nrows - 1 - row) = values[static_cast<std::size_t>(row) * ncols + c];
        }
    }
    return out;
}

Raster load_raster(const std::string& path)
{
    auto in = open_in(path);
    return read_raster(in, path);
}

void write_raster(std::ostream& out, const Raster& r)
{
    out << "ncols " << r.ncols << '\n';
    out << "nrows " << r.nrows << '\n';
    out << "xllcorner " << num(r.origin.x) << '\n';
    out << "yllcorner " << num(r.origin.y) << '\n';
    out << "cellsize " << num(r.cell) << '\n';
    for (int row = r.nrows - 1; row >= 0; --row) {
        for (int c = 0; c < r.ncols; ++c) {
            out << (c ? " " : "") << num(r.at(c, row));
        }
        out << '\n';
    }
}

void save_raster(const std::string& path, const Raster& r)
{
    auto out = open_out(path);
    write_raster(out, r);
    finish(out, path);
}

// --- Triangle-style files ----------------------------------------------------

void save_triangle_files(const std::string& base, const TriMesh& mesh)
{
    std::vector<int> id(mesh.vertex_slots(), -1);
    int nv = 0;
    for (int i = 0; i < mesh.vertex_slots(); ++i) {
        if (mesh.vertex_alive(i)) {
            id[i] = nv++;
        }
    }
    {
        const std::string path = base + ".node";
        auto out = open_out(path);
        out << nv << " 2 1 1\n";
        for (int i = 0; i < mesh.vertex_slots(); ++i) {
            if (id[i] >= 0) {
                const auto& v = mesh.vertex(i);
                out << id[i] << ' ' << num(v.pos.x) << ' ' << num(v.pos.y) << ' '
                    << num(v.weight) << ' ' << (v.fixed ? 1 : 0) << '\n';
            }
        }
        finish(out, path);
    }
    {
        const std::string path = base + ".ele";
        auto out = open_out(path);
        out << mesh.triangle_count() << " 3 0\n";
        int nt = 0;
        for (int t = 0; t < mesh.triangle_slots(); ++t) {
            if (mesh.triangle_alive(t)) {
                const auto& v = mesh.triangle(t).v;
                out << nt++ << ' ' << id[v[0]] << ' ' << id[v[1]] << ' ' << id[v[2]] << '\n';
            }
        }
        finish(out, path);
    }
    {
        const std::string path = base + ".edge";
        auto out = open_out(path);
        std::vector<std::pair<int, int>> cons;
        for (const auto& [a, b] : mesh.constrained_edges()) {
            cons.emplace_back(std::min(id[a], id[b]), std::max(id[a], id[b]));
        }
        std::sort(cons.begin(), cons.end());
        out << cons.size() << " 1\n";
        for (std::size_t e = 0; e < cons.size(); ++e) {
            out << e << ' ' << cons[e].first << ' ' << cons[e].second << " 1\n";
        }
        finish(out, path);
    }
}

TriMesh load_triangle_files(const std::string& base)
{
    std::vector<WeightedVertex> vertices;
    int first = 0;
    {
        const std::string path = base + ".node";
        auto in = open_in(path);
        LineReader r(in, path);
        r.require();
        if (r.size() < 2) {
            r.fail("node header needs at least <count> <dim>");
        }
        const int nv = r.count(0);
        if (r.integer(1) != 2) {
            r.fail("only two-dimensional nodes are supported");
        }
        const int nattr = r.size() > 2 ? r.count(2) : 0;
        const int nmark = r.size() > 3 ? r.count(3) : 0;
        vertices.resize(nv);
        for (int i = 0; i < nv; ++i) {
            r.require();
            r.expect_size(3 + nattr + (nmark > 0 ? 1 : 0));
            const long long idv = r.integer(0);
            if (i == 0) {
                if (idv != 0 && idv != 1) {
                    r.fail("node numbering must start at 0 or 1");
                }
                first = static_cast<int>(idv);
            }
            if (idv != i + first) {
                r.fail("node ids must be consecutive");
            }
            WeightedVertex v{{r.real(1), r.real(2)}, 0.0, false};
            if (nattr > 0) {
                v.weight = r.real(3);
            }
            if (nmark > 0) {
                v.fixed = r.integer(3 + nattr) != 0;
            }
            vertices[i] = v;
        }
    }
    const int nv = static_cast<int>(vertices.size());
    std::vector<std::array<int, 3>> tris;
    {
        const std::string path = base + ".ele";
        auto in = open_in(path);
        LineReader r(in, path);
        r.require();
        const int nt = r.count(0);
        if (r.size() > 1 && r.integer(1) != 3) {
            r.fail("only linear triangles are supported");
        }
        const int nattr = r.size() > 2 ? r.count(2) : 0;
        tris.resize(nt);
        for (int t = 0; t < nt; ++t) {
            r.require();
            r.expect_size(4 + nattr);
            for (int k = 0; k < 3; ++k) {
                const long long v = r.integer(1 + k) - first;
                if (v < 0 || v >= nv) {
                    r.fail("node index " + r[1 + k] + " out of range");
                }
                tris[t][k] = static_cast<int>(v);
            }
        }
    }
    std::vector<std::pair<int, int>> cons;
    const std::string edge_path = base + ".edge";
    if (std::filesystem::exists(edge_path)) {
        auto in = open_in(edge_path);
        LineReader r(in, edge_path);
        r.require();
        const int ne = r.count(0);
        for (int e = 0; e < ne; ++e) {
            r.require();
            if (r.size() < 3) {
                r.fail("edge rows need <id> <i> <j>");
            }
            const long long a = r.integer(1) - first;
            const long long b = r.integer(2) - first;
            if (a < 0 || a >= nv || b < 0 || b >= nv) {
                r.fail("edge endpoint out of range");
            }
            cons.emplace_back(static_cast<int>(a), static_cast<int>(b));
        }
    }
    return build_mesh(std::move(vertices), tris, cons, base);
}

// --- CSV / summary -----------------------------------------------------------

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace)
{
    out << "iteration,vertices,triangles,min_qt,mean_qt,min_qd,mean_qd,bad,"
           "vertex_accepted,weight_accepted,flips,collapsed,refined\n";
    for (const auto& r : trace) {
        out << r.iteration << ',' << r.vertices << ',' << r.triangles << ',' << num(r.min_qt)
            << ',' << num(r.mean_qt) << ',' << num(r.min_qd) << ',' << num(r.mean_qd) << ','
            << r.bad << ',' << r.vertex_accepted << ',' << r.weight_accepted << ',' << r.flips
            << ',' << r.collapsed << ',' << r.refined << '\n';
    }
}

void write_report_csv(std::ostream& out, const QualityReport& rep)
{
    auto opt = [](double v) { return std::isnan(v) ? std::string() : num(v); };
    out << "kind,id,i,j,q_tri,q_dual,angle_min,angle_max,poorly_staggered,h_rel,w_rel\n";
    for (std::size_t n = 0; n < rep.tri_id.size(); ++n) {
        out << "triangle," << rep.tri_id[n] << ",,," << num(rep.q_tri[n]) << ','
            << num(rep.q_dual[n]) << ',' << num(rep.angle_min[n]) << ','
            << num(rep.angle_max[n]) << ',' << (rep.poorly_staggered[n] ? 1 : 0) << ",,\n";
    }
    for (std::size_t n = 0; n < rep.edge_vertices.size(); ++n) {
        out << "edge," << n << ',' << rep.edge_vertices[n].first << ','
            << rep.edge_vertices[n].second << ",,,,,," << opt(rep.h_rel[n]) << ",\n";
    }
    for (std::size_t n = 0; n < rep.vertex_id.size(); ++n) {
        out << "vertex," << rep.vertex_id[n] << ",,,,,,,,," << opt(rep.w_rel[n]) << '\n';
    }
}

void write_report_summary(std::ostream& out, const QualityReport& rep)
{
    char line[160];
    auto row = [&](const char* label, const Stat& s) {
        std::snprintf(line, sizeof line, "%-10s %10.4f %10.4f %10.4f\n", label, s.min, s.mean,
                      s.max);
        out << line;
    };
    std::snprintf(line, sizeof line, "vertices   %d\ntriangles  %d\nedges      %d\n",
                  rep.vertices, rep.triangles, rep.edges);
    out << line;
    std::snprintf(line, sizeof line, "%-10s %10s %10s %10s\n", "metric", "min", "mean", "max");
    out << line;
    row("Q^T", rep.qt);
    row("Q^D", rep.qd);
    row("theta", rep.angle);
    row("h_r", rep.hr);
    row("W_r", rep.wr);
    std::snprintf(line, sizeof line, "sigma_theta %.4f\nsigma_h    %.4f\n", rep.sigma_theta,
                  rep.sigma_h);
    out << line;
    const double pct = rep.triangles > 0 ? 100.0 * rep.bad / rep.triangles : 0.0;
    std::snprintf(line, sizeof line, "poorly staggered %d (%.4f%%)\n", rep.bad, pct);
    out << line;
}

// --- SVG ---------------------------------------------------------------------

std::string diverging_colour(double t)
{
    if (!std::isfinite(t)) {
        return "#bbbbbb";
    }
    t = std::clamp(t, -1.0, 1.0);
    // white -> blue for negative, white -> orange for positive
    const std::array<double, 3> blue{33, 102, 172};
    const std::array<double, 3> orange{230, 97, 1};
    const auto& end = t < 0.0 ? blue : orange;
    const double s = std::abs(t);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(255.0 + s * (end[0] - 255.0))),
                  static_cast<int>(std::lround(255.0 + s * (end[1] - 255.0))),
                  static_cast<int>(std::lround(255.0 + s * (end[2] - 255.0))));
    return buf;
}

void write_svg(std::ostream& out, const TriMesh& mesh, const SvgOptions& opt)
{
    Point2 lo{1e300, 1e300};
    Point2 hi{-1e300, -1e300};
    for (int i = 0; i < mesh.vertex_slots(); ++i) {
        if (mesh.vertex_alive(i)) {
            lo = {std::min(lo.x, mesh.pos(i).x), std::min(lo.y, mesh.pos(i).y)};
            hi = {std::max(hi.x, mesh.pos(i).x), std::max(hi.y, mesh.pos(i).y)};
        }
    }
    if (!(hi.x > lo.x) || !(hi.y > lo.y)) {
        throw ValidationError("render: mesh has no extent");
    }
    const double margin = 10.0;
    const double scale = (opt.width - 2.0 * margin) / (hi.x - lo.x);
    const double height = (hi.y - lo.y) * scale + 2.0 * margin;
    char buf[64];
    auto xy = [&](Point2 p) {
        std::snprintf(buf, sizeof buf, "%.3f,%.3f", margin + (p.x - lo.x) * scale,
                      height - margin - (p.y - lo.y) * scale);
        return std::string(buf);
    };

    const PowerDual dual = build_dual(mesh);
    std::vector<double> wr(mesh.vertex_slots(), std::nan(""));
    double wmax = 0.0;
    for (int i = 0; i < mesh.vertex_slots(); ++i) {
        if (mesh.vertex_alive(i) && dual.cells[i].area > 0.0) {
            wr[i] = mesh.vertex(i).weight / dual.cells[i].area;
            wmax = std::max(wmax, std::abs(wr[i]));
        }
    }

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(opt.width)
        << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(opt.width) << ' '
        << num(height) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<g id=\"cells\" stroke=\"none\">\n";
    for (int i = 0; i < mesh.vertex_slots(); ++i) {
        if (!mesh.vertex_alive(i)) {
            continue;
        }
        const double t = wmax > 0.0 ? wr[i] / wmax : 0.0;
        out << "<polygon class=\"cell\" data-vertex=\"" << i << "\" fill=\""
            << diverging_colour(std::isnan(wr[i]) ? 0.0 : t) << "\" points=\"";
        const auto& poly = dual.cells[i].polygon;
        for (std::size_t k = 0; k < poly.size(); ++k) {
            out << (k ? " " : "") << xy(poly[k]);
        }
        out << "\"/>\n";
    }
    out << "</g>\n";
    if (opt.primal) {
        out << "<path id=\"primal\" fill=\"none\" stroke=\"#444444\" stroke-width=\"0.6\" d=\"";
        for (const EdgeRef e : mesh.edges()) {
            const auto [a, b] = mesh.edge_vertices(e);
            out << 'M' << xy(mesh.pos(a)) << 'L' << xy(mesh.pos(b));
        }
        out << "\"/>\n";
    }
    if (opt.dual) {
        out << "<path id=\"dual\" fill=\"none\" stroke=\"#000000\" stroke-width=\"0.9\" d=\"";
        for (const DualEdge& e : dual.edges) {
            out << 'M' << xy(e.from) << 'L' << xy(e.to);
        }
        out << "\"/>\n";
    }
    out << "<path id=\"poorly-staggered\" fill=\"none\" stroke=\"#d7191c\" "
           "stroke-width=\"1.5\" d=\"";
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (mesh.triangle_alive(t) && !is_well_centred(mesh, t)) {
            const auto c = mesh.corners(t);
            out << 'M' << xy(c[0]) << 'L' << xy(c[1]) << 'L' << xy(c[2]) << 'Z';
        }
    }
    out << "\"/>\n";
    out << "</svg>\n";
}

// --- run configuration -------------------------------------------------------

void RunConfig::validate() const
{
    if (geometry.empty() && mesh.empty()) {
        throw ValidationError("config: either 'geometry' or 'mesh' is required");
    }
    for (const std::string* p : {&geometry, &mesh, &spacing.path}) {
        if (!p->empty() && !std::filesystem::exists(*p)) {
            throw ValidationError("config: file '" + *p + "' does not exist");
        }
    }
    if (spacing.kind == "constant") {
        if (!(spacing.h > 0.0)) {
            throw ValidationError("config: constant spacing needs h > 0");
        }
    } else if (spacing.kind == "raster" || spacing.kind == "depth") {
        if (spacing.path.empty()) {
            throw ValidationError("config: " + spacing.kind + " spacing needs a 'path'");
        }
        if (spacing.kind == "depth") {
            const auto& d = spacing.depth;
            if (!(d.beta > 0.0) || !(d.g_accel > 0.0) || !(d.h_min > 0.0) || !(d.h_max >= d.h_min)) {
                throw ValidationError(
                    "config: depth spacing needs beta > 0, g_accel > 0, 0 < h_min <= h_max");
            }
        }
    } else {
        throw ValidationError("config: unknown spacing kind '" + spacing.kind
                              + "' (constant, raster, depth)");
    }
    if (spacing.limit_g && !(*spacing.limit_g > 0.0)) {
        throw ValidationError("config: limiter g must be positive");
    }
    if (out_mesh.empty()) {
        throw ValidationError("config: output.mesh is required");
    }
    schedule.validate();
}

RunConfig parse_run_config(const std::string& json_text, const std::string& name,
                           const std::string& base_dir)
{
    using nlohmann::json;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        const auto end = json_text.begin()
            + static_cast<std::ptrdiff_t>(std::min(e.byte, json_text.size()));
        const int line = 1 + static_cast<int>(std::count(json_text.begin(), end, '\n'));
        throw ParseError(name, line, e.what());
    }
    auto resolve = [&](const std::string& p) {
        if (p.empty() || base_dir.empty() || std::filesystem::path(p).is_absolute()) {
            return p;
        }
        return (std::filesystem::path(base_dir) / p).string();
    };
    RunConfig cfg;
    try {
        cfg.geometry = resolve(j.value("geometry", std::string()));
        cfg.mesh = resolve(j.value("mesh", std::string()));
        if (j.contains("spacing")) {
            const json& s = j.at("spacing");
            cfg.spacing.kind = s.value("kind", std::string("constant"));
            cfg.spacing.h = s.value("h", 0.0);
            cfg.spacing.path = resolve(s.value("path", std::string()));
            if (s.contains("g")) {
                cfg.spacing.limit_g = s.at("g").get<double>();
            }
            if (cfg.spacing.kind == "depth") {
                if (!s.contains("beta")) {
                    throw ValidationError(name + ": depth spacing requires 'beta' (no default)");
                }
                cfg.spacing.depth.beta = s.at("beta").get<double>();
                cfg.spacing.depth.g_accel = s.value("g_accel", cfg.spacing.depth.g_accel);
                cfg.spacing.depth.h_min = s.value("h_min", 0.0);
                cfg.spacing.depth.h_max = s.value("h_max", 0.0);
            }
        }
        if (j.contains("schedule")) {
            const json& s = j.at("schedule");
            auto& sc = cfg.schedule;
            sc.outer = s.value("outer", sc.outer);
            sc.inner = s.value("inner", sc.inner);
            sc.seed = s.value("seed", sc.seed);
            sc.mode = parse_mode(s.value("mode", to_string(sc.mode)));
            sc.early_stop = s.value("early_stop", sc.early_stop);
        }
        if (j.contains("metrics")) {
            const json& m = j.at("metrics");
            cfg.schedule.params.beta_f = m.value("beta_f", cfg.schedule.params.beta_f);
            cfg.schedule.params.beta_e = m.value("beta_e", 1.0 - cfg.schedule.params.beta_f);
        }
        if (j.contains("output")) {
            const json& o = j.at("output");
            cfg.out_mesh = resolve(o.value("mesh", std::string()));
            cfg.out_trace = resolve(o.value("trace", std::string()));
            cfg.out_report = resolve(o.value("report", std::string()));
            cfg.out_svg = resolve(o.value("svg", std::string()));
        }
    } catch (const json::exception& e) {
        throw ValidationError(name + ": " + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path)
{
    auto in = open_in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path, std::filesystem::path(path).parent_path().string());
}

SpacingField make_spacing(const SpacingConfig& cfg)
{
    LimiterConfig lim;
    if (cfg.limit_g) {
        lim.g = *cfg.limit_g;
    }
    if (cfg.kind == "constant") {
        return SpacingField::constant(cfg.h);
    }
    const Raster r = load_raster(cfg.path);
    if (cfg.kind == "raster") {
        return SpacingField::raster(cfg.limit_g ? gradient_limit(r, lim) : r);
    }
    if (cfg.kind == "depth") {
        return SpacingField::depth_derived(r, cfg.depth, lim);
    }
    throw ValidationError("unknown spacing kind '" + cfg.kind + "'");
}

} // namespace pdgrid
