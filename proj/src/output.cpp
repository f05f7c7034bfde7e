#include "delaybounds/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "delaybounds/config.hpp"
#include "delaybounds/errors.hpp"

namespace dbounds {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const Metadata& meta,
                     const std::vector<std::string>& columns)
    : out_(out) {
    out_ << "# delaybounds version=" << kVersion;
    for (const auto& [k, v] : meta) out_ << ' ' << k << '=' << v;
    out_ << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_number(x)); }

CsvWriter& CsvWriter::cell(std::size_t v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    first_ = true;
}

void write_trajectory_csv(std::ostream& out, const Metadata& meta, const Trajectory& x) {
    std::vector<std::string> cols{"t"};
    for (std::size_t c = 0; c < x.dim(); ++c) cols.push_back("x" + std::to_string(c + 1));
    cols.push_back("norm");
    CsvWriter w(out, meta, cols);
    for (std::size_t i = 0; i < x.size(); ++i) {
        w.cell(x.node_time(i));
        for (double v : x.state(i)) w.cell(v);
        w.cell(x.node_norm(i));
        w.end_row();
    }
}

void write_cascade_csv(std::ostream& out, const Metadata& meta, const CascadeResult& res) {
    const Trajectory& YK = res.Y(res.K);
    std::vector<std::string> cols{"t"};
    for (std::size_t c = 0; c < YK.dim(); ++c) cols.push_back("Y" + std::to_string(c + 1));
    cols.push_back("norm_Y");
    for (std::size_t k = 1; k <= res.K; ++k) cols.push_back("norm_y" + std::to_string(k));
    CsvWriter w(out, meta, cols);
    for (std::size_t i = 0; i < YK.size(); ++i) {
        w.cell(YK.node_time(i));
        for (double v : YK.state(i)) w.cell(v);
        w.cell(YK.node_norm(i));
        for (std::size_t k = 1; k <= res.K; ++k) w.cell(res.y(k).node_norm(i));
        w.end_row();
    }
}

void write_bounds_csv(std::ostream& out, const Metadata& meta, const BoundTrace& trace) {
    std::vector<std::string> cols{"t", "lower", "upper", "Z", "norm_Y"};
    if (trace.reference) cols.push_back("reference");
    CsvWriter w(out, meta, cols);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        w.cell(trace.t[i]).cell(trace.lower[i]).cell(trace.upper[i]).cell(trace.Z[i]);
        w.cell(trace.absY[i]);
        if (trace.reference) w.cell((*trace.reference)[i]);
        w.end_row();
    }
}

void write_boundary_csv(std::ostream& out, const Metadata& meta, const BoundaryEstimate& est) {
    CsvWriter w(out, meta,
                {"index", "theta1", "theta2", "rho", "status", "evaluations", "phi_s1", "phi_s2"});
    for (std::size_t i = 0; i < est.radial.size(); ++i) {
        const auto& r = est.radial[i];
        const double theta1 = est.theta[i].first;
        const double r1 = r.radius * est.grid.w1;
        w.cell(i).cell(theta1).cell(est.theta[i].second).cell(r.radius);
        w.cell(to_string(r.status)).cell(r.evaluations);
        w.cell(r1 * std::cos(theta1)).cell(r1 * std::sin(theta1));
        w.end_row();
    }
}

void write_projection_csv(std::ostream& out, const Metadata& meta, const BoundaryEstimate& est) {
    CsvWriter w(out, meta, {"index", "theta1", "radius", "phi_s1", "phi_s2", "status"});
    for (std::size_t i = 0; i < est.projection.size(); ++i) {
        const auto& p = est.projection[i];
        w.cell(i).cell(p.theta1).cell(p.radius).cell(p.x).cell(p.y).cell(to_string(p.status));
        w.end_row();
    }
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(line);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw ConfigError("CSV has no column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& name) const {
    const std::string& s = rows.at(row).at(column(name));
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("CSV cell '" + s + "' in column '" + name + "' is not a number");
    }
    return v;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# delaybounds", 0) != 0) {
        throw ConfigError(path + ": line 1: missing '# delaybounds' metadata header");
    }
    for (const auto& tok : split(line.substr(2), ' ')) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) t.meta[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    if (!std::getline(in, line)) throw ConfigError(path + ": line 2: missing column header");
    t.columns = split(line, ',');
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != t.columns.size()) {
            throw ConfigError(path + ": line " + std::to_string(lineno) + ": expected " +
                              std::to_string(t.columns.size()) + " cells");
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

}  // namespace dbounds
