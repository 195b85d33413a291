#pragma once

#include "overlinkd/dynamics/dynamics.hpp"
#include "overlinkd/io/json.hpp"
#include "overlinkd/kinematics/motion.hpp"

#include <charconv>
#include <cstdio>

namespace overlinkd::io {

/// Shortest text that reads back to the same double.
inline std::string format_number(double v)
{
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline const std::vector<std::string>& trace_columns()
{
    static const std::vector<std::string> c{"t", "q", "theta2", "ee_x", "ee_y", "ee_z"};
    return c;
}

inline const std::vector<std::string>& dynamics_columns()
{
    static const std::vector<std::string> c{"t", "q", "tau", "power", "energy", "singular"};
    return c;
}

inline std::string join_header(const std::vector<std::string>& cols)
{
    std::string s;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        s += (i ? "," : "") + cols[i];
    }
    return s + "\n";
}

/// t in s, q and theta2 in rad, end-effector in mm.
inline std::string trace_csv(const kinematics::MotionTrace& tr)
{
    std::string s = join_header(trace_columns());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const Vec3& p = tr.ee_points[i];
        s += format_number(tr.times[i]) + "," + format_number(tr.q[i]) + "," + format_number(tr.theta2[i]) + "," +
             format_number(p.x()) + "," + format_number(p.y()) + "," + format_number(p.z()) + "\n";
    }
    return s;
}

/// τ in N·mm, power in W, cumulative energy in J; singular is 0 or 1.
inline std::string dynamics_csv(const dynamics::EnergyProfile& prof)
{
    std::string s = join_header(dynamics_columns());
    for (const auto& e : prof.samples) {
        s += format_number(e.t) + "," + format_number(e.q) + "," + format_number(e.torque) + "," +
             format_number(e.power) + "," + format_number(e.energy) + "," + (e.singular ? "1" : "0") + "\n";
    }
    return s;
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) {
                return i;
            }
        }
        throw InputError("CSV has no column '" + name + "'");
    }
};

inline CsvTable parse_csv(const std::string& text, const std::string& what = "csv")
{
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream s(l);
        while (std::getline(s, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
                cell.pop_back();
            }
            out.push_back(cell);
        }
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") {
            continue;
        }
        auto cells = split(line);
        if (t.columns.empty()) {
            t.columns = cells;
            continue;
        }
        if (cells.size() != t.columns.size()) {
            throw InputError(what + ": line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                             " fields, expected " + std::to_string(t.columns.size()));
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            double v = 0.0;
            auto r = std::from_chars(c.data(), c.data() + c.size(), v);
            if (r.ec != std::errc() || r.ptr != c.data() + c.size()) {
                throw InputError(what + ": line " + std::to_string(lineno) + ": '" + c + "' is not a number");
            }
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.columns.empty()) {
        throw InputError(what + ": empty CSV");
    }
    return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path), path.string()); }

/// End-effector points of a trace CSV.
inline std::vector<Vec3> trace_points(const CsvTable& t)
{
    std::size_t x = t.column("ee_x"), y = t.column("ee_y"), z = t.column("ee_z");
    std::vector<Vec3> pts;
    for (const auto& r : t.rows) {
        pts.emplace_back(r[x], r[y], r[z]);
    }
    return pts;
}

} // namespace overlinkd::io
