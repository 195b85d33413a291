#pragma once

#include "overlinkd/geometry/design.hpp"
#include "overlinkd/io/csv.hpp"

#include <array>

namespace overlinkd::io {

inline constexpr std::size_t kTubeSides = 16;

struct MeshGroup {
    std::string name;
    std::size_t first_vertex = 0, vertex_count = 0;
    std::size_t first_face = 0, face_count = 0;
};

/// Triangle mesh with zero-based vertex indices.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::size_t, 3>> faces;
    std::vector<MeshGroup> groups;
};

/// Vertices of one swept tube: a ring per particle plus two capped ends of
/// one ring copy and a centre each.
inline std::size_t tube_vertex_count(std::size_t particles) { return kTubeSides * particles + 2 * (kTubeSides + 1); }

/// Circular tube of radius r along a polyline. Rings are oriented by parallel
/// transport of the first normal, so consecutive rings do not twist.
inline void append_tube(TriMesh& mesh, const std::vector<Vec3>& pts, double r, const std::string& name)
{
    require(pts.size() >= 2, "append_tube: a tube needs at least two points");
    require(r > 0.0, "append_tube: radius must be positive");
    const std::size_t m = pts.size(), s = kTubeSides, base = mesh.vertices.size();
    MeshGroup group{name, base, 0, mesh.faces.size(), 0};

    auto tangent = [&](std::size_t i) {
        Vec3 t = pts[std::min(i + 1, m - 1)] - pts[i == 0 ? 0 : i - 1];
        return t.normalized();
    };
    Vec3 t = tangent(0);
    Vec3 helper = std::abs(t.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    Vec3 n = (helper - helper.dot(t) * t).normalized();
    std::vector<std::pair<Vec3, Vec3>> frames(m);
    for (std::size_t i = 0; i < m; ++i) {
        t = tangent(i);
        Vec3 proj = n - n.dot(t) * t;
        if (proj.norm() < 1e-9) {
            helper = std::abs(t.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
            proj = helper - helper.dot(t) * t;
        }
        n = proj.normalized();
        frames[i] = {n, t.cross(n)};
    }
    auto ring_point = [&](std::size_t i, std::size_t k) {
        double a = kTwoPi * static_cast<double>(k) / static_cast<double>(s);
        return Vec3(pts[i] + r * (std::cos(a) * frames[i].first + std::sin(a) * frames[i].second));
    };
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < s; ++k) {
            mesh.vertices.push_back(ring_point(i, k));
        }
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
        for (std::size_t k = 0; k < s; ++k) {
            std::size_t a = base + i * s + k, b = base + i * s + (k + 1) % s;
            std::size_t c = base + (i + 1) * s + (k + 1) % s, d = base + (i + 1) * s + k;
            mesh.faces.push_back({a, b, c});
            mesh.faces.push_back({a, c, d});
        }
    }
    // Caps get their own ring copy so each end is a flat disc.
    for (int end = 0; end < 2; ++end) {
        std::size_t i = end == 0 ? 0 : m - 1;
        std::size_t centre = mesh.vertices.size();
        mesh.vertices.push_back(pts[i]);
        for (std::size_t k = 0; k < s; ++k) {
            mesh.vertices.push_back(ring_point(i, k));
        }
        for (std::size_t k = 0; k < s; ++k) {
            std::size_t rk = centre + 1 + k, rn = centre + 1 + (k + 1) % s;
            if (end == 0) {
                mesh.faces.push_back({centre, rn, rk});
            } else {
                mesh.faces.push_back({centre, rk, rn});
            }
        }
    }
    group.vertex_count = mesh.vertices.size() - base;
    group.face_count = mesh.faces.size() - group.first_face;
    mesh.groups.push_back(group);
}

/// One tube group per link, named link_0, link_1, ...
inline TriMesh geometry_mesh(const geometry::GeometryDesign& g)
{
    TriMesh mesh;
    for (std::size_t k = 0; k < g.chains.size(); ++k) {
        append_tube(mesh, g.chains[k].particles, g.chains[k].radius, "link_" + std::to_string(k));
    }
    return mesh;
}

inline std::string obj_text(const TriMesh& mesh)
{
    std::string s = "# overlinkd tube mesh, units mm\n";
    for (const auto& grp : mesh.groups) {
        s += "g " + grp.name + "\n";
        for (std::size_t v = grp.first_vertex; v < grp.first_vertex + grp.vertex_count; ++v) {
            const Vec3& p = mesh.vertices[v];
            s += "v " + format_number(p.x()) + " " + format_number(p.y()) + " " + format_number(p.z()) + "\n";
        }
        for (std::size_t f = grp.first_face; f < grp.first_face + grp.face_count; ++f) {
            const auto& t = mesh.faces[f];
            s += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
        }
    }
    return s;
}

/// Reads the subset written by obj_text: v, f (triangles, optional /vt/vn
/// suffixes), g and o; other records are ignored.
inline TriMesh parse_obj(const std::string& text, const std::string& what = "obj")
{
    TriMesh mesh;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto close_group = [&]() {
        if (!mesh.groups.empty()) {
            auto& g = mesh.groups.back();
            g.vertex_count = mesh.vertices.size() - g.first_vertex;
            g.face_count = mesh.faces.size() - g.first_face;
        }
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') {
            continue;
        }
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z())) {
                throw InputError(what + ": bad vertex on line " + std::to_string(lineno));
            }
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            std::array<std::size_t, 3> f{};
            for (auto& idx : f) {
                std::string tok;
                if (!(ls >> tok)) {
                    throw InputError(what + ": face with fewer than 3 vertices on line " + std::to_string(lineno));
                }
                long v = std::stol(tok.substr(0, tok.find('/')));
                if (v < 1 || static_cast<std::size_t>(v) > mesh.vertices.size()) {
                    throw InputError(what + ": face index out of range on line " + std::to_string(lineno));
                }
                idx = static_cast<std::size_t>(v - 1);
            }
            mesh.faces.push_back(f);
        } else if (tag == "g" || tag == "o") {
            close_group();
            std::string name;
            ls >> name;
            mesh.groups.push_back({name, mesh.vertices.size(), 0, mesh.faces.size(), 0});
        }
    }
    close_group();
    return mesh;
}

inline TriMesh read_obj(const std::filesystem::path& path) { return parse_obj(read_text(path), path.string()); }

/// Polyline of points as OBJ line elements, for plotting an end-effector path.
inline std::string obj_polyline(const std::vector<Vec3>& pts, const std::string& name, bool closed)
{
    std::string s = "# overlinkd polyline, units mm\ng " + name + "\n";
    for (const auto& p : pts) {
        s += "v " + format_number(p.x()) + " " + format_number(p.y()) + " " + format_number(p.z()) + "\n";
    }
    s += "l";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        s += " " + std::to_string(i + 1);
    }
    if (closed && !pts.empty()) {
        s += " 1";
    }
    return s + "\n";
}

} // namespace overlinkd::io
