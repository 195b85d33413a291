#pragma once

#include "overlinkd/core/se3.hpp"
#include "overlinkd/core/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace overlinkd::io {

using Json = nlohmann::ordered_json;

/// Missing, unreadable or malformed input. The CLI maps it to exit code 2.
class InputError : public Error {
public:
    explicit InputError(const std::string& what)
        : Error(what)
    {
    }
};

/// Unit policy written into every JSON file.
inline Json geometry_units() { return Json{{"length", "mm"}, {"angle", "rad"}}; }

inline Json dynamics_units()
{
    return Json{{"length", "mm"}, {"angle", "rad"}, {"time", "s"},     {"force", "N"},   {"moment", "N*mm"},
                {"torque", "N*mm"}, {"energy", "J"}, {"power", "W"}, {"mass", "kg"}, {"distance", "m"}};
}

/// Accepts files without a units block; a block that is present must use
/// millimeters and radians.
inline void check_units(const Json& j, const std::string& what)
{
    if (!j.is_object() || !j.contains("units")) {
        return;
    }
    const Json& u = j.at("units");
    if (!u.is_object()) {
        throw InputError(what + ": \"units\" must be an object");
    }
    if (u.contains("length") && u.at("length") != "mm") {
        throw InputError(what + ": lengths must be in mm");
    }
    if (u.contains("angle") && u.at("angle") != "rad") {
        throw InputError(what + ": angles must be in rad");
    }
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline Json read_json(const std::filesystem::path& path)
{
    std::string text = read_text(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw InputError("write to '" + path.string() + "' failed");
    }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, dump(j)); }

// Field access with messages that name the offending key.

inline const Json& field(const Json& j, const std::string& key, const std::string& what)
{
    if (!j.is_object() || !j.contains(key)) {
        throw InputError(what + ": missing field \"" + key + "\"");
    }
    return j.at(key);
}

inline double number(const Json& j, const std::string& what)
{
    if (!j.is_number()) {
        throw InputError(what + ": expected a number");
    }
    double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw InputError(what + ": value is not finite");
    }
    return v;
}

inline double number_field(const Json& j, const std::string& key, const std::string& what)
{
    return number(field(j, key, what), what + "." + key);
}

inline double number_or(const Json& j, const std::string& key, double fallback, const std::string& what)
{
    return j.contains(key) ? number(j.at(key), what + "." + key) : fallback;
}

inline std::size_t count_or(const Json& j, const std::string& key, std::size_t fallback, const std::string& what)
{
    if (!j.contains(key)) {
        return fallback;
    }
    const Json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw InputError(what + "." + key + ": expected a nonnegative integer");
    }
    return v.get<std::size_t>();
}

inline bool bool_or(const Json& j, const std::string& key, bool fallback, const std::string& what)
{
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j.at(key).is_boolean()) {
        throw InputError(what + "." + key + ": expected true or false");
    }
    return j.at(key).get<bool>();
}

inline Vec3 vec3(const Json& j, const std::string& what)
{
    if (!j.is_array() || j.size() != 3) {
        throw InputError(what + ": expected [x, y, z]");
    }
    return {number(j[0], what), number(j[1], what), number(j[2], what)};
}

inline std::vector<Vec3> vec3_list(const Json& j, const std::string& what)
{
    if (!j.is_array()) {
        throw InputError(what + ": expected an array of points");
    }
    std::vector<Vec3> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(vec3(j[i], what + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline std::vector<double> number_list(const Json& j, const std::string& what)
{
    if (!j.is_array()) {
        throw InputError(what + ": expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(number(j[i], what + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline Mat3 mat3(const Json& j, const std::string& what)
{
    if (!j.is_array() || j.size() != 3) {
        throw InputError(what + ": expected a 3x3 row-major matrix");
    }
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        m.row(r) = vec3(j[static_cast<std::size_t>(r)], what).transpose();
    }
    return m;
}

inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Json to_json(const Mat3& m)
{
    Json rows = Json::array();
    for (int r = 0; r < 3; ++r) {
        rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
    }
    return rows;
}

inline Json to_json(const std::vector<Vec3>& pts)
{
    Json a = Json::array();
    for (const auto& p : pts) {
        a.push_back(to_json(p));
    }
    return a;
}

inline Json to_json(const RigidTransform& t) { return Json{{"R", to_json(t.rotation)}, {"t", to_json(t.translation)}}; }

inline RigidTransform rigid_transform(const Json& j, const std::string& what)
{
    RigidTransform t;
    t.rotation = mat3(field(j, "R", what), what + ".R");
    t.translation = vec3(field(j, "t", what), what + ".t");
    if (!t.is_valid(1e-8)) {
        throw InputError(what + ": R is not a proper rotation");
    }
    // Re-orthonormalize so printed rotations with finite digits pass the
    // library's tighter check.
    Eigen::JacobiSVD<Mat3> svd(t.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    t.rotation = svd.matrixU() * svd.matrixV().transpose();
    return t;
}

} // namespace overlinkd::io
