#include "ptc/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ptc {

namespace {

void append_number(std::string& out, double v, const char* spec) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    out += buf;
}

std::string header(const Trajectory& traj) {
    std::string h = "t,x0";
    for (int i = 1; i <= traj.n; ++i) h += ",x" + std::to_string(i);
    if (traj.has_observer) {
        for (int i = 1; i <= traj.n; ++i) h += ",xi" + std::to_string(i);
    }
    h += ",u0,u,gamma,V\n";
    return h;
}

void append_row(std::string& out, const TrajectorySample& s) {
    append_number(out, s.t, "%.9g");
    out += ",";
    append_number(out, s.x0, "%.15g");
    for (int i = 0; i < s.x.size(); ++i) {
        out += ",";
        append_number(out, s.x(i), "%.15g");
    }
    for (int i = 0; i < s.xi.size(); ++i) {
        out += ",";
        append_number(out, s.xi(i), "%.15g");
    }
    out += ",";
    append_number(out, s.u0, "%.15g");
    out += ",";
    append_number(out, s.u, "%.15g");
    out += ",";
    append_number(out, s.gamma, "%.15g");
    out += ",";
    append_number(out, s.V, "%.15g");
    out += "\n";
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("resample step must be positive");
    std::string out = header(traj);
    if (traj.samples.empty()) return out;
    const double t_end = traj.t_end;
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (t > t_end * (1.0 + 1e-12)) break;
        append_row(out, traj.sample_at(std::min(t, t_end)));
    }
    return out;
}

std::string trajectory_csv_native(const Trajectory& traj) {
    std::string out = header(traj);
    for (const auto& s : traj.samples) append_row(out, s);
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) throw std::runtime_error("cannot create directory " + p.parent_path().string());
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace ptc
