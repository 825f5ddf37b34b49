/*
* Copyright (C) 2026 The straingrid authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#pragma once

#include "straingrid/errors.hpp"
#include "straingrid/model_core.hpp"
#include "straingrid/ode.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace straingrid::io
{

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// Writes `content` to `path` through a temporary sibling and a rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        if (!out.flush()) {
            throw Error("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Columns: t, patch, S, I_1..I_N, D_11..D_NN, mass_defect. One row per sample and patch
/// (patches numbered from 1).
inline std::string full_trajectory_csv(const Trajectory& traj, const FullLayout& lay)
{
    std::string out = "t,patch,S";
    for (std::size_t i = 1; i <= lay.strains; ++i) {
        out += ",I_" + std::to_string(i);
    }
    for (std::size_t i = 1; i <= lay.strains; ++i) {
        for (std::size_t j = 1; j <= lay.strains; ++j) {
            // D_ij for single-digit indices, D_i_j beyond that
            out += ",D_" + std::to_string(i) + (lay.strains > 9 ? "_" : "") + std::to_string(j);
        }
    }
    out += ",mass_defect\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const auto& y = traj.states[k];
        for (std::size_t p = 0; p < lay.patches; ++p) {
            const auto b0 = static_cast<Eigen::Index>(lay.s(p));
            const auto bn = static_cast<Eigen::Index>(lay.block());
            out += format_double(traj.times[k]) + "," + std::to_string(p + 1);
            for (Eigen::Index c = 0; c < bn; ++c) {
                out += "," + format_double(y[b0 + c]);
            }
            out += "," + format_double(y.segment(b0, bn).sum() - 1.0) + "\n";
        }
    }
    return out;
}

/// Columns: tau, patch, z_1..z_N, simplex_defect.
inline std::string replicator_trajectory_csv(const Trajectory& traj, std::size_t patches, std::size_t strains)
{
    std::string out = "tau,patch";
    for (std::size_t i = 1; i <= strains; ++i) {
        out += ",z_" + std::to_string(i);
    }
    out += ",simplex_defect\n";
    const auto n = static_cast<Eigen::Index>(strains);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const auto& z = traj.states[k];
        for (std::size_t p = 0; p < patches; ++p) {
            const auto zp = z.segment(static_cast<Eigen::Index>(p) * n, n);
            out += format_double(traj.times[k]) + "," + std::to_string(p + 1);
            for (Eigen::Index i = 0; i < n; ++i) {
                out += "," + format_double(zp[i]);
            }
            out += "," + format_double(zp.sum() - 1.0) + "\n";
        }
    }
    return out;
}

/// Minimal log-log line chart. Non-positive values are skipped.
struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

inline std::string svg_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<SvgSeries>& series)
{
    constexpr double W = 640, H = 440, L = 80, R = 20, T = 40, B = 60;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (s.x[k] > 0 && s.y[k] > 0) {
                xmin = std::min(xmin, std::log10(s.x[k]));
                xmax = std::max(xmax, std::log10(s.x[k]));
                ymin = std::min(ymin, std::log10(s.y[k]));
                ymax = std::max(ymax, std::log10(s.y[k]));
            }
        }
    }
    if (!(xmin <= xmax)) {
        xmin = ymin = 0;
        xmax = ymax = 1;
    }
    xmin = std::floor(xmin);
    xmax = std::max(std::ceil(xmax), xmin + 1);
    ymin = std::floor(ymin);
    ymax = std::max(std::ceil(ymax), ymin + 1);
    auto px = [&](double v) {
        return L + (std::log10(v) - xmin) / (xmax - xmin) * (W - L - R);
    };
    auto py = [&](double v) {
        return H - B - (std::log10(v) - ymin) / (ymax - ymin) * (H - T - B);
    };
    auto f = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(W) + "\" height=\"" + f(H) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + f(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           title + "</text>\n";
    out += "<rect x=\"" + f(L) + "\" y=\"" + f(T) + "\" width=\"" + f(W - L - R) + "\" height=\"" + f(H - T - B) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double e = xmin; e <= xmax + 1e-9; e += 1) {
        const double x = L + (e - xmin) / (xmax - xmin) * (W - L - R);
        out += "<text x=\"" + f(x) + "\" y=\"" + f(H - B + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e" +
               std::to_string(static_cast<int>(e)) + "</text>\n";
    }
    for (double e = ymin; e <= ymax + 1e-9; e += 1) {
        const double y = H - B - (e - ymin) / (ymax - ymin) * (H - T - B);
        out += "<text x=\"" + f(L - 8) + "\" y=\"" + f(y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" +
               std::to_string(static_cast<int>(e)) + "</text>\n";
    }
    out += "<text x=\"" + f(W / 2) + "\" y=\"" + f(H - 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + xlabel + "</text>\n";
    out += "<text x=\"18\" y=\"" + f(H / 2) + "\" transform=\"rotate(-90 18 " + f(H / 2) +
           ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + ylabel + "</text>\n";

    double ly = T + 16;
    for (const auto& s : series) {
        std::string pts;
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (s.x[k] > 0 && s.y[k] > 0) {
                pts += f(px(s.x[k])) + "," + f(py(s.y[k])) + " ";
                out += "<circle cx=\"" + f(px(s.x[k])) + "\" cy=\"" + f(py(s.y[k])) + "\" r=\"3\" fill=\"" + s.color +
                       "\"/>\n";
            }
        }
        out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        out += "<text x=\"" + f(W - R - 8) + "\" y=\"" + f(ly) + "\" text-anchor=\"end\" fill=\"" + s.color +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label + "</text>\n";
        ly += 16;
    }
    out += "</svg>\n";
    return out;
}

} // namespace straingrid::io
