#include "modsym/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace modsym {

uint64_t content_digest(const std::string& bytes) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string make_run_dir(const std::string& outdir, const std::string& command,
                         const std::string& label) {
    std::string tag = label;
    if (tag.empty()) {
        auto now = std::chrono::system_clock::now();
        std::time_t tt = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", std::gmtime(&tt));
        tag = buf;
    }
    std::filesystem::path dir = std::filesystem::path(outdir) / (command + "-" + tag);
    std::filesystem::create_directories(dir);
    return dir.string();
}

void write_text(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << bytes;
}

void write_manifest(const std::string& dir, const std::string& command, const json& params,
                    uint64_t table_fingerprint, int threads, double wall_seconds,
                    const std::vector<std::pair<std::string, uint64_t>>& digests) {
    json m;
    m["command"] = command;
    m["parameters"] = params;
    m["coset_table_fingerprint"] = table_fingerprint;
    m["code_version"] = "1.0.0";
    m["threads"] = threads;
    m["wall_seconds"] = wall_seconds;
    json d = json::object();
    for (auto& [name, dig] : digests) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)dig);
        d[name] = buf;
    }
    m["output_digests"] = d;
    write_text(dir + "/manifest.json", m.dump(2) + "\n");
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string svg_histogram_overlay(const std::vector<std::pair<double, double>>& hist,
                                  const std::string& title) {
    const int W = 640, H = 400, ML = 50, MB = 40;
    double zmin = -4, zmax = 4, ymax = 1e-9;
    for (auto& [z, p] : hist) ymax = std::max(ymax, p);
    ymax = std::max(ymax, 0.45);
    auto X = [&](double z) { return ML + (z - zmin) / (zmax - zmin) * (W - ML - 20); };
    auto Y = [&](double y) { return H - MB - y / ymax * (H - MB - 30); };
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\">\n";
    s += "<text x=\"20\" y=\"20\">" + title + "</text>\n";
    s += "<line x1=\"" + fmt(ML) + "\" y1=\"" + fmt(H - MB) + "\" x2=\"" + fmt(W - 20) +
         "\" y2=\"" + fmt(H - MB) + "\" stroke=\"black\"/>\n";
    double pitch = 0.2;
    for (size_t i = 1; i < hist.size(); ++i)
        if (hist[i].first > hist[i - 1].first) {
            pitch = std::max(0.02, hist[i].first - hist[i - 1].first);
            break;
        }
    for (auto& [z, p] : hist) {
        if (z < zmin || z > zmax) continue;
        s += "<rect x=\"" + fmt(X(z - pitch / 2)) + "\" y=\"" + fmt(Y(p)) + "\" width=\"" +
             fmt(X(z + pitch / 2) - X(z - pitch / 2)) + "\" height=\"" + fmt(Y(0) - Y(p)) +
             "\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
    }
    s += "<polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i <= 200; ++i) {
        double z = zmin + (zmax - zmin) * i / 200.0;
        double y = pitch * std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI);
        s += fmt(X(z)) + "," + fmt(Y(y)) + " ";
    }
    s += "\"/>\n</svg>\n";
    return s;
}

std::string svg_scatter_fit(const std::vector<double>& x, const std::vector<double>& y,
                            double slope, double intercept, double r2,
                            const std::string& title) {
    const int W = 640, H = 400, ML = 60, MB = 40;
    double xmin = *std::min_element(x.begin(), x.end());
    double xmax = *std::max_element(x.begin(), x.end());
    double ymin = *std::min_element(y.begin(), y.end());
    double ymax = *std::max_element(y.begin(), y.end());
    double xpad = 0.05 * (xmax - xmin + 1e-12), ypad = 0.1 * (ymax - ymin + 1e-12);
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;
    auto X = [&](double v) { return ML + (v - xmin) / (xmax - xmin) * (W - ML - 20); };
    auto Y = [&](double v) { return H - MB - (v - ymin) / (ymax - ymin) * (H - MB - 30); };
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\">\n";
    s += "<text x=\"20\" y=\"20\">" + title + "</text>\n";
    s += "<text x=\"20\" y=\"38\">slope=" + fmt(slope) + " shift=" + fmt(intercept) +
         " R2=" + fmt(r2) + "</text>\n";
    for (size_t i = 0; i < x.size(); ++i)
        s += "<circle cx=\"" + fmt(X(x[i])) + "\" cy=\"" + fmt(Y(y[i])) +
             "\" r=\"4\" fill=\"steelblue\"/>\n";
    s += "<line x1=\"" + fmt(X(xmin)) + "\" y1=\"" + fmt(Y(slope * xmin + intercept)) +
         "\" x2=\"" + fmt(X(xmax)) + "\" y2=\"" + fmt(Y(slope * xmax + intercept)) +
         "\" stroke=\"crimson\"/>\n</svg>\n";
    return s;
}

std::string svg_deviation_curve(const std::vector<double>& m, const std::vector<double>& dev,
                                const std::string& title) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < m.size(); ++i) {
        lx.push_back(std::log10(m[i]));
        ly.push_back(std::log10(std::max(dev[i], 1e-12)));
    }
    double slope = 0, intercept = 0;
    if (lx.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        size_t n = lx.size();
        for (size_t i = 0; i < n; ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        double det = double(n) * sxx - sx * sx;
        slope = (double(n) * sxy - sx * sy) / det;
        intercept = (sy - slope * sx) / double(n);
    }
    return svg_scatter_fit(lx, ly, slope, intercept, 0.0, title + " (log10-log10)");
}

std::string csv_histogram(const std::vector<std::tuple<double, double, int64_t>>& bins) {
    std::string s = "bin_left,bin_right,count\n";
    for (auto& [l, r, c] : bins) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%lld\n", l, r, (long long)c);
        s += buf;
    }
    return s;
}

std::vector<std::tuple<double, double, int64_t>> fd_bins(
    const std::vector<std::pair<int64_t, int64_t>>& atoms) {
    std::vector<std::tuple<double, double, int64_t>> out;
    if (atoms.empty()) return out;
    int64_t total = 0;
    for (auto& [v, c] : atoms) total += c;
    auto quantile = [&](double q) {
        int64_t target = int64_t(q * double(total));
        int64_t cum = 0;
        for (auto& [v, c] : atoms) {
            cum += c;
            if (cum >= target) return double(v);
        }
        return double(atoms.back().first);
    };
    double iqr = quantile(0.75) - quantile(0.25);
    double width = 2.0 * iqr / std::cbrt(double(total));
    width = std::max(width, 1.0);  // never finer than the integer lattice
    double lo = double(atoms.front().first), hi = double(atoms.back().first) + 1.0;
    int64_t nb = std::max<int64_t>(1, int64_t(std::ceil((hi - lo) / width)));
    std::vector<int64_t> counts(size_t(nb), 0);
    for (auto& [v, c] : atoms) {
        int64_t b = std::min<int64_t>(nb - 1, int64_t((double(v) - lo) / width));
        counts[size_t(b)] += c;
    }
    for (int64_t b = 0; b < nb; ++b)
        out.emplace_back(lo + double(b) * width, lo + double(b + 1) * width, counts[size_t(b)]);
    return out;
}

}  // namespace modsym
