#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace modsym {

using json = nlohmann::json;

// FNV-1a of a byte string; used for output digests in manifests.
uint64_t content_digest(const std::string& bytes);

// Creates <outdir>/<command>-<label>/ and returns the path.  The label
// defaults to a UTC timestamp when empty.
std::string make_run_dir(const std::string& outdir, const std::string& command,
                         const std::string& label);

void write_text(const std::string& path, const std::string& bytes);

// manifest.json: command, parameters, fingerprints, thread count, wall clock,
// and digests of every artifact written so far.
void write_manifest(const std::string& dir, const std::string& command, const json& params,
                    uint64_t table_fingerprint, int threads, double wall_seconds,
                    const std::vector<std::pair<std::string, uint64_t>>& digests);

// deterministic SVG plots (byte-stable for identical inputs)
std::string svg_histogram_overlay(const std::vector<std::pair<double, double>>& hist,
                                  const std::string& title);
std::string svg_scatter_fit(const std::vector<double>& x, const std::vector<double>& y,
                            double slope, double intercept, double r2,
                            const std::string& title);
std::string svg_deviation_curve(const std::vector<double>& m, const std::vector<double>& dev,
                                const std::string& title);

std::string csv_histogram(const std::vector<std::tuple<double, double, int64_t>>& bins);

// Freedman-Diaconis bins over an integer-valued sample given as (value, count).
std::vector<std::tuple<double, double, int64_t>> fd_bins(
    const std::vector<std::pair<int64_t, int64_t>>& atoms);

}  // namespace modsym
