#pragma once

// Seeded fixture generators shared by the unit and acceptance suites.

#include "tracekit/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fixtures {

inline double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// A plausible valid job row; every field present.
inline tracekit::JobTrace random_trace(std::mt19937_64& rng) {
    tracekit::JobTrace t;
    t.node_count = 1 + static_cast<std::int64_t>(unit(rng) * 64);
    t.max_rss = 1000 + unit(rng) * 3.2e7;
    t.start_time = 1420070400 + static_cast<std::int64_t>(unit(rng) * 86400.0 * 900);
    t.end_time = *t.start_time + static_cast<std::int64_t>(unit(rng) * 86400.0 * 2);
    t.alps_exit = unit(rng) < 0.8 ? 0 : 1 + static_cast<std::int64_t>(unit(rng) * 120);
    t.command = unit(rng) < 0.7 ? "/lustre/atlas/chm" + std::to_string(100 + rng() % 900) + "/bin/app"
                                : "/usr/bin/hostname";
    t.gpu_maxmem = unit(rng) * 6.0e6;
    t.gpu_summem = *t.gpu_maxmem * (1 + unit(rng) * 16);
    t.gpu_secs = unit(rng) < 0.85 ? unit(rng) * 90000 : 0.0;
    t.stime = unit(rng) * 5000;
    t.utime = unit(rng) * 50000;
    return t;
}

// CSV job file with a deterministic set of corrupted rows; the corruption
// log is the test oracle for the rejection count.
struct CorruptedFile {
    std::string csv;
    std::vector<std::size_t> corrupted_lines;  // 1-based file lines
};

inline CorruptedFile corrupted_job_file(std::size_t rows, std::size_t corrupt_every,
                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::ostringstream out;
    out << "node_count,max_rss,start_time,end_time,alps_exit,command,gpu_maxmem,"
           "gpu_summem,gpu_secs,stime,utime\n";
    CorruptedFile file;
    for (std::size_t i = 0; i < rows; ++i) {
        tracekit::JobTrace t = random_trace(rng);
        const std::size_t line = i + 2;
        const bool corrupt = corrupt_every != 0 && i % corrupt_every == corrupt_every - 1;
        std::string node = std::to_string(*t.node_count);
        std::string end = std::to_string(*t.end_time);
        std::string rss = std::to_string(*t.max_rss);
        if (corrupt) {
            file.corrupted_lines.push_back(line);
            switch (rng() % 4) {
                case 0: node = "zero"; break;                              // unparseable
                case 1: node = "0"; break;                                 // below 1
                case 2: end = std::to_string(*t.start_time - 100); break;  // ends early
                case 3: rss = "-5"; break;                                 // negative
            }
        }
        out << node << ',' << rss << ',' << *t.start_time << ',' << end << ','
            << *t.alps_exit << ',' << *t.command << ',' << *t.gpu_maxmem << ','
            << *t.gpu_summem << ',' << *t.gpu_secs << ',' << *t.stime << ',' << *t.utime
            << '\n';
    }
    file.csv = out.str();
    return file;
}

// Gaussian blobs for the clustering checks. Returns row-major points and the
// generating labels.
struct Blobs {
    std::vector<double> points;  // n x d
    std::vector<std::uint32_t> labels;
    std::size_t n = 0, d = 0;
};

inline Blobs gaussian_blobs(const std::vector<std::vector<double>>& centers,
                            std::size_t per_blob, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto gauss = [&]() {
        // Box-Muller from canonical doubles keeps the fixture seed-stable.
        const double u1 = std::max(unit(rng), 1e-300);
        const double u2 = unit(rng);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
    };
    Blobs blobs;
    blobs.d = centers.front().size();
    blobs.n = centers.size() * per_blob;
    for (std::size_t c = 0; c < centers.size(); ++c)
        for (std::size_t i = 0; i < per_blob; ++i) {
            for (std::size_t j = 0; j < blobs.d; ++j)
                blobs.points.push_back(centers[c][j] + sigma * gauss());
            blobs.labels.push_back(static_cast<std::uint32_t>(c));
        }
    return blobs;
}

}  // namespace fixtures
